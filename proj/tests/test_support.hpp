#pragma once

// Shared helpers for the unit tests and the acceptance suite: scalar-ODE
// reference steps for the temporal weights, a discretization rebuild that
// mirrors march(), and the property-check functions ("invariants") that are
// exercised both as doctest cases and inside the acceptance binary.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "stmg/driver.hpp"
#include "stmg/rng.hpp"

namespace stmg_test {

using namespace stmg;

// ---------------------------------------------------------------------------
// scalar-ODE reference steps (u' + lambda u = 0 on one step of size tau)

/// DG step: (a_tau + tau lambda m_tau) u = alpha * u_prev; returns u(t_n^-).
inline double scalar_dg_step(const TemporalWeights& w, double tau,
                             double lambda, double u_prev) {
  const Eigen::MatrixXd A = w.a_tau + tau * lambda * w.m_tau;
  const Eigen::VectorXd u = A.partialPivLu().solve(w.alpha * u_prev);
  return u[w.n_t - 1];
}

/// CGP step: (a_tau + tau lambda m_tau) u = -(alpha + tau lambda beta) u_prev.
inline double scalar_cgp_step(const TemporalWeights& w, double tau,
                              double lambda, double u_prev) {
  const Eigen::MatrixXd A = w.a_tau + tau * lambda * w.m_tau;
  const Eigen::VectorXd rhs = -(w.alpha + tau * lambda * w.beta) * u_prev;
  const Eigen::VectorXd u = A.partialPivLu().solve(rhs);
  return u[w.n_t - 1];
}

/// DG stability function R(z): one step of u' = (z/tau) u with tau folded in,
/// i.e. solve (a_tau - z m_tau) u = alpha and return the endpoint value.
inline double dg_stability(int k, double z) {
  const TemporalWeights w = dg_weights(k);
  const Eigen::MatrixXd A = w.a_tau - z * w.m_tau;
  const Eigen::VectorXd u = A.partialPivLu().solve(w.alpha);
  return u[w.n_t - 1];
}

// ---------------------------------------------------------------------------
// discretization rebuild mirroring march()

/// All objects needed to inspect a trajectory produced by march() with
/// keep_trajectory: mesh, dof map, spatial operators, and the batched
/// space-time operator, built with the exact conventions of the driver.
struct Rebuilt {
  MeshHierarchy mesh;
  std::unique_ptr<SpatialDofMap> dofmap;
  std::unique_ptr<SpatialOperator> mass;
  std::unique_ptr<SpatialOperator> stiffness;
  std::unique_ptr<SpaceTimeOperator> op;
  TemporalWeights weights;
  int n_steps_total = 0;
  double tau = 0.0;
};

inline Rebuilt rebuild(const ProblemSpec& spec) {
  Rebuilt r;
  r.n_steps_total = spec.base_time_intervals << (spec.refinements + 1);
  r.tau = spec.t_final / r.n_steps_total;
  r.mesh = make_cartesian(spec.dim, spec.lo, spec.hi, spec.base_cells,
                          spec.refinements);
  if (spec.perturb > 0.0)
    perturb(r.mesh, spec.perturb, spec.seed);
  r.weights = spec.scheme == TimeScheme::DG ? dg_weights(spec.k)
                                            : cgp_weights(spec.k);
  const int fine = spec.refinements;
  r.dofmap = std::make_unique<SpatialDofMap>(
      r.mesh.levels[static_cast<std::size_t>(fine)], spec.p);
  r.mass = std::make_unique<SpatialOperator>(SpatialOperator::Kind::Mass,
                                             r.mesh, fine, *r.dofmap);
  r.stiffness = std::make_unique<SpatialOperator>(
      SpatialOperator::Kind::Stiffness, r.mesh, fine, *r.dofmap, spec.rho);
  r.op = std::make_unique<SpaceTimeOperator>(spec.equation, r.weights, r.tau,
                                             spec.batch, *r.mass, *r.stiffness);
  return r;
}

/// Relative discrete L2(L2) distance between two trajectories of the same
/// problem solved with different batch sizes, sampled at k+2 temporal Gauss
/// points per step with the mass-weighted spatial norm.
inline double trajectory_distance(const Rebuilt& a, const RunReport& ra,
                                  const Rebuilt& b, const RunReport& rb) {
  const QuadratureRule q = gauss(a.op->weights().k + 2);
  double num = 0.0, den = 0.0;
  const int ca = a.op->n_steps(), cb = b.op->n_steps();
  for (int g = 0; g < a.n_steps_total; ++g) {
    const int ba = g / ca, sa = g % ca;
    const int bb = g / cb, sb = g % cb;
    for (int iq = 0; iq < q.size(); ++iq) {
      const Eigen::VectorXd ua = a.op->value_at(
          ra.trajectory[ba], ra.entering_states[ba], sa, q.points[iq]);
      const Eigen::VectorXd ub = b.op->value_at(
          rb.trajectory[bb], rb.entering_states[bb], sb, q.points[iq]);
      const Eigen::VectorXd d = ua - ub;
      num += q.weights[iq] * a.tau * d.dot(a.mass->apply(d));
      den += q.weights[iq] * a.tau * ua.dot(a.mass->apply(ua));
    }
  }
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// invariant checks (return true on success, append detail to msg on failure)

inline bool check_quadrature(std::string& msg) {
  bool ok = true;
  auto exact_monomials = [&](const QuadratureRule& r, int max_deg,
                             const char* name) {
    double wsum = 0.0;
    for (double w : r.weights)
      wsum += w;
    if (std::abs(wsum - 1.0) > 1e-14) {
      msg += std::string(name) + ": weights do not sum to 1; ";
      ok = false;
    }
    for (int m = 0; m <= max_deg; ++m) {
      double s = 0.0;
      for (int i = 0; i < r.size(); ++i)
        s += r.weights[i] * std::pow(r.points[i], m);
      if (std::abs(s - 1.0 / (m + 1)) > 1e-13) {
        std::ostringstream os;
        os << name << " n=" << r.size() << " deg " << m << " err "
           << std::abs(s - 1.0 / (m + 1)) << "; ";
        msg += os.str();
        ok = false;
      }
    }
  };
  for (int n = 1; n <= 6; ++n)
    exact_monomials(gauss(n), 2 * n - 1, "gauss");
  for (int n = 2; n <= 6; ++n)
    exact_monomials(gauss_lobatto(n), 2 * n - 3, "lobatto");
  for (int n = 1; n <= 6; ++n)
    exact_monomials(gauss_radau_right(n), 2 * n - 2, "radau");
  return ok;
}

/// builds fine/coarse operator pairs for every coarsening kind and checks
/// <P x_c, y_f> == <x_c, R y_f> on random vectors to 1e-12 (relative).
inline bool check_transfer_adjointness(std::string& msg) {
  bool ok = true;
  const MeshHierarchy mesh =
      make_cartesian(2, {0, 0, 0}, {1, 1, 1}, 3, 1);
  Xoshiro256 rng(7);
  for (TimeScheme scheme : {TimeScheme::DG, TimeScheme::CGP}) {
    const TemporalWeights wf = scheme == TimeScheme::DG ? dg_weights(2)
                                                        : cgp_weights(2);
    const TemporalWeights wk = scheme == TimeScheme::DG ? dg_weights(1)
                                                        : cgp_weights(1);
    SpatialDofMap dmf(mesh.levels[1], 2);
    SpatialDofMap dmc_h(mesh.levels[0], 2);
    SpatialDofMap dmc_p(mesh.levels[1], 1);
    SpatialOperator mf(SpatialOperator::Kind::Mass, mesh, 1, dmf);
    SpatialOperator af(SpatialOperator::Kind::Stiffness, mesh, 1, dmf);
    SpatialOperator mc_h(SpatialOperator::Kind::Mass, mesh, 0, dmc_h);
    SpatialOperator ac_h(SpatialOperator::Kind::Stiffness, mesh, 0, dmc_h);
    SpatialOperator mc_p(SpatialOperator::Kind::Mass, mesh, 1, dmc_p);
    SpatialOperator ac_p(SpatialOperator::Kind::Stiffness, mesh, 1, dmc_p);
    const SpaceTimeOperator fine(Equation::Heat, wf, 0.25, 4, mf, af);
    std::vector<std::pair<const char*, SpaceTimeOperator>> coarse;
    coarse.emplace_back("space-h", SpaceTimeOperator(Equation::Heat, wf, 0.25,
                                                     4, mc_h, ac_h));
    coarse.emplace_back("space-p", SpaceTimeOperator(Equation::Heat, wf, 0.25,
                                                     4, mc_p, ac_p));
    coarse.emplace_back("time-tau", SpaceTimeOperator(Equation::Heat, wf, 0.5,
                                                      2, mf, af));
    coarse.emplace_back("time-k", SpaceTimeOperator(Equation::Heat, wk, 0.25,
                                                    4, mf, af));
    for (auto& [name, cop] : coarse) {
      const Transfer t(fine, cop);
      for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd xc(cop.n_dofs()), yf(fine.n_dofs());
        for (Index i = 0; i < xc.size(); ++i)
          xc[i] = rng.normal();
        for (Index i = 0; i < yf.size(); ++i)
          yf[i] = rng.normal();
        Eigen::VectorXd px(fine.n_dofs()), ry(cop.n_dofs());
        t.prolong(xc, px);
        t.restrict_(yf, ry);
        const double lhs = px.dot(yf), rhs = xc.dot(ry);
        const double scale = px.norm() * yf.norm() + 1e-30;
        if (std::abs(lhs - rhs) > 1e-12 * scale) {
          std::ostringstream os;
          os << (scheme == TimeScheme::DG ? "dg " : "cgp ") << name
             << " adjointness err " << std::abs(lhs - rhs) / scale << "; ";
          msg += os.str();
          ok = false;
        }
      }
    }
  }
  return ok;
}

/// prolongation reproduces the coarse function exactly: the prolonged vector
/// agrees with the coarse trajectory / coarse FE function at the fine
/// degrees of freedom.
inline bool check_prolongation_exactness(std::string& msg) {
  bool ok = true;
  Xoshiro256 rng(11);
  auto fail = [&](const std::string& what, double err) {
    std::ostringstream os;
    os << what << " err " << err << "; ";
    msg += os.str();
    ok = false;
  };

  // spatial (h and p): prolonged coefficients represent the same function
  {
    const MeshHierarchy mesh = make_cartesian(1, {0, 0, 0}, {1, 1, 1}, 4, 1);
    const TemporalWeights w = dg_weights(1);
    SpatialDofMap dmf(mesh.levels[1], 2);
    SpatialDofMap dmc_h(mesh.levels[0], 2);
    SpatialDofMap dmc_p(mesh.levels[1], 1);
    SpatialOperator mf(SpatialOperator::Kind::Mass, mesh, 1, dmf);
    SpatialOperator af(SpatialOperator::Kind::Stiffness, mesh, 1, dmf);
    SpatialOperator mc_h(SpatialOperator::Kind::Mass, mesh, 0, dmc_h);
    SpatialOperator ac_h(SpatialOperator::Kind::Stiffness, mesh, 0, dmc_h);
    SpatialOperator mc_p(SpatialOperator::Kind::Mass, mesh, 1, dmc_p);
    SpatialOperator ac_p(SpatialOperator::Kind::Stiffness, mesh, 1, dmc_p);
    const SpaceTimeOperator fine(Equation::Heat, w, 0.5, 2, mf, af);
    const SpaceTimeOperator ch(Equation::Heat, w, 0.5, 2, mc_h, ac_h);
    const SpaceTimeOperator cp(Equation::Heat, w, 0.5, 2, mc_p, ac_p);
    struct Case {
      const char* name;
      const SpaceTimeOperator* cop;
      const SpatialDofMap* dmc;
      const MeshLevel* mesh_c;
    };
    for (const Case& c : {Case{"space-h", &ch, &dmc_h, &mesh.levels[0]},
                          Case{"space-p", &cp, &dmc_p, &mesh.levels[1]}}) {
      const Transfer t(fine, *c.cop);
      Eigen::VectorXd xc(c.cop->n_dofs());
      for (Index i = 0; i < xc.size(); ++i)
        xc[i] = rng.normal();
      for (int s = 0; s < 2; ++s)
        for (int nt = 0; nt < w.n_t; ++nt)
          for (Index i = 0; i < c.dmc->n_dofs; ++i)
            if (c.dmc->boundary[static_cast<std::size_t>(i)])
              xc[c.cop->block_offset(s, nt) + i] = 0.0;
      Eigen::VectorXd xf(fine.n_dofs());
      t.prolong(xc, xf);
      // compare as functions at random points, slot (0, 0)
      const Eigen::VectorXd uc = xc.segment(0, c.dmc->n_dofs);
      const Eigen::VectorXd uf = xf.segment(0, dmf.n_dofs);
      double err = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        const Point x{0.02 + 0.96 * rng.uniform(), 0.0, 0.0};
        const auto [cc, xic] = locate_point(*c.mesh_c, x);
        const auto [cf, xif] = locate_point(mesh.levels[1], x);
        err = std::max(err, std::abs(evaluate_fe(*c.dmc, uc, cc, xic) -
                                     evaluate_fe(dmf, uf, cf, xif)));
      }
      if (err > 1e-12)
        fail(c.name, err);
    }
  }

  // temporal (tau and k): prolonged coefficients equal the coarse trajectory
  // evaluated at the fine temporal unknown nodes (zero entering state, the
  // convention of multigrid corrections)
  {
    const MeshHierarchy mesh = make_cartesian(1, {0, 0, 0}, {1, 1, 1}, 4, 0);
    SpatialDofMap dm(mesh.levels[0], 2);
    SpatialOperator m(SpatialOperator::Kind::Mass, mesh, 0, dm);
    SpatialOperator a(SpatialOperator::Kind::Stiffness, mesh, 0, dm);
    for (TimeScheme scheme : {TimeScheme::DG, TimeScheme::CGP}) {
      const TemporalWeights wf = scheme == TimeScheme::DG ? dg_weights(2)
                                                          : cgp_weights(2);
      const TemporalWeights wk = scheme == TimeScheme::DG ? dg_weights(1)
                                                          : cgp_weights(1);
      const SpaceTimeOperator fine(Equation::Heat, wf, 0.25, 4, m, a);
      const SpaceTimeOperator ctau(Equation::Heat, wf, 0.5, 2, m, a);
      const SpaceTimeOperator ck(Equation::Heat, wk, 0.25, 4, m, a);
      struct TCase {
        const char* name;
        const SpaceTimeOperator* cop;
        int steps_per_coarse; // fine steps per coarse step
      };
      for (const TCase& c : {TCase{"time-tau", &ctau, 2},
                             TCase{"time-k", &ck, 1}}) {
        const Transfer t(fine, *c.cop);
        Eigen::VectorXd xc(c.cop->n_dofs());
        for (Index i = 0; i < xc.size(); ++i)
          xc[i] = rng.normal();
        for (int s = 0; s < c.cop->n_steps(); ++s)
          for (int nt = 0; nt < c.cop->n_t(); ++nt)
            for (Index i = 0; i < dm.n_dofs; ++i)
              if (dm.boundary[static_cast<std::size_t>(i)])
                xc[c.cop->block_offset(s, nt) + i] = 0.0;
        Eigen::VectorXd xf(fine.n_dofs());
        t.prolong(xc, xf);
        BatchState zero;
        zero.u = Eigen::VectorXd::Zero(dm.n_dofs);
        BatchState zero_fine = zero;
        double err = 0.0;
        for (int sf = 0; sf < fine.n_steps(); ++sf) {
          const int sc = sf / c.steps_per_coarse;
          const int sub = sf % c.steps_per_coarse;
          for (int nt = 0; nt < fine.n_t(); ++nt) {
            // reference time of this fine unknown inside the coarse step
            const double tr = (sub + wf.unknown_nodes[static_cast<std::size_t>(
                                         nt)]) /
                              c.steps_per_coarse;
            const Eigen::VectorXd expect = c.cop->value_at(xc, zero, sc, tr);
            const Eigen::VectorXd got =
                xf.segment(fine.block_offset(sf, nt), dm.n_dofs);
            err = std::max(err, (expect - got).lpNorm<Eigen::Infinity>());
          }
        }
        if (err > 1e-12)
          fail(std::string(scheme == TimeScheme::DG ? "dg " : "cgp ") + c.name,
               err);
      }
    }
  }
  return ok;
}

/// CGP trajectories are continuous across step and batch boundaries.
inline bool check_cgp_continuity(std::string& msg) {
  bool ok = true;
  for (int k : {1, 2}) {
    ProblemSpec spec;
    spec.equation = Equation::Heat;
    spec.scheme = TimeScheme::CGP;
    spec.k = k;
    spec.p = 2;
    spec.dim = 1;
    spec.base_cells = 4;
    spec.refinements = 1;
    spec.batch = 2;
    spec.keep_trajectory = true;
    manufactured_problem(spec, 1.0);
    const RunReport run = march(spec);
    const Rebuilt rb = rebuild(spec);
    double jump = 0.0;
    for (std::size_t b = 0; b < run.trajectory.size(); ++b) {
      const Eigen::VectorXd& u = run.trajectory[b];
      const BatchState& ent = run.entering_states[b];
      for (int s = 0; s + 1 < rb.op->n_steps(); ++s) {
        const Eigen::VectorXd left = rb.op->value_at(u, ent, s, 1.0);
        const Eigen::VectorXd right = rb.op->value_at(u, ent, s + 1, 0.0);
        jump = std::max(jump, (left - right).lpNorm<Eigen::Infinity>());
      }
      if (b + 1 < run.trajectory.size()) {
        const Eigen::VectorXd left =
            rb.op->value_at(u, ent, rb.op->n_steps() - 1, 1.0);
        const Eigen::VectorXd right = rb.op->value_at(
            run.trajectory[b + 1], run.entering_states[b + 1], 0, 0.0);
        jump = std::max(jump, (left - right).lpNorm<Eigen::Infinity>());
      }
    }
    if (jump > 1e-12) {
      std::ostringstream os;
      os << "cgp k=" << k << " continuity jump " << jump << "; ";
      msg += os.str();
      ok = false;
    }
  }
  return ok;
}

/// DG interface jumps decay with rate >= k+1 under temporal refinement on a
/// spatially exact problem (u = sin(2 pi t) x(1-x), Q2 in space).
inline bool check_dg_jump_decay(std::string& msg) {
  bool ok = true;
  const double two_pi = 2.0 * M_PI;
  const MeshHierarchy mesh = make_cartesian(1, {0, 0, 0}, {1, 1, 1}, 8, 0);
  SpatialDofMap dm(mesh.levels[0], 2);
  SpatialOperator m(SpatialOperator::Kind::Mass, mesh, 0, dm);
  SpatialOperator a(SpatialOperator::Kind::Stiffness, mesh, 0, dm);
  const SpaceTimeFunction f = [two_pi](const Point& x, double t) {
    const double g = x[0] * (1.0 - x[0]);
    return two_pi * std::cos(two_pi * t) * g + 2.0 * std::sin(two_pi * t);
  };
  for (int k : {1, 2}) {
    const TemporalWeights w = dg_weights(k);
    std::vector<double> jumps;
    for (int n : {8, 16, 32}) {
      const double tau = 1.0 / n;
      const SpaceTimeOperator op(Equation::Heat, w, tau, n, m, a);
      BatchState entering;
      entering.u = Eigen::VectorXd::Zero(dm.n_dofs); // u(.,0) = 0
      const Eigen::VectorXd rhs = op.assemble_rhs(f, 0.0, entering);
      const Eigen::VectorXd u = op.assemble_dense().partialPivLu().solve(rhs);
      double jump = 0.0;
      for (int s = 1; s < n; ++s) {
        const Eigen::VectorXd left = op.value_at(u, entering, s - 1, 1.0);
        const Eigen::VectorXd right = op.value_at(u, entering, s, 0.0);
        jump = std::max(jump, (left - right).lpNorm<Eigen::Infinity>());
      }
      jumps.push_back(jump);
    }
    // the finest pair is in the asymptotic regime; earlier pairs are not
    const double rate = std::log2(jumps[1] / jumps[2]);
    if (!(rate >= k + 1 - 0.15)) {
      std::ostringstream os;
      os << "dg k=" << k << " jump rate " << rate << " < " << k + 1 << "; ";
      msg += os.str();
      ok = false;
    }
  }
  return ok;
}

/// unconstrained stiffness annihilates constants and is symmetric; the mass
/// form is positive.
inline bool check_stiffness_invariants(std::string& msg) {
  bool ok = true;
  Xoshiro256 rng(23);
  for (bool perturbed : {false, true}) {
    MeshHierarchy mesh = make_cartesian(2, {0, 0, 0}, {1, 1, 1}, 4, 1);
    if (perturbed)
      perturb(mesh, 0.12, 5);
    SpatialDofMap dm(mesh.levels[1], 2);
    const SpatialOperator a(SpatialOperator::Kind::Stiffness, mesh, 1, dm,
                            coefficient_shm(2), /*constrained=*/false);
    const SpatialOperator m(SpatialOperator::Kind::Mass, mesh, 1, dm,
                            constant_coefficient(1.0), /*constrained=*/false);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dm.n_dofs);
    const double null_err = a.apply(ones).lpNorm<Eigen::Infinity>();
    if (null_err > 1e-11) {
      std::ostringstream os;
      os << (perturbed ? "perturbed" : "cartesian")
         << " stiffness null-space err " << null_err << "; ";
      msg += os.str();
      ok = false;
    }
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd x(dm.n_dofs), y(dm.n_dofs);
      for (Index i = 0; i < dm.n_dofs; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
      }
      const double sym = std::abs(x.dot(a.apply(y)) - y.dot(a.apply(x)));
      const double scale = x.norm() * y.norm();
      if (sym > 1e-12 * scale) {
        msg += "stiffness symmetry err; ";
        ok = false;
      }
      if (!(x.dot(m.apply(x)) > 0.0)) {
        msg += "mass not positive; ";
        ok = false;
      }
    }
  }
  return ok;
}

/// matrix-free apply vs the conventionally assembled dense matrix on random
/// vectors; returns the worst relative error over the requested cases.
inline double matrix_free_worst_error(const std::vector<int>& ks,
                                      const std::vector<int>& ps,
                                      const std::vector<int>& dims,
                                      int n_vectors) {
  Xoshiro256 rng(31);
  double worst = 0.0;
  for (int dim : dims) {
    for (bool perturbed : {false, true}) {
      MeshHierarchy mesh = make_cartesian(
          dim, {0, 0, 0}, {1, 1, 1}, dim == 1 ? 8 : 4, 0);
      if (perturbed)
        perturb(mesh, 0.1, 3);
      for (int p : ps) {
        SpatialDofMap dm(mesh.levels[0], p);
        SpatialOperator m(SpatialOperator::Kind::Mass, mesh, 0, dm);
        SpatialOperator a(SpatialOperator::Kind::Stiffness, mesh, 0, dm,
                          coefficient_shm(dim));
        for (Equation eq : {Equation::Heat, Equation::Wave}) {
          for (TimeScheme scheme : {TimeScheme::DG, TimeScheme::CGP}) {
            for (int k : ks) {
              if (scheme == TimeScheme::CGP && k < 1)
                continue;
              const TemporalWeights w = scheme == TimeScheme::DG
                                            ? dg_weights(k)
                                            : cgp_weights(k);
              const SpaceTimeOperator op(eq, w, 0.3, 2, m, a);
              const Eigen::MatrixXd dense = op.assemble_dense();
              const double dense_norm = dense.norm();
              for (int trial = 0; trial < n_vectors; ++trial) {
                Eigen::VectorXd x(op.n_dofs());
                for (Index i = 0; i < x.size(); ++i)
                  x[i] = rng.normal();
                const Eigen::VectorXd diff = op.apply(x) - dense * x;
                worst = std::max(worst,
                                 diff.norm() / (dense_norm * x.norm()));
              }
            }
          }
        }
      }
    }
  }
  return worst;
}

} // namespace stmg_test
