#include "stmg/multigrid.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "stmg/gmres.hpp"
#include "stmg/rng.hpp"

namespace stmg {

namespace {
double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}
} // namespace

std::string coarsening_name(Coarsening c) {
  switch (c) {
  case Coarsening::SpaceH:
    return "space-h";
  case Coarsening::SpaceP:
    return "space-p";
  case Coarsening::TimeTau:
    return "time-tau";
  case Coarsening::TimeK:
    return "time-k";
  }
  return "?";
}

std::vector<LevelSpec> build_level_plan(const LevelSpec& finest,
                                        TimeScheme scheme,
                                        const std::vector<Coarsening>& strategy) {
  const int k_min = scheme == TimeScheme::DG ? 0 : 1;
  LevelSpec cur = finest;
  if (cur.mesh_level < 0 || cur.p < 1 || cur.k < k_min || cur.n_steps < 1)
    throw std::invalid_argument("build_level_plan: invalid finest level");
  std::vector<LevelSpec> plan{cur};
  for (Coarsening c : strategy) {
    switch (c) {
    case Coarsening::SpaceH:
      cur.mesh_level -= 1;
      break;
    case Coarsening::SpaceP:
      if (cur.p == 1)
        throw std::invalid_argument("build_level_plan: p already 1");
      cur.p = std::max(1, cur.p / 2);
      break;
    case Coarsening::TimeTau:
      if (cur.n_steps % 2 != 0)
        throw std::invalid_argument("build_level_plan: odd n_steps");
      cur.n_steps /= 2;
      cur.tau *= 2.0;
      break;
    case Coarsening::TimeK:
      cur.k -= 1;
      break;
    }
    if (cur.mesh_level < 0 || cur.p < 1 || cur.k < k_min || cur.n_steps < 1)
      throw std::invalid_argument("build_level_plan: invalid coarsening step");
    cur.from_finer = c;
    plan.push_back(cur);
  }
  return plan;
}

std::vector<Coarsening> default_strategy(const LevelSpec& finest,
                                         TimeScheme scheme) {
  const int k_min = scheme == TimeScheme::DG ? 0 : 1;
  std::vector<Coarsening> s;
  for (int m = finest.mesh_level; m > 0; --m)
    s.push_back(Coarsening::SpaceH);
  for (int n = finest.n_steps; n > 1; n /= 2)
    s.push_back(Coarsening::TimeTau);
  for (int k = finest.k; k > k_min; --k)
    s.push_back(Coarsening::TimeK);
  return s;
}

SpaceTimeMultigrid::SpaceTimeMultigrid(Equation equation, TimeScheme scheme,
                                       const MeshHierarchy& mesh,
                                       const CoefficientField& rho,
                                       const std::vector<LevelSpec>& plan,
                                       const MultigridOptions& options)
    : options_(options) {
  if (plan.empty())
    throw std::invalid_argument("SpaceTimeMultigrid: empty plan");
  levels_.resize(plan.size());
  for (std::size_t l = 0; l < plan.size(); ++l) {
    Level& lv = levels_[l];
    lv.spec = plan[l];
    lv.weights = scheme == TimeScheme::DG ? dg_weights(lv.spec.k)
                                          : cgp_weights(lv.spec.k);
    const auto& m = mesh.levels.at(static_cast<std::size_t>(lv.spec.mesh_level));
    lv.dofmap = std::make_unique<SpatialDofMap>(m, lv.spec.p);
    lv.mass = std::make_unique<SpatialOperator>(
        SpatialOperator::Kind::Mass, mesh, lv.spec.mesh_level, *lv.dofmap);
    lv.stiffness = std::make_unique<SpatialOperator>(
        SpatialOperator::Kind::Stiffness, mesh, lv.spec.mesh_level, *lv.dofmap,
        rho);
    lv.op = std::make_unique<SpaceTimeOperator>(equation, lv.weights,
                                                lv.spec.tau, lv.spec.n_steps,
                                                *lv.mass, *lv.stiffness);
    const bool coarsest = l + 1 == plan.size();
    if (!coarsest || levels_.size() == 1) {
      lv.smoother = std::make_unique<ASMSmoother>(*lv.op);
      lv.omega = estimate_relaxation(lv, options_.seed + l);
    }
    if (coarsest && lv.op->n_dofs() <= options_.direct_coarse_max) {
      lv.coarse_lu =
          std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      Eigen::SparseMatrix<double> Sys = lv.op->assemble_sparse();
      Sys.makeCompressed();
      lv.coarse_lu->compute(Sys);
      if (lv.coarse_lu->info() != Eigen::Success)
        throw std::runtime_error("SpaceTimeMultigrid: coarse factorization failed");
    }
  }
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l)
    levels_[l].to_coarser =
        std::make_unique<Transfer>(*levels_[l].op, *levels_[l + 1].op);
}

double SpaceTimeMultigrid::estimate_relaxation(const Level& level,
                                               std::uint64_t seed) const {
  // extremal Ritz values of P^-1 S from a short seeded Arnoldi run
  const Index n = level.op->n_dofs();
  const int m = std::min<Index>(options_.eig_iters, n);
  Xoshiro256 rng(seed);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = rng.normal();
  if (v.norm() == 0.0)
    return 1.0;
  v /= v.norm();
  std::vector<Eigen::VectorXd> V{v};
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  int kdim = 0;
  Eigen::VectorXd w, z;
  for (int j = 0; j < m; ++j) {
    level.op->apply(V[static_cast<std::size_t>(j)], w);
    z.setZero(n);
    level.smoother->add_correction(w, z);
    for (int i = 0; i <= j; ++i) {
      H(i, j) = z.dot(V[static_cast<std::size_t>(i)]);
      z.noalias() -= H(i, j) * V[static_cast<std::size_t>(i)];
    }
    H(j + 1, j) = z.norm();
    kdim = j + 1;
    if (H(j + 1, j) < 1e-13)
      break;
    V.push_back(z / H(j + 1, j));
  }
  if (kdim == 0)
    return 1.0;
  const Eigen::MatrixXd Hk = H.topLeftCorner(kdim, kdim);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Hk, false);
  if (es.info() != Eigen::Success)
    return 1.0;
  const Eigen::VectorXd re = es.eigenvalues().real();
  double lmax = re.maxCoeff();
  double lmin = std::max(0.0, re.minCoeff());
  double omega = 2.0 / (lmax + lmin);
  if (!std::isfinite(omega) || omega <= 0.0)
    return 1.0;
  // the smoother definition assumes omega in (0,1); the Ritz-based estimate
  // can exceed 1 with the overlap-weighted Schwarz spectrum, so cap it
  return std::min(omega, 1.0);
}

void SpaceTimeMultigrid::smooth(int l, const Eigen::VectorXd& f,
                                Eigen::VectorXd& u) const {
  const Level& lv = levels_[static_cast<std::size_t>(l)];
  const double t0 = now_seconds();
  Eigen::VectorXd r;
  lv.op->apply(u, r);
  r = f - r;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(r.size());
  lv.smoother->add_correction(r, z);
  u.noalias() += lv.omega * z;
  seconds_smoother_ += now_seconds() - t0;
}

void SpaceTimeMultigrid::coarse_solve(const Eigen::VectorXd& f,
                                      Eigen::VectorXd& u) const {
  const Level& lv = levels_.back();
  if (lv.coarse_lu) {
    u = lv.coarse_lu->solve(f);
    return;
  }
  GmresOptions opts;
  opts.rel_tol = options_.coarse_rel_tol;
  opts.abs_tol = 0.0;
  opts.max_iters = options_.coarse_max_iters;
  u.setZero(f.size());
  gmres([&lv](const Eigen::VectorXd& x, Eigen::VectorXd& y) { lv.op->apply(x, y); },
        f, u, opts);
}

void SpaceTimeMultigrid::v_cycle(int l, const Eigen::VectorXd& f,
                                 Eigen::VectorXd& u) const {
  const Level& lv = levels_[static_cast<std::size_t>(l)];
  if (u.size() != lv.op->n_dofs())
    u = Eigen::VectorXd::Zero(lv.op->n_dofs());
  if (l + 1 == n_levels()) {
    coarse_solve(f, u);
    return;
  }
  for (int i = 0; i < options_.n_smooth; ++i)
    smooth(l, f, u);
  Eigen::VectorXd r;
  lv.op->apply(u, r);
  r = f - r;
  Eigen::VectorXd rc, ec;
  lv.to_coarser->restrict_(r, rc);
  ec = Eigen::VectorXd::Zero(levels_[static_cast<std::size_t>(l) + 1].op->n_dofs());
  v_cycle(l + 1, rc, ec);
  Eigen::VectorXd e;
  lv.to_coarser->prolong(ec, e);
  u += e;
  for (int i = 0; i < options_.n_smooth; ++i)
    smooth(l, f, u);
}

void SpaceTimeMultigrid::apply(const Eigen::VectorXd& r,
                               Eigen::VectorXd& z) const {
  const double t0 = now_seconds();
  z = Eigen::VectorXd::Zero(fine_operator().n_dofs());
  v_cycle(0, r, z);
  seconds_total_ += now_seconds() - t0;
}

std::vector<LevelInfo> SpaceTimeMultigrid::level_info() const {
  std::vector<LevelInfo> info;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const Level& lv = levels_[l];
    info.push_back({l == 0 ? std::string("finest")
                           : coarsening_name(lv.spec.from_finer),
                    lv.spec.mesh_level, lv.spec.p, lv.spec.k, lv.spec.n_steps,
                    lv.op->n_dofs(), lv.omega});
  }
  return info;
}

} // namespace stmg
