#include "stmg/space_time_operator.hpp"

#include <cmath>
#include <stdexcept>

namespace stmg {

SpaceTimeOperator::SpaceTimeOperator(Equation equation,
                                     const TemporalWeights& weights,
                                     double tau, int n_steps,
                                     const SpatialOperator& mass,
                                     const SpatialOperator& stiffness)
    : equation_(equation), weights_(weights), tau_(tau), n_steps_(n_steps),
      mass_(&mass), stiffness_(&stiffness) {
  if (tau <= 0.0 || n_steps < 1)
    throw std::invalid_argument("SpaceTimeOperator: bad tau or n_steps");
  if (mass.kind() != SpatialOperator::Kind::Mass ||
      stiffness.kind() != SpatialOperator::Kind::Stiffness)
    throw std::invalid_argument("SpaceTimeOperator: operator kinds swapped");
  if (&mass.dofmap() != &stiffness.dofmap())
    throw std::invalid_argument("SpaceTimeOperator: dofmap mismatch");
  if (equation_ == Equation::Wave) {
    const int nt = weights_.n_t;
    const Eigen::MatrixXd minv = weights_.m_tau.fullPivLu().inverse();
    ama_ = weights_.a_tau * minv * weights_.a_tau;
    am_alpha_ = weights_.a_tau * minv * weights_.alpha;
    minv_a_last_ = (minv * weights_.a_tau).row(nt - 1);
    minv_alpha_last_ = (minv * weights_.alpha)(nt - 1);
    if (weights_.scheme == TimeScheme::CGP) {
      minv_beta_last_ = (minv * weights_.beta)(nt - 1);
      alpha_a_ = weights_.alpha - weights_.a_tau * minv * weights_.beta;
    }
  }
}

void SpaceTimeOperator::zero_boundary(Eigen::VectorXd& v) const {
  const auto& bdry = dofmap().boundary;
  const Index nx = n_space();
  for (Index b = 0; b < static_cast<Index>(v.size()); b += nx)
    for (Index i = 0; i < nx; ++i)
      if (bdry[static_cast<std::size_t>(i)])
        v[b + i] = 0.0;
}

void SpaceTimeOperator::apply(const Eigen::VectorXd& u,
                              Eigen::VectorXd& y) const {
  if (u.size() != n_dofs())
    throw std::invalid_argument("SpaceTimeOperator::apply: size mismatch");
  ++apply_count_;
  const int S = n_steps_;
  const int nt = weights_.n_t;
  const Index nx = n_space();
  const bool cgp = weights_.scheme == TimeScheme::CGP;

  Eigen::VectorXd ui = u;
  zero_boundary(ui);

  // exactly S*nt mass and stiffness products, reused by every coupling term
  std::vector<Eigen::VectorXd> Mh(static_cast<std::size_t>(S) * nt);
  std::vector<Eigen::VectorXd> Ah(Mh.size());
  for (int s = 0; s < S; ++s)
    for (int i = 0; i < nt; ++i) {
      const Eigen::VectorXd blk = ui.segment(block_offset(s, i), nx);
      mass_->apply(blk, Mh[static_cast<std::size_t>(s) * nt + i]);
      stiffness_->apply(blk, Ah[static_cast<std::size_t>(s) * nt + i]);
    }
  auto M = [&](int s, int i) -> const Eigen::VectorXd& {
    return Mh[static_cast<std::size_t>(s) * nt + i];
  };
  auto A = [&](int s, int i) -> const Eigen::VectorXd& {
    return Ah[static_cast<std::size_t>(s) * nt + i];
  };

  y.setZero(n_dofs());
  if (equation_ == Equation::Heat) {
    for (int s = 0; s < S; ++s)
      for (int i = 0; i < nt; ++i) {
        auto seg = y.segment(block_offset(s, i), nx);
        for (int j = 0; j < nt; ++j)
          seg.noalias() +=
              tau_ * weights_.m_tau(i, j) * A(s, j) + weights_.a_tau(i, j) * M(s, j);
        if (s > 0) {
          if (cgp)
            seg.noalias() += weights_.alpha(i) * M(s - 1, nt - 1) +
                             tau_ * weights_.beta(i) * A(s - 1, nt - 1);
          else
            seg.noalias() -= weights_.alpha(i) * M(s - 1, nt - 1);
        }
      }
  } else {
    // displacement form with eliminated velocity; mv carries the
    // mass-weighted last-node velocity of the previous step
    const double z = minv_alpha_last_ / tau_;
    const double g = -minv_beta_last_;
    Eigen::VectorXd mv_prev = Eigen::VectorXd::Zero(nx);
    for (int s = 0; s < S; ++s) {
      for (int i = 0; i < nt; ++i) {
        auto seg = y.segment(block_offset(s, i), nx);
        for (int j = 0; j < nt; ++j)
          seg.noalias() +=
              tau_ * weights_.m_tau(i, j) * A(s, j) + ama_(i, j) / tau_ * M(s, j);
        if (s > 0) {
          if (cgp)
            seg.noalias() += am_alpha_(i) / tau_ * M(s - 1, nt - 1) +
                             tau_ * weights_.beta(i) * A(s - 1, nt - 1) +
                             alpha_a_(i) * mv_prev;
          else
            seg.noalias() -= am_alpha_(i) / tau_ * M(s - 1, nt - 1) +
                             weights_.alpha(i) * mv_prev;
        }
      }
      Eigen::VectorXd mv = Eigen::VectorXd::Zero(nx);
      for (int j = 0; j < nt; ++j)
        mv.noalias() += minv_a_last_(j) / tau_ * M(s, j);
      if (s > 0) {
        if (cgp)
          mv.noalias() += z * M(s - 1, nt - 1) + g * mv_prev;
        else
          mv.noalias() -= z * M(s - 1, nt - 1);
      }
      mv_prev.swap(mv);
    }
  }

  const auto& bdry = dofmap().boundary;
  for (Index b = 0; b < n_dofs(); b += nx)
    for (Index i = 0; i < nx; ++i)
      if (bdry[static_cast<std::size_t>(i)])
        y[b + i] = u[b + i];
}

Eigen::VectorXd SpaceTimeOperator::apply(const Eigen::VectorXd& u) const {
  Eigen::VectorXd y;
  apply(u, y);
  return y;
}

Eigen::VectorXd SpaceTimeOperator::assemble_rhs(const SpaceTimeFunction& f,
                                                double t0,
                                                const BatchState& entering) const {
  const int S = n_steps_;
  const int nt = weights_.n_t;
  const Index nx = n_space();
  const bool cgp = weights_.scheme == TimeScheme::CGP;
  const bool wave = equation_ == Equation::Wave;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_dofs());

  // source term, collocated at the temporal unknown nodes
  auto mass_of = [&](double t) {
    Eigen::VectorXd fi =
        interpolate(dofmap(), [&](const Point& x) { return f(x, t); });
    Eigen::VectorXd mf;
    zero_boundary(fi);
    mass_->apply(fi, mf);
    return mf;
  };
  for (int s = 0; s < S; ++s) {
    const double t_left = t0 + s * tau_;
    std::vector<Eigen::VectorXd> Ft(static_cast<std::size_t>(nt));
    for (int j = 0; j < nt; ++j)
      Ft[static_cast<std::size_t>(j)] =
          mass_of(t_left + weights_.unknown_nodes[static_cast<std::size_t>(j)] * tau_);
    Eigen::VectorXd Fl;
    if (cgp)
      Fl = mass_of(t_left);
    for (int i = 0; i < nt; ++i) {
      auto seg = rhs.segment(block_offset(s, i), nx);
      for (int j = 0; j < nt; ++j)
        seg.noalias() += tau_ * weights_.m_tau(i, j) * Ft[static_cast<std::size_t>(j)];
      if (cgp)
        seg.noalias() += tau_ * weights_.beta(i) * Fl;
    }
  }

  // coupling to the entering state
  Eigen::VectorXd u0 = entering.u;
  zero_boundary(u0);
  Eigen::VectorXd Mu, Au;
  mass_->apply(u0, Mu);
  stiffness_->apply(u0, Au);
  Eigen::VectorXd mvk; // known contribution to the mass-weighted velocity
  if (wave) {
    Eigen::VectorXd v0 = entering.v;
    zero_boundary(v0);
    mass_->apply(v0, mvk);
  }
  const double z = wave ? minv_alpha_last_ / tau_ : 0.0;
  const double g = -minv_beta_last_;
  for (int s = 0; s < S; ++s) {
    for (int i = 0; i < nt; ++i) {
      auto seg = rhs.segment(block_offset(s, i), nx);
      if (!wave) {
        if (s == 0) {
          if (cgp)
            seg.noalias() -= weights_.alpha(i) * Mu + tau_ * weights_.beta(i) * Au;
          else
            seg.noalias() += weights_.alpha(i) * Mu;
        }
      } else if (s == 0) {
        if (cgp)
          seg.noalias() -= am_alpha_(i) / tau_ * Mu + tau_ * weights_.beta(i) * Au +
                           alpha_a_(i) * mvk;
        else
          seg.noalias() += am_alpha_(i) / tau_ * Mu + weights_.alpha(i) * mvk;
      } else {
        if (cgp)
          seg.noalias() -= alpha_a_(i) * mvk;
        else
          seg.noalias() += weights_.alpha(i) * mvk;
      }
    }
    if (wave) {
      if (s == 0)
        mvk = cgp ? Eigen::VectorXd(z * Mu + g * mvk) : Eigen::VectorXd(-z * Mu);
      else
        mvk = cgp ? Eigen::VectorXd(g * mvk) : Eigen::VectorXd(0.0 * mvk);
    }
  }
  zero_boundary(rhs);
  return rhs;
}

BatchState SpaceTimeOperator::extract_final(const Eigen::VectorXd& u,
                                            const BatchState& entering) const {
  const int S = n_steps_;
  const int nt = weights_.n_t;
  const Index nx = n_space();
  BatchState out;
  out.u = u.segment(block_offset(S - 1, nt - 1), nx);
  if (equation_ == Equation::Heat)
    return out;
  const bool cgp = weights_.scheme == TimeScheme::CGP;
  Eigen::VectorXd vl = entering.v;
  Eigen::VectorXd prev_last = entering.u;
  for (int s = 0; s < S; ++s) {
    Eigen::VectorXd vs = Eigen::VectorXd::Zero(nx);
    for (int j = 0; j < nt; ++j)
      vs.noalias() += minv_a_last_(j) / tau_ * u.segment(block_offset(s, j), nx);
    if (cgp)
      vs.noalias() += minv_alpha_last_ / tau_ * prev_last - minv_beta_last_ * vl;
    else
      vs.noalias() -= minv_alpha_last_ / tau_ * prev_last;
    vl.swap(vs);
    prev_last = u.segment(block_offset(s, nt - 1), nx);
  }
  out.v = vl;
  return out;
}

Eigen::VectorXd SpaceTimeOperator::value_at(const Eigen::VectorXd& u,
                                            const BatchState& entering,
                                            int step, double t_ref) const {
  const int nt = weights_.n_t;
  const Index nx = n_space();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nx);
  for (int i = 0; i < nt; ++i)
    v.noalias() += weights_.unknown_weight(i, t_ref) *
                   u.segment(block_offset(step, i), nx);
  const double lw = weights_.left_weight(t_ref);
  if (lw != 0.0) {
    if (step == 0)
      v.noalias() += lw * entering.u;
    else
      v.noalias() += lw * u.segment(block_offset(step - 1, nt - 1), nx);
  }
  return v;
}

void SpaceTimeOperator::block_coefficients(int s, int j, Eigen::MatrixXd& cM,
                                           Eigen::MatrixXd& cA) const {
  const int nt = weights_.n_t;
  cM = Eigen::MatrixXd::Zero(nt, nt);
  cA = Eigen::MatrixXd::Zero(nt, nt);
  if (j > s)
    return;
  const bool cgp = weights_.scheme == TimeScheme::CGP;
  Eigen::VectorXd e_last = Eigen::VectorXd::Zero(nt);
  e_last(nt - 1) = 1.0;
  if (equation_ == Equation::Heat) {
    if (j == s) {
      cA = tau_ * weights_.m_tau;
      cM = weights_.a_tau;
    } else if (j == s - 1) {
      if (cgp) {
        cM = weights_.alpha * e_last.transpose();
        cA = tau_ * weights_.beta * e_last.transpose();
      } else {
        cM = -weights_.alpha * e_last.transpose();
      }
    }
    return;
  }
  // wave
  if (j == s) {
    cA = tau_ * weights_.m_tau;
    cM = ama_ / tau_;
    return;
  }
  if (!cgp) {
    if (j == s - 1)
      cM = -(am_alpha_ * e_last.transpose() +
             weights_.alpha * minv_a_last_.transpose()) /
           tau_;
    else if (j == s - 2)
      cM = minv_alpha_last_ / tau_ * weights_.alpha * e_last.transpose();
    return;
  }
  const double g = -minv_beta_last_;
  const double z = minv_alpha_last_ / tau_;
  if (j == s - 1) {
    cM += am_alpha_ / tau_ * e_last.transpose();
    cA += tau_ * weights_.beta * e_last.transpose();
  }
  cM += std::pow(g, s - 1 - j) / tau_ * alpha_a_ * minv_a_last_.transpose();
  if (j <= s - 2)
    cM += std::pow(g, s - 2 - j) * z * alpha_a_ * e_last.transpose();
}

Eigen::MatrixXd SpaceTimeOperator::assemble_dense() const {
  const Index n = n_dofs();
  if (n > 20000)
    throw std::length_error("SpaceTimeOperator::assemble_dense: too large");
  const int S = n_steps_;
  const int nt = weights_.n_t;
  const Index nx = n_space();
  const Eigen::MatrixXd Md = mass_->assemble_dense();
  const Eigen::MatrixXd Ad = stiffness_->assemble_dense();
  Eigen::MatrixXd Sys = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd cM, cA;
  for (int s = 0; s < S; ++s)
    for (int j = 0; j <= s; ++j) {
      block_coefficients(s, j, cM, cA);
      for (int k = 0; k < nt; ++k)
        for (int l = 0; l < nt; ++l) {
          if (cM(k, l) != 0.0)
            Sys.block(block_offset(s, k), block_offset(j, l), nx, nx) +=
                cM(k, l) * Md;
          if (cA(k, l) != 0.0)
            Sys.block(block_offset(s, k), block_offset(j, l), nx, nx) +=
                cA(k, l) * Ad;
        }
    }
  const auto& bdry = dofmap().boundary;
  for (Index b = 0; b < n; b += nx)
    for (Index i = 0; i < nx; ++i)
      if (bdry[static_cast<std::size_t>(i)]) {
        Sys.row(b + i).setZero();
        Sys.col(b + i).setZero();
        Sys(b + i, b + i) = 1.0;
      }
  return Sys;
}

Eigen::SparseMatrix<double> SpaceTimeOperator::assemble_sparse() const {
  const Index n = n_dofs();
  const int S = n_steps_;
  const int nt = weights_.n_t;
  const Eigen::SparseMatrix<double> Ms = mass_->assemble_sparse();
  const Eigen::SparseMatrix<double> As = stiffness_->assemble_sparse();
  const auto& bdry = dofmap().boundary;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixXd cM, cA;
  auto add_scaled = [&](const Eigen::SparseMatrix<double>& X, double c,
                        Index row0, Index col0) {
    for (int outer = 0; outer < X.outerSize(); ++outer)
      for (Eigen::SparseMatrix<double>::InnerIterator it(X, outer); it; ++it) {
        if (bdry[static_cast<std::size_t>(it.row())] ||
            bdry[static_cast<std::size_t>(it.col())])
          continue;
        trips.emplace_back(static_cast<int>(row0 + it.row()),
                           static_cast<int>(col0 + it.col()), c * it.value());
      }
  };
  for (int s = 0; s < S; ++s)
    for (int j = 0; j <= s; ++j) {
      block_coefficients(s, j, cM, cA);
      for (int k = 0; k < nt; ++k)
        for (int l = 0; l < nt; ++l) {
          if (cM(k, l) != 0.0)
            add_scaled(Ms, cM(k, l), block_offset(s, k), block_offset(j, l));
          if (cA(k, l) != 0.0)
            add_scaled(As, cA(k, l), block_offset(s, k), block_offset(j, l));
        }
    }
  const Index nx = n_space();
  for (Index b = 0; b < n; b += nx)
    for (Index i = 0; i < nx; ++i)
      if (bdry[static_cast<std::size_t>(i)])
        trips.emplace_back(static_cast<int>(b + i), static_cast<int>(b + i), 1.0);
  Eigen::SparseMatrix<double> Sys(static_cast<int>(n), static_cast<int>(n));
  Sys.setFromTriplets(trips.begin(), trips.end());
  return Sys;
}

} // namespace stmg
