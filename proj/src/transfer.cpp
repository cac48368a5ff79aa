#include "stmg/transfer.hpp"

#include <stdexcept>

namespace stmg {

namespace {

// y[..., i, ...] = sum_j M(i, j) x[..., j, ...] along `axis` (axis 0 fastest)
void contract_axis(const double* x, double* y, const Eigen::MatrixXd& M,
                   int axis, const std::array<Index, 3>& shape_in, int dim) {
  const Index n_in = M.cols();
  const Index n_out = M.rows();
  Index pre = 1, post = 1;
  for (int a = 0; a < axis; ++a)
    pre *= shape_in[a];
  for (int a = axis + 1; a < dim; ++a)
    post *= shape_in[a];
  for (Index po = 0; po < post; ++po)
    for (Index i = 0; i < n_out; ++i)
      for (Index pr = 0; pr < pre; ++pr) {
        double s = 0.0;
        const double* xs = x + po * pre * n_in + pr;
        for (Index j = 0; j < n_in; ++j)
          s += M(i, j) * xs[j * pre];
        y[po * pre * n_out + i * pre + pr] = s;
      }
}

// 1D prolongation along one axis: evaluate the coarse basis at the fine
// support nodes. h-coarsening halves the cell count, p-coarsening keeps it.
Eigen::MatrixXd axis_prolongation(Index fine_cells, int p_fine,
                                  const LagrangeBasis& fine_nodes,
                                  Index coarse_cells, int p_coarse,
                                  const LagrangeBasis& coarse_basis) {
  const Index nf = fine_cells * p_fine + 1;
  const Index nc = coarse_cells * p_coarse + 1;
  const bool h_coarsen = coarse_cells != fine_cells;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nf, nc);
  for (Index cf = 0; cf < fine_cells; ++cf)
    for (int m = 0; m <= p_fine; ++m) {
      const Index row = cf * p_fine + m;
      const double t = fine_nodes.nodes()[static_cast<std::size_t>(m)];
      Index cc = cf;
      double tc = t;
      if (h_coarsen) {
        cc = cf / 2;
        tc = 0.5 * static_cast<double>(cf % 2) + 0.5 * t;
      }
      for (int j = 0; j <= p_coarse; ++j)
        P(row, cc * p_coarse + j) = coarse_basis.eval(j, tc);
    }
  return P;
}

} // namespace

Transfer::Transfer(const SpaceTimeOperator& fine, const SpaceTimeOperator& coarse)
    : fine_(&fine), coarse_(&coarse) {
  const SpatialDofMap& df = fine.dofmap();
  const SpatialDofMap& dc = coarse.dofmap();
  spatial_ = (df.mesh != dc.mesh) || (df.p != dc.p);
  if (spatial_) {
    if (fine.n_steps() != coarse.n_steps() ||
        fine.weights().k != coarse.weights().k ||
        fine.weights().scheme != coarse.weights().scheme)
      throw std::invalid_argument("Transfer: more than one attribute changed");
    const bool h_coarsen = df.mesh != dc.mesh;
    for (int a = 0; a < df.mesh->dim; ++a) {
      if (h_coarsen && dc.mesh->cells[a] * 2 != df.mesh->cells[a])
        throw std::invalid_argument("Transfer: meshes are not nested");
      axis_p_[a] = axis_prolongation(df.mesh->cells[a], df.p, df.support_1d,
                                     dc.mesh->cells[a], dc.p, dc.support_1d);
    }
  } else {
    const TemporalWeights& wf = fine.weights();
    const TemporalWeights& wc = coarse.weights();
    const int Sf = fine.n_steps();
    const int Sc = coarse.n_steps();
    const bool tau_coarsen = Sf != Sc;
    if (tau_coarsen && (Sf != 2 * Sc || wf.k != wc.k))
      throw std::invalid_argument("Transfer: invalid tau coarsening");
    if (!tau_coarsen && wf.k != wc.k + 1)
      throw std::invalid_argument("Transfer: invalid k coarsening");
    time_p_ = Eigen::MatrixXd::Zero(Sf * wf.n_t, Sc * wc.n_t);
    for (int sf = 0; sf < Sf; ++sf)
      for (int i = 0; i < wf.n_t; ++i) {
        const int row = sf * wf.n_t + i;
        const double tf = wf.unknown_nodes[static_cast<std::size_t>(i)];
        int sc = sf;
        double tc = tf;
        if (tau_coarsen) {
          sc = sf / 2;
          tc = 0.5 * static_cast<double>(sf % 2) + 0.5 * tf;
        }
        for (int j = 0; j < wc.n_t; ++j)
          time_p_(row, sc * wc.n_t + j) += wc.unknown_weight(j, tc);
        // CGP left value of a coarse step: last node of the previous step;
        // for the first step it is the (zero) constrained initial value of
        // the correction and drops out
        const double lw = wc.left_weight(tc);
        if (lw != 0.0 && sc > 0)
          time_p_(row, sc * wc.n_t - 1) += lw;
      }
  }
}

void Transfer::zero_constrained(const SpaceTimeOperator& op,
                                Eigen::VectorXd& v) const {
  const auto& bdry = op.dofmap().boundary;
  const Index nx = op.n_space();
  for (Index b = 0; b < static_cast<Index>(v.size()); b += nx)
    for (Index i = 0; i < nx; ++i)
      if (bdry[static_cast<std::size_t>(i)])
        v[b + i] = 0.0;
}

void Transfer::prolong(const Eigen::VectorXd& coarse,
                       Eigen::VectorXd& fine) const {
  if (coarse.size() != coarse_->n_dofs())
    throw std::invalid_argument("Transfer::prolong: size mismatch");
  Eigen::VectorXd c = coarse;
  zero_constrained(*coarse_, c);
  fine.setZero(fine_->n_dofs());
  if (spatial_) {
    const int dim = fine_->dofmap().mesh->dim;
    const Index nxc = coarse_->n_space();
    const Index nxf = fine_->n_space();
    std::array<Index, 3> shape{1, 1, 1};
    Eigen::VectorXd buf_a(std::max(nxc, nxf) * 4), buf_b(buf_a.size());
    const int blocks = fine_->n_steps() * fine_->n_t();
    for (int b = 0; b < blocks; ++b) {
      const double* src = c.data() + static_cast<Index>(b) * nxc;
      shape = coarse_->dofmap().dofs_axis;
      for (int a = 0; a < dim; ++a) {
        double* dst = (a % 2 == 0) ? buf_a.data() : buf_b.data();
        contract_axis(src, dst, axis_p_[a], a, shape, dim);
        shape[a] = axis_p_[a].rows();
        src = dst;
      }
      std::copy(src, src + nxf, fine.data() + static_cast<Index>(b) * nxf);
    }
  } else {
    const Index nx = fine_->n_space();
    for (Index r = 0; r < time_p_.rows(); ++r)
      for (Index cidx = 0; cidx < time_p_.cols(); ++cidx)
        if (time_p_(r, cidx) != 0.0)
          fine.segment(r * nx, nx).noalias() +=
              time_p_(r, cidx) * c.segment(cidx * nx, nx);
  }
  zero_constrained(*fine_, fine);
}

void Transfer::restrict_(const Eigen::VectorXd& fine,
                         Eigen::VectorXd& coarse) const {
  if (fine.size() != fine_->n_dofs())
    throw std::invalid_argument("Transfer::restrict: size mismatch");
  Eigen::VectorXd f = fine;
  zero_constrained(*fine_, f);
  coarse.setZero(coarse_->n_dofs());
  if (spatial_) {
    const int dim = fine_->dofmap().mesh->dim;
    const Index nxc = coarse_->n_space();
    const Index nxf = fine_->n_space();
    Eigen::VectorXd buf_a(std::max(nxc, nxf) * 4), buf_b(buf_a.size());
    std::array<Eigen::MatrixXd, 3> pt;
    for (int a = 0; a < dim; ++a)
      pt[a] = axis_p_[a].transpose();
    const int blocks = fine_->n_steps() * fine_->n_t();
    for (int b = 0; b < blocks; ++b) {
      const double* src = f.data() + static_cast<Index>(b) * nxf;
      std::array<Index, 3> shape = fine_->dofmap().dofs_axis;
      for (int a = 0; a < dim; ++a) {
        double* dst = (a % 2 == 0) ? buf_a.data() : buf_b.data();
        contract_axis(src, dst, pt[a], a, shape, dim);
        shape[a] = pt[a].rows();
        src = dst;
      }
      std::copy(src, src + nxc, coarse.data() + static_cast<Index>(b) * nxc);
    }
  } else {
    const Index nx = fine_->n_space();
    for (Index r = 0; r < time_p_.rows(); ++r)
      for (Index cidx = 0; cidx < time_p_.cols(); ++cidx)
        if (time_p_(r, cidx) != 0.0)
          coarse.segment(cidx * nx, nx).noalias() +=
              time_p_(r, cidx) * f.segment(r * nx, nx);
  }
  zero_constrained(*coarse_, coarse);
}

} // namespace stmg
