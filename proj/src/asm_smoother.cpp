#include "stmg/asm_smoother.hpp"

#include <stdexcept>

namespace stmg {

ASMSmoother::ASMSmoother(const SpaceTimeOperator& op) : op_(&op) {
  const SpatialDofMap& dm = op.dofmap();
  const int nt = op.n_t();
  const int nd_cell = dm.dofs_per_cell();
  block_size_ = nt * nd_cell;
  const Index n_cells = dm.mesh->n_cells();
  const int S = op.n_steps();

  const Eigen::SparseMatrix<double> Sys = op.assemble_sparse();
  blocks_.reserve(static_cast<std::size_t>(n_cells) * S);
  lu_.reserve(blocks_.capacity());
  dofs_.reserve(blocks_.capacity());

  std::vector<Index> cell_dofs;
  for (int s = 0; s < S; ++s)
    for (Index c = 0; c < n_cells; ++c) {
      dm.cell_dofs(c, cell_dofs);
      std::vector<Index> gd(static_cast<std::size_t>(block_size_));
      for (int i = 0; i < nt; ++i)
        for (int l = 0; l < nd_cell; ++l)
          gd[static_cast<std::size_t>(i * nd_cell + l)] =
              op.block_offset(s, i) + cell_dofs[static_cast<std::size_t>(l)];
      Eigen::MatrixXd B(block_size_, block_size_);
      for (int a = 0; a < block_size_; ++a)
        for (int b = 0; b < block_size_; ++b)
          B(a, b) = Sys.coeff(static_cast<int>(gd[static_cast<std::size_t>(a)]),
                              static_cast<int>(gd[static_cast<std::size_t>(b)]));
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      const double bnorm = B.norm();
      const double min_pivot =
          lu.matrixLU().diagonal().cwiseAbs().minCoeff();
      if (!(min_pivot > 1e-14 * bnorm))
        throw std::runtime_error("ASMSmoother: singular block");
      blocks_.push_back(std::move(B));
      lu_.push_back(std::move(lu));
      dofs_.push_back(std::move(gd));
    }

  multiplicity_ = Eigen::VectorXd::Zero(op.n_dofs());
  for (const auto& gd : dofs_)
    for (Index d : gd)
      multiplicity_[d] += 1.0;
  multiplicity_ = multiplicity_.cwiseMax(1.0);
}

const Eigen::MatrixXd& ASMSmoother::block(Index b) const {
  return blocks_.at(static_cast<std::size_t>(b));
}

const std::vector<Index>& ASMSmoother::block_dofs(Index b) const {
  return dofs_.at(static_cast<std::size_t>(b));
}

void ASMSmoother::add_correction(const Eigen::VectorXd& residual,
                                 Eigen::VectorXd& correction) const {
  if (residual.size() != op_->n_dofs())
    throw std::invalid_argument("ASMSmoother: size mismatch");
  if (correction.size() != op_->n_dofs())
    correction.setZero(op_->n_dofs());
  ++sweep_count_;
  Eigen::VectorXd local(block_size_);
  for (std::size_t b = 0; b < lu_.size(); ++b) {
    const auto& gd = dofs_[b];
    for (int i = 0; i < block_size_; ++i)
      local[i] = residual[gd[static_cast<std::size_t>(i)]];
    local = lu_[b].solve(local);
    for (int i = 0; i < block_size_; ++i) {
      const Index d = gd[static_cast<std::size_t>(i)];
      correction[d] += local[i] / multiplicity_[d];
    }
  }
}

} // namespace stmg
