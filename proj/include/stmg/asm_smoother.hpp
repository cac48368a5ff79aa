#pragma once

#include <Eigen/Dense>

#include "stmg/space_time_operator.hpp"

namespace stmg {

/// Cell-wise additive Schwarz smoother: one block per space-time element
/// (spatial cell x time interval of the batch), holding the LU factors of
/// the restriction R_T S R_T^T of the full block operator. Corrections of
/// dofs shared by several blocks are averaged (partition-of-unity weighting
/// by the inverse overlap count), which keeps the preconditioned spectrum
/// near [0, 1] so that relaxation factors close to 1 are stable; the
/// relaxation factor itself is applied by the caller.
class ASMSmoother {
public:
  explicit ASMSmoother(const SpaceTimeOperator& op);

  Index n_blocks() const { return static_cast<Index>(blocks_.size()); }
  int block_size() const { return block_size_; }
  const Eigen::MatrixXd& block(Index b) const;
  const std::vector<Index>& block_dofs(Index b) const;
  /// number of blocks containing each dof (boundary dofs included)
  const Eigen::VectorXd& overlap_counts() const { return multiplicity_; }

  /// correction += W sum_T R_T^T [R_T S R_T^T]^{-1} R_T residual, with
  /// W = diag(1 / overlap count)
  void add_correction(const Eigen::VectorXd& residual,
                      Eigen::VectorXd& correction) const;

  long sweeps() const { return sweep_count_; }
  void reset_counter() const { sweep_count_ = 0; }

private:
  const SpaceTimeOperator* op_;
  int block_size_ = 0;
  std::vector<Eigen::MatrixXd> blocks_; // stored for the oracle check
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  std::vector<std::vector<Index>> dofs_;
  Eigen::VectorXd multiplicity_;
  mutable long sweep_count_ = 0;
};

} // namespace stmg
