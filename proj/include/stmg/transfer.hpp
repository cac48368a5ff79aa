#pragma once

#include <Eigen/Dense>

#include "stmg/space_time_operator.hpp"

namespace stmg {

/// Grid transfer between two consecutive multigrid levels that differ in
/// exactly one attribute. Spatial coarsening (mesh level or degree) uses the
/// embedding of the nested Q_p spaces, applied as a tensor product of dense
/// per-axis 1D prolongation matrices to every (step, temporal-node) block.
/// Temporal coarsening (tau or k) uses an explicit evaluation matrix of the
/// coarse trajectory at the fine temporal nodes, applied blockwise over the
/// spatial dofs; for CGP the coupling through the constrained left interval
/// endpoint is folded into the matrix. Restriction is the transpose. On both
/// sides Dirichlet-constrained entries are zeroed so the pair stays adjoint
/// for the modified (identity-on-boundary) operators.
class Transfer {
public:
  Transfer(const SpaceTimeOperator& fine, const SpaceTimeOperator& coarse);

  void prolong(const Eigen::VectorXd& coarse, Eigen::VectorXd& fine) const;
  void restrict_(const Eigen::VectorXd& fine, Eigen::VectorXd& coarse) const;

  bool spatial() const { return spatial_; }

private:
  const SpaceTimeOperator* fine_;
  const SpaceTimeOperator* coarse_;
  bool spatial_ = true;
  // spatial variant: per-axis prolongation matrices (fine dofs x coarse dofs)
  std::array<Eigen::MatrixXd, 3> axis_p_;
  // temporal variant: (fine_steps*nt_f) x (coarse_steps*nt_c)
  Eigen::MatrixXd time_p_;

  void zero_constrained(const SpaceTimeOperator& op, Eigen::VectorXd& v) const;
};

} // namespace stmg
