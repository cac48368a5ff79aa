#pragma once

#include <Eigen/Dense>

#include "stmg/lagrange.hpp"

namespace stmg {

enum class TimeScheme { DG, CGP };

/// Temporal weight matrices of one time-discretization family at order k,
/// stored on the reference interval [0,1]. The step size tau is applied at
/// use sites: weights that pair with a temporal integral of a value product
/// (m_tau, beta) pick up a factor tau, derivative-type weights (a_tau,
/// alpha) do not.
///
/// DG(k): trial = test = Lagrange basis at the k+1 right Gauss-Radau nodes,
///   (m_tau)_ij = int xi_j xi_i,
///   (a_tau)_ij = int xi_j' xi_i + xi_j(0) xi_i(0),
///   alpha_i    = xi_i(0),           beta = 0.
///
/// CGP(k): trial = Lagrange basis at the k+1 Gauss-Lobatto nodes, test =
/// Lagrange basis at the last k of them; the first trial coefficient is
/// fixed by continuity, its weights are split off into alpha and beta:
///   (m_tau)_{i,j-1} = int xi_j psi_i,   (a_tau)_{i,j-1} = int xi_j' psi_i,
///   beta_i = int xi_1 psi_i,            alpha_i = int xi_1' psi_i.
struct TemporalWeights {
  TimeScheme scheme = TimeScheme::DG;
  int k = 0;
  int n_t = 1; // temporal unknowns per step: DG k+1, CGP k

  Eigen::MatrixXd m_tau;
  Eigen::MatrixXd a_tau;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  /// trial basis on [0,1]; for CGP this includes the constrained left node
  LagrangeBasis trial_basis;
  /// reference times of the n_t temporal unknowns (source collocation points)
  std::vector<double> unknown_nodes;

  /// value of the trajectory at reference time t given the step's unknown
  /// coefficients and (CGP only) the value carried over the left interval
  /// boundary. For DG, left_value is ignored.
  double eval_trajectory(const Eigen::VectorXd& coeffs, double left_value,
                         double t) const;
  /// same for the i-th unknown's basis weight (used to form linear combos)
  double unknown_weight(int i, double t) const;
  /// weight of the carried-over left value (0 for DG)
  double left_weight(double t) const;
};

TemporalWeights dg_weights(int k);
TemporalWeights cgp_weights(int k);

} // namespace stmg
