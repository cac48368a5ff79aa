#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace stmg {

using LinearMap =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct GmresOptions {
  int max_iters = 1000;
  int restart = 100;
  double rel_tol = 1e-12; // vs the initial residual norm
  double abs_tol = 1e-12;
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> residual_history; // including the initial residual
};

/// Restarted GMRES with right preconditioning (x = M^-1 y, so the residual
/// of the preconditioned system is the true residual). Modified
/// Gram-Schmidt with a second orthogonalization pass. If precond is empty
/// the identity is used.
GmresResult gmres(const LinearMap& op, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& options,
                  const LinearMap& precond = {});

} // namespace stmg
