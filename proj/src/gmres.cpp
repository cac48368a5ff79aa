#include "stmg/gmres.hpp"

#include <cmath>
#include <stdexcept>

namespace stmg {

GmresResult gmres(const LinearMap& op, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& options,
                  const LinearMap& precond) {
  if (!op)
    throw std::invalid_argument("gmres: missing operator");
  const Eigen::Index n = b.size();
  if (x.size() != n)
    x = Eigen::VectorXd::Zero(n);
  const int m = std::max(1, options.restart);

  GmresResult result;
  Eigen::VectorXd r(n), w(n), z(n);
  op(x, r);
  r = b - r;
  double beta = r.norm();
  result.initial_residual = beta;
  result.residual_history.push_back(beta);
  const double tol =
      std::max(options.abs_tol, options.rel_tol * std::max(beta, 1e-300));
  if (beta <= tol) {
    result.converged = true;
    result.final_residual = beta;
    return result;
  }

  std::vector<Eigen::VectorXd> V(static_cast<std::size_t>(m) + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  while (result.iterations < options.max_iters) {
    V[0] = r / beta;
    g.setZero();
    g(0) = beta;
    int k = 0;
    for (; k < m && result.iterations < options.max_iters; ++k) {
      ++result.iterations;
      if (precond) {
        precond(V[static_cast<std::size_t>(k)], z);
        op(z, w);
      } else {
        op(V[static_cast<std::size_t>(k)], w);
      }
      // modified Gram-Schmidt, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= k; ++i) {
          const double h = w.dot(V[static_cast<std::size_t>(i)]);
          if (pass == 0)
            H(i, k) = h;
          else
            H(i, k) += h;
          w.noalias() -= h * V[static_cast<std::size_t>(i)];
        }
      H(k + 1, k) = w.norm();
      const bool breakdown = !(H(k + 1, k) > 0.0);
      if (!breakdown)
        V[static_cast<std::size_t>(k) + 1] = w / H(k + 1, k);
      // apply stored Givens rotations to the new column, then a new one
      for (int i = 0; i < k; ++i) {
        const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
        H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      if (denom == 0.0) {
        cs(k) = 1.0;
        sn(k) = 0.0;
      } else {
        cs(k) = H(k, k) / denom;
        sn(k) = H(k + 1, k) / denom;
      }
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      const double res = std::abs(g(k + 1));
      result.residual_history.push_back(res);
      if (res <= tol || breakdown) {
        ++k;
        break;
      }
    }
    // solve the small triangular system and update x
    Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i)
      dx.noalias() += y(i) * V[static_cast<std::size_t>(i)];
    if (precond) {
      precond(dx, z);
      x += z;
    } else {
      x += dx;
    }
    op(x, r);
    r = b - r;
    beta = r.norm();
    result.final_residual = beta;
    if (beta <= tol) {
      result.converged = true;
      return result;
    }
    if (beta == 0.0)
      break;
  }
  result.final_residual = beta;
  result.converged = beta <= tol;
  return result;
}

} // namespace stmg
