#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "stmg/lagrange.hpp"
#include "stmg/mesh.hpp"
#include "stmg/quadrature.hpp"

namespace stmg {

using SpatialFunction = std::function<double(const Point&)>;

/// Continuous Q_p degrees of freedom on one mesh level with tensor-product
/// (lexicographic) numbering and Gauss-Lobatto support points per axis.
struct SpatialDofMap {
  SpatialDofMap(const MeshLevel& mesh, int degree);

  const MeshLevel* mesh = nullptr;
  int p = 1;
  std::array<Index, 3> dofs_axis{1, 1, 1};
  Index n_dofs = 0;
  LagrangeBasis support_1d; // p+1 Gauss-Lobatto nodes on [0,1]
  std::vector<std::uint8_t> boundary; // Dirichlet flag per dof

  int dofs_per_cell() const {
    int n = 1;
    for (int a = 0; a < mesh->dim; ++a)
      n *= p + 1;
    return n;
  }
  /// global indices of a cell's dofs, lexicographic local ordering
  void cell_dofs(Index cell, std::vector<Index>& out) const;
  /// physical position of a local support node of a cell (d-linear geometry)
  Point node_position(Index cell, int local) const;
};

/// Matrix-free spatial mass or stiffness operator with cached per-quadrature
/// point metric terms and sum-factorized cell kernels. Dirichlet constraints
/// use the symmetric elimination convention with unit diagonal: constrained
/// input entries are zeroed before the apply and the output carries the
/// identity action on them.
class SpatialOperator {
public:
  enum class Kind { Mass, Stiffness };

  SpatialOperator(Kind kind, const MeshHierarchy& hierarchy, int level,
                  const SpatialDofMap& dofmap,
                  CoefficientField coefficient = constant_coefficient(1.0),
                  bool constrained = true);

  Kind kind() const { return kind_; }
  Index n_dofs() const { return dofmap_->n_dofs; }
  const SpatialDofMap& dofmap() const { return *dofmap_; }
  const MeshLevel& mesh() const { return hierarchy_->levels[level_]; }
  bool constrained() const { return constrained_; }

  void apply(const Eigen::VectorXd& u, Eigen::VectorXd& y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

  /// dense matrix by conventional per-cell quadrature assembly (test oracle
  /// and smoother/coarse-solver backend; independent of the sum-factorized
  /// path). Guarded to n_dofs <= 5000.
  Eigen::MatrixXd assemble_dense() const;
  Eigen::SparseMatrix<double> assemble_sparse() const;

  long applications() const { return apply_count_; }
  void reset_counter() const { apply_count_ = 0; }

private:
  template <bool Mass>
  void apply_cells(const Eigen::VectorXd& u, Eigen::VectorXd& y) const;
  void assemble(const std::function<void(Index, Index, double)>& emit) const;

  Kind kind_;
  const MeshHierarchy* hierarchy_;
  int level_;
  const SpatialDofMap* dofmap_;
  CoefficientField coefficient_;
  bool constrained_;

  QuadratureRule quad_1d_;
  Eigen::MatrixXd b_1d_; // basis values at quadrature points, q x (p+1)
  Eigen::MatrixXd d_1d_; // basis derivatives, q x (p+1)
  // cached metric terms, per cell x quadrature point:
  std::vector<double> mass_factor_;  // w |J| (Mass)
  std::vector<double> stiff_factor_; // rho w |J| J^{-1} J^{-T}, d*d entries (Stiffness)
  mutable long apply_count_ = 0;
};

/// Nodal interpolation of f at the Q_p support points.
Eigen::VectorXd interpolate(const SpatialDofMap& dofmap, const SpatialFunction& f);

/// Value of the finite element function at reference point xi of a cell.
double evaluate_fe(const SpatialDofMap& dofmap, const Eigen::VectorXd& u,
                   Index cell, const std::array<double, 3>& xi);

/// Physical position of reference point xi in a cell (d-linear map).
Point map_to_physical(const MeshLevel& mesh, Index cell,
                      const std::array<double, 3>& xi);

/// Locate the cell containing x and its reference coordinates (Newton
/// inversion of the d-linear map). Throws if x lies outside the mesh.
std::pair<Index, std::array<double, 3>> locate_point(const MeshLevel& mesh,
                                                     const Point& x);

/// Spatial L2 norm and maximum of (fe - exact) over the quadrature points of
/// an n_q-points-per-axis Gauss rule; used by the error norms.
struct SpatialErrorSample {
  double l2 = 0.0;   // squared L2 integral
  double linf = 0.0; // max abs at sampled points
};
SpatialErrorSample sample_spatial_error(const SpatialDofMap& dofmap,
                                        const Eigen::VectorXd& u,
                                        const SpatialFunction& exact, int n_q);

} // namespace stmg
