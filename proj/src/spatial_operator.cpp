#include "stmg/spatial_operator.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stmg {

namespace {

// d-linear geometry of one cell: physical point and Jacobian at reference xi
struct CellGeometry {
  Point x{};
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
};

CellGeometry cell_geometry(const std::vector<Point>& corners, int dim,
                           const std::array<double, 3>& xi) {
  CellGeometry g;
  g.x = {0.0, 0.0, 0.0};
  g.J.setIdentity();
  for (int b = 0; b < dim; ++b)
    for (int a = 0; a < dim; ++a)
      g.J(a, b) = 0.0;
  const int n = 1 << dim;
  for (int k = 0; k < n; ++k) {
    double w = 1.0;
    for (int a = 0; a < dim; ++a)
      w *= (k >> a & 1) ? xi[a] : 1.0 - xi[a];
    for (int a = 0; a < dim; ++a)
      g.x[a] += w * corners[k][a];
    for (int b = 0; b < dim; ++b) {
      double dw = 1.0;
      for (int a = 0; a < dim; ++a) {
        if (a == b)
          dw *= (k >> a & 1) ? 1.0 : -1.0;
        else
          dw *= (k >> a & 1) ? xi[a] : 1.0 - xi[a];
      }
      for (int a = 0; a < dim; ++a)
        g.J(a, b) += dw * corners[k][a];
    }
  }
  return g;
}

// y[..., i, ...] = sum_j M(i, j) x[..., j, ...] along `axis` (axis 0 fastest)
void contract_axis(const double* x, double* y, const Eigen::MatrixXd& M,
                   int axis, const std::array<int, 3>& shape_in, int dim) {
  const int n_in = static_cast<int>(M.cols());
  const int n_out = static_cast<int>(M.rows());
  int pre = 1, post = 1;
  for (int a = 0; a < axis; ++a)
    pre *= shape_in[a];
  for (int a = axis + 1; a < dim; ++a)
    post *= shape_in[a];
  for (int po = 0; po < post; ++po)
    for (int i = 0; i < n_out; ++i)
      for (int pr = 0; pr < pre; ++pr) {
        double s = 0.0;
        const double* xs = x + po * pre * n_in + pr;
        for (int j = 0; j < n_in; ++j)
          s += M(i, j) * xs[j * pre];
        y[po * pre * n_out + i * pre + pr] = s;
      }
}

} // namespace

SpatialDofMap::SpatialDofMap(const MeshLevel& m, int degree)
    : mesh(&m), p(degree), support_1d(gauss_lobatto(degree + 1).points) {
  if (degree < 1)
    throw std::invalid_argument("SpatialDofMap: degree must be >= 1");
  n_dofs = 1;
  for (int a = 0; a < m.dim; ++a) {
    dofs_axis[a] = m.cells[a] * p + 1;
    n_dofs *= dofs_axis[a];
  }
  for (int a = m.dim; a < 3; ++a)
    dofs_axis[a] = 1;
  boundary.assign(static_cast<std::size_t>(n_dofs), 0);
  std::array<Index, 3> idx{0, 0, 0};
  for (Index g = 0; g < n_dofs; ++g) {
    Index rem = g;
    bool bdry = false;
    for (int a = 0; a < m.dim; ++a) {
      idx[a] = rem % dofs_axis[a];
      rem /= dofs_axis[a];
      if (idx[a] == 0 || idx[a] == dofs_axis[a] - 1)
        bdry = true;
    }
    boundary[static_cast<std::size_t>(g)] = bdry ? 1 : 0;
  }
}

void SpatialDofMap::cell_dofs(Index cell, std::vector<Index>& out) const {
  const int dim = mesh->dim;
  const auto c = mesh->cell_coords(cell);
  const int np = p + 1;
  out.resize(static_cast<std::size_t>(dofs_per_cell()));
  std::array<int, 3> loc{0, 0, 0};
  for (std::size_t l = 0; l < out.size(); ++l) {
    std::size_t rem = l;
    Index g = 0;
    Index stride = 1;
    for (int a = 0; a < dim; ++a) {
      loc[a] = static_cast<int>(rem % np);
      rem /= np;
      g += (c[a] * p + loc[a]) * stride;
      stride *= dofs_axis[a];
    }
    out[l] = g;
  }
}

Point SpatialDofMap::node_position(Index cell, int local) const {
  const int dim = mesh->dim;
  const int np = p + 1;
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  int rem = local;
  for (int a = 0; a < dim; ++a) {
    xi[a] = support_1d.nodes()[static_cast<std::size_t>(rem % np)];
    rem /= np;
  }
  const auto corners = mesh->cell_vertex_positions(cell);
  return cell_geometry(corners, dim, xi).x;
}

SpatialOperator::SpatialOperator(Kind kind, const MeshHierarchy& hierarchy,
                                 int level, const SpatialDofMap& dofmap,
                                 CoefficientField coefficient, bool constrained)
    : kind_(kind), hierarchy_(&hierarchy), level_(level), dofmap_(&dofmap),
      coefficient_(std::move(coefficient)), constrained_(constrained),
      quad_1d_(gauss(dofmap.p + 1)) {
  const MeshLevel& m = hierarchy.levels[static_cast<std::size_t>(level)];
  if (dofmap.mesh != &m)
    throw std::invalid_argument("SpatialOperator: dofmap/level mismatch");
  const int dim = m.dim;
  const int q = static_cast<int>(quad_1d_.points.size());
  const int np = dofmap.p + 1;
  b_1d_.resize(q, np);
  d_1d_.resize(q, np);
  for (int iq = 0; iq < q; ++iq)
    for (int j = 0; j < np; ++j) {
      b_1d_(iq, j) = dofmap.support_1d.eval(j, quad_1d_.points[iq]);
      d_1d_(iq, j) = dofmap.support_1d.deriv(j, quad_1d_.points[iq]);
    }
  int qd = 1;
  for (int a = 0; a < dim; ++a)
    qd *= q;
  const Index n_cells = m.n_cells();
  if (kind_ == Kind::Mass)
    mass_factor_.resize(static_cast<std::size_t>(n_cells) * qd);
  else
    stiff_factor_.resize(static_cast<std::size_t>(n_cells) * qd * dim * dim);
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  for (Index cell = 0; cell < n_cells; ++cell) {
    const auto corners = m.cell_vertex_positions(cell);
    for (int kq = 0; kq < qd; ++kq) {
      int rem = kq;
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const int ia = rem % q;
        rem /= q;
        xi[a] = quad_1d_.points[static_cast<std::size_t>(ia)];
        w *= quad_1d_.weights[static_cast<std::size_t>(ia)];
      }
      const CellGeometry g = cell_geometry(corners, dim, xi);
      const Eigen::MatrixXd Jd = g.J.topLeftCorner(dim, dim);
      const double detJ = Jd.determinant();
      if (kind_ == Kind::Mass) {
        mass_factor_[static_cast<std::size_t>(cell) * qd + kq] = w * detJ;
      } else {
        const double rho = coefficient_.evaluate(*hierarchy_, level_, cell, g.x);
        const Eigen::MatrixXd Jinv = Jd.inverse();
        const Eigen::MatrixXd K = rho * w * detJ * Jinv * Jinv.transpose();
        double* dst = stiff_factor_.data() +
                      (static_cast<std::size_t>(cell) * qd + kq) * dim * dim;
        for (int a = 0; a < dim; ++a)
          for (int b = 0; b < dim; ++b)
            dst[a * dim + b] = K(a, b);
      }
    }
  }
}

template <bool Mass>
void SpatialOperator::apply_cells(const Eigen::VectorXd& u,
                                  Eigen::VectorXd& y) const {
  const MeshLevel& m = hierarchy_->levels[static_cast<std::size_t>(level_)];
  const int dim = m.dim;
  const int np = dofmap_->p + 1;
  const int q = static_cast<int>(quad_1d_.points.size());
  int nd = 1, qd = 1;
  for (int a = 0; a < dim; ++a) {
    nd *= np;
    qd *= q;
  }
  std::vector<Index> dofs;
  std::vector<double> local(static_cast<std::size_t>(nd));
  std::vector<double> buf_a(static_cast<std::size_t>(std::max(nd, qd) * q));
  std::vector<double> buf_b(buf_a.size());
  std::vector<double> vals(static_cast<std::size_t>(qd));
  std::vector<double> grads(static_cast<std::size_t>(qd) * 3);
  std::vector<double> out(static_cast<std::size_t>(nd));
  const Eigen::MatrixXd bT = b_1d_.transpose();
  const Eigen::MatrixXd dT = d_1d_.transpose();
  const Index n_cells = m.n_cells();
  for (Index cell = 0; cell < n_cells; ++cell) {
    dofmap_->cell_dofs(cell, dofs);
    for (int l = 0; l < nd; ++l)
      local[static_cast<std::size_t>(l)] = u[dofs[static_cast<std::size_t>(l)]];

    if (Mass) {
      // values at quadrature points
      const double* src = local.data();
      std::array<int, 3> shape{np, np, np};
      for (int a = 0; a < dim; ++a) {
        double* dst = (a % 2 == 0) ? buf_a.data() : buf_b.data();
        contract_axis(src, dst, b_1d_, a, shape, dim);
        shape[a] = q;
        src = dst;
      }
      const double* fac = mass_factor_.data() + static_cast<std::size_t>(cell) * qd;
      for (int kq = 0; kq < qd; ++kq)
        vals[static_cast<std::size_t>(kq)] = src[kq] * fac[kq];
      // transpose contraction back to nodes
      src = vals.data();
      shape = {q, q, q};
      for (int a = 0; a < dim; ++a) {
        double* dst = (a == dim - 1) ? out.data()
                                     : ((a % 2 == 0) ? buf_a.data() : buf_b.data());
        contract_axis(src, dst, bT, a, shape, dim);
        shape[a] = np;
        src = dst;
      }
      if (dim == 0)
        out[0] = vals[0];
      else if (src != out.data())
        std::copy(src, src + nd, out.data());
    } else {
      // reference gradient components at quadrature points
      for (int c = 0; c < dim; ++c) {
        const double* src = local.data();
        std::array<int, 3> shape{np, np, np};
        for (int a = 0; a < dim; ++a) {
          double* dst = (a % 2 == 0) ? buf_a.data() : buf_b.data();
          contract_axis(src, dst, a == c ? d_1d_ : b_1d_, a, shape, dim);
          shape[a] = q;
          src = dst;
        }
        for (int kq = 0; kq < qd; ++kq)
          grads[static_cast<std::size_t>(kq) * 3 + c] = src[kq];
      }
      // multiply by cached K = rho w |J| J^{-1} J^{-T}
      const double* fac = stiff_factor_.data() +
                          static_cast<std::size_t>(cell) * qd * dim * dim;
      for (int kq = 0; kq < qd; ++kq) {
        double g[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a)
          for (int b = 0; b < dim; ++b)
            g[a] += fac[kq * dim * dim + a * dim + b] *
                    grads[static_cast<std::size_t>(kq) * 3 + b];
        for (int a = 0; a < dim; ++a)
          grads[static_cast<std::size_t>(kq) * 3 + a] = g[a];
      }
      // transpose gradient contractions, accumulated over components
      std::fill(out.begin(), out.end(), 0.0);
      for (int c = 0; c < dim; ++c) {
        for (int kq = 0; kq < qd; ++kq)
          vals[static_cast<std::size_t>(kq)] =
              grads[static_cast<std::size_t>(kq) * 3 + c];
        const double* src = vals.data();
        std::array<int, 3> shape{q, q, q};
        double* last = nullptr;
        for (int a = 0; a < dim; ++a) {
          double* dst = (a % 2 == 0) ? buf_a.data() : buf_b.data();
          contract_axis(src, dst, a == c ? dT : bT, a, shape, dim);
          shape[a] = np;
          src = dst;
          last = dst;
        }
        for (int l = 0; l < nd; ++l)
          out[static_cast<std::size_t>(l)] += last[l];
      }
    }
    for (int l = 0; l < nd; ++l)
      y[dofs[static_cast<std::size_t>(l)]] += out[static_cast<std::size_t>(l)];
  }
}

void SpatialOperator::apply(const Eigen::VectorXd& u, Eigen::VectorXd& y) const {
  if (u.size() != dofmap_->n_dofs)
    throw std::invalid_argument("SpatialOperator::apply: size mismatch");
  ++apply_count_;
  y.setZero(dofmap_->n_dofs);
  if (!constrained_) {
    if (kind_ == Kind::Mass)
      apply_cells<true>(u, y);
    else
      apply_cells<false>(u, y);
    return;
  }
  Eigen::VectorXd ui = u;
  for (Index i = 0; i < dofmap_->n_dofs; ++i)
    if (dofmap_->boundary[static_cast<std::size_t>(i)])
      ui[i] = 0.0;
  if (kind_ == Kind::Mass)
    apply_cells<true>(ui, y);
  else
    apply_cells<false>(ui, y);
  for (Index i = 0; i < dofmap_->n_dofs; ++i)
    if (dofmap_->boundary[static_cast<std::size_t>(i)])
      y[i] = u[i];
}

Eigen::VectorXd SpatialOperator::apply(const Eigen::VectorXd& u) const {
  Eigen::VectorXd y;
  apply(u, y);
  return y;
}

void SpatialOperator::assemble(
    const std::function<void(Index, Index, double)>& emit) const {
  // conventional assembly, independent of the sum-factorized kernels
  const MeshLevel& m = hierarchy_->levels[static_cast<std::size_t>(level_)];
  const int dim = m.dim;
  const int np = dofmap_->p + 1;
  const int nd = dofmap_->dofs_per_cell();
  const int q = static_cast<int>(quad_1d_.points.size());
  int qd = 1;
  for (int a = 0; a < dim; ++a)
    qd *= q;
  std::vector<Index> dofs;
  std::vector<double> phi(static_cast<std::size_t>(nd));
  std::vector<double> grad(static_cast<std::size_t>(nd) * 3);
  Eigen::MatrixXd cellmat(nd, nd);
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  const Index n_cells = m.n_cells();
  for (Index cell = 0; cell < n_cells; ++cell) {
    const auto corners = m.cell_vertex_positions(cell);
    dofmap_->cell_dofs(cell, dofs);
    cellmat.setZero();
    for (int kq = 0; kq < qd; ++kq) {
      int rem = kq;
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const int ia = rem % q;
        rem /= q;
        xi[a] = quad_1d_.points[static_cast<std::size_t>(ia)];
        w *= quad_1d_.weights[static_cast<std::size_t>(ia)];
      }
      const CellGeometry g = cell_geometry(corners, dim, xi);
      const Eigen::MatrixXd Jd = g.J.topLeftCorner(dim, dim);
      const double detJ = Jd.determinant();
      const Eigen::MatrixXd JinvT = Jd.inverse().transpose();
      for (int l = 0; l < nd; ++l) {
        int lr = l;
        double v = 1.0;
        double dref[3] = {0.0, 0.0, 0.0};
        double comp[3] = {1.0, 1.0, 1.0};
        int idx[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a) {
          idx[a] = lr % np;
          lr /= np;
          comp[a] = dofmap_->support_1d.eval(idx[a], xi[a]);
          v *= comp[a];
        }
        for (int c = 0; c < dim; ++c) {
          double d = dofmap_->support_1d.deriv(idx[c], xi[c]);
          for (int a = 0; a < dim; ++a)
            if (a != c)
              d *= comp[a];
          dref[c] = d;
        }
        phi[static_cast<std::size_t>(l)] = v;
        for (int a = 0; a < dim; ++a) {
          double s = 0.0;
          for (int b = 0; b < dim; ++b)
            s += JinvT(a, b) * dref[b];
          grad[static_cast<std::size_t>(l) * 3 + a] = s;
        }
      }
      if (kind_ == Kind::Mass) {
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j)
            cellmat(i, j) += w * detJ * phi[static_cast<std::size_t>(i)] *
                             phi[static_cast<std::size_t>(j)];
      } else {
        const double rho = coefficient_.evaluate(*hierarchy_, level_, cell, g.x);
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j) {
            double s = 0.0;
            for (int a = 0; a < dim; ++a)
              s += grad[static_cast<std::size_t>(i) * 3 + a] *
                   grad[static_cast<std::size_t>(j) * 3 + a];
            cellmat(i, j) += rho * w * detJ * s;
          }
      }
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) {
        const Index gi = dofs[static_cast<std::size_t>(i)];
        const Index gj = dofs[static_cast<std::size_t>(j)];
        if (constrained_ &&
            (dofmap_->boundary[static_cast<std::size_t>(gi)] ||
             dofmap_->boundary[static_cast<std::size_t>(gj)]))
          continue;
        emit(gi, gj, cellmat(i, j));
      }
  }
  if (constrained_)
    for (Index i = 0; i < dofmap_->n_dofs; ++i)
      if (dofmap_->boundary[static_cast<std::size_t>(i)])
        emit(i, i, 1.0);
}

Eigen::MatrixXd SpatialOperator::assemble_dense() const {
  if (dofmap_->n_dofs > 5000)
    throw std::length_error("assemble_dense: too many dofs");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dofmap_->n_dofs, dofmap_->n_dofs);
  assemble([&A](Index i, Index j, double v) { A(i, j) += v; });
  return A;
}

Eigen::SparseMatrix<double> SpatialOperator::assemble_sparse() const {
  std::vector<Eigen::Triplet<double>> trips;
  assemble([&trips](Index i, Index j, double v) {
    trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  });
  Eigen::SparseMatrix<double> A(static_cast<int>(dofmap_->n_dofs),
                                static_cast<int>(dofmap_->n_dofs));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Eigen::VectorXd interpolate(const SpatialDofMap& dofmap,
                            const SpatialFunction& f) {
  Eigen::VectorXd u(dofmap.n_dofs);
  const Index n_cells = dofmap.mesh->n_cells();
  std::vector<Index> dofs;
  const int nd = dofmap.dofs_per_cell();
  for (Index cell = 0; cell < n_cells; ++cell) {
    dofmap.cell_dofs(cell, dofs);
    for (int l = 0; l < nd; ++l)
      u[dofs[static_cast<std::size_t>(l)]] = f(dofmap.node_position(cell, l));
  }
  return u;
}

double evaluate_fe(const SpatialDofMap& dofmap, const Eigen::VectorXd& u,
                   Index cell, const std::array<double, 3>& xi) {
  const int dim = dofmap.mesh->dim;
  const int np = dofmap.p + 1;
  std::vector<Index> dofs;
  dofmap.cell_dofs(cell, dofs);
  double s = 0.0;
  for (std::size_t l = 0; l < dofs.size(); ++l) {
    std::size_t rem = l;
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
      v *= dofmap.support_1d.eval(static_cast<int>(rem % np), xi[a]);
      rem /= np;
    }
    s += v * u[dofs[l]];
  }
  return s;
}

Point map_to_physical(const MeshLevel& mesh, Index cell,
                      const std::array<double, 3>& xi) {
  return cell_geometry(mesh.cell_vertex_positions(cell), mesh.dim, xi).x;
}

std::pair<Index, std::array<double, 3>> locate_point(const MeshLevel& mesh,
                                                     const Point& x) {
  const int dim = mesh.dim;
  const double tol = 1e-10;
  const Index n_cells = mesh.n_cells();
  for (Index cell = 0; cell < n_cells; ++cell) {
    const auto corners = mesh.cell_vertex_positions(cell);
    // quick reject by bounding box
    bool reject = false;
    for (int a = 0; a < dim && !reject; ++a) {
      double lo = corners[0][a], hi = corners[0][a];
      for (const auto& c : corners) {
        lo = std::min(lo, c[a]);
        hi = std::max(hi, c[a]);
      }
      const double pad = 0.25 * (hi - lo) + tol;
      if (x[a] < lo - pad || x[a] > hi + pad)
        reject = true;
    }
    if (reject)
      continue;
    std::array<double, 3> xi{0.5, 0.5, 0.5};
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
      const CellGeometry g = cell_geometry(corners, dim, xi);
      Eigen::Vector3d r = Eigen::Vector3d::Zero();
      for (int a = 0; a < dim; ++a)
        r[a] = g.x[a] - x[a];
      if (r.head(dim).norm() < 1e-13) {
        converged = true;
        break;
      }
      const Eigen::MatrixXd Jd = g.J.topLeftCorner(dim, dim);
      const Eigen::VectorXd dxi = Jd.fullPivLu().solve(r.head(dim));
      for (int a = 0; a < dim; ++a)
        xi[a] -= dxi[a];
    }
    if (!converged)
      continue;
    bool inside = true;
    for (int a = 0; a < dim; ++a) {
      if (xi[a] < -tol || xi[a] > 1.0 + tol)
        inside = false;
      xi[a] = std::min(1.0, std::max(0.0, xi[a]));
    }
    if (inside)
      return {cell, xi};
  }
  throw std::runtime_error("locate_point: point outside mesh");
}

SpatialErrorSample sample_spatial_error(const SpatialDofMap& dofmap,
                                        const Eigen::VectorXd& u,
                                        const SpatialFunction& exact, int n_q) {
  const MeshLevel& m = *dofmap.mesh;
  const int dim = m.dim;
  const QuadratureRule rule = gauss(n_q);
  int qd = 1;
  for (int a = 0; a < dim; ++a)
    qd *= n_q;
  SpatialErrorSample err;
  std::array<double, 3> xi{0.0, 0.0, 0.0};
  const Index n_cells = m.n_cells();
  for (Index cell = 0; cell < n_cells; ++cell) {
    const auto corners = m.cell_vertex_positions(cell);
    for (int kq = 0; kq < qd; ++kq) {
      int rem = kq;
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        const int ia = rem % n_q;
        rem /= n_q;
        xi[a] = rule.points[static_cast<std::size_t>(ia)];
        w *= rule.weights[static_cast<std::size_t>(ia)];
      }
      const CellGeometry g = cell_geometry(corners, dim, xi);
      const double detJ = g.J.topLeftCorner(dim, dim).determinant();
      const double d = evaluate_fe(dofmap, u, cell, xi) - exact(g.x);
      err.l2 += w * detJ * d * d;
      err.linf = std::max(err.linf, std::abs(d));
    }
  }
  return err;
}

} // namespace stmg
