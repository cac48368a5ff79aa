#include "stmg/mesh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stmg/rng.hpp"

namespace stmg {

std::vector<Index> MeshLevel::cell_vertices(Index c) const {
  const auto cc = cell_coords(c);
  const int corners = 1 << dim;
  std::vector<Index> v(corners);
  for (int s = 0; s < corners; ++s) {
    const Index i = cc[0] + (s & 1);
    const Index j = dim > 1 ? cc[1] + ((s >> 1) & 1) : 0;
    const Index kk = dim > 2 ? cc[2] + ((s >> 2) & 1) : 0;
    v[s] = vertex_index(i, j, kk);
  }
  return v;
}

std::vector<Point> MeshLevel::cell_vertex_positions(Index c) const {
  const auto cv = cell_vertices(c);
  std::vector<Point> pos(cv.size());
  for (std::size_t s = 0; s < cv.size(); ++s)
    pos[s] = vertices[static_cast<std::size_t>(cv[s])];
  return pos;
}

namespace {

double dist(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d)
    s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

// lengths of the edges adjacent to vertex (i,j,k) along each axis
double min_adjacent_edge(const MeshLevel& m, Index i, Index j, Index kk) {
  const auto n = m.n_verts_axis();
  const std::array<Index, 3> idx{i, j, kk};
  double best = std::numeric_limits<double>::max();
  const Point& x = m.vertices[m.vertex_index(i, j, kk)];
  for (int a = 0; a < m.dim; ++a) {
    for (int dir : {-1, 1}) {
      auto nb = idx;
      nb[a] += dir;
      if (nb[a] < 0 || nb[a] >= n[a])
        continue;
      best = std::min(best, dist(x, m.vertices[m.vertex_index(nb[0], nb[1], nb[2])], m.dim));
    }
  }
  return best;
}

// Jacobian determinant of the d-linear cell map at reference point xi
double jacobian_det(const MeshLevel& m, const std::vector<Index>& cv,
                    const std::array<double, 3>& xi) {
  const int d = m.dim;
  double J[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const int corners = 1 << d;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      J[r][c] = 0.0;
  for (int s = 0; s < corners; ++s) {
    const Point& x = m.vertices[cv[s]];
    for (int c = 0; c < d; ++c) {
      // d/dxi_c of the corner shape function
      double g = 1.0;
      for (int a = 0; a < d; ++a) {
        const int bit = (s >> a) & 1;
        if (a == c)
          g *= (bit ? 1.0 : -1.0);
        else
          g *= (bit ? xi[a] : 1.0 - xi[a]);
      }
      for (int r = 0; r < d; ++r)
        J[r][c] += g * x[r];
    }
  }
  if (d == 1)
    return J[0][0];
  if (d == 2)
    return J[0][0] * J[1][1] - J[0][1] * J[1][0];
  return J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
         J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
         J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
}

void check_positive_jacobians(const MeshLevel& m) {
  // 4 sample points per axis plus the corners
  std::vector<double> samples{0.0, 0.2113248654051871, 0.5, 0.7886751345948129, 1.0};
  for (Index c = 0; c < m.n_cells(); ++c) {
    const auto cv = m.cell_vertices(c);
    std::array<double, 3> xi{0, 0, 0};
    const int n = static_cast<int>(samples.size());
    const int total = m.dim == 1 ? n : (m.dim == 2 ? n * n : n * n * n);
    for (int s = 0; s < total; ++s) {
      xi[0] = samples[s % n];
      if (m.dim > 1)
        xi[1] = samples[(s / n) % n];
      if (m.dim > 2)
        xi[2] = samples[s / (n * n)];
      if (jacobian_det(m, cv, xi) <= 0.0)
        throw std::runtime_error("perturb: inverted cell after perturbation");
    }
  }
}

} // namespace

double MeshLevel::h_min() const {
  double best = std::numeric_limits<double>::max();
  const auto n = n_verts_axis();
  for (Index kk = 0; kk < n[2]; ++kk)
    for (Index j = 0; j < n[1]; ++j)
      for (Index i = 0; i < n[0]; ++i)
        best = std::min(best, min_adjacent_edge(*this, i, j, kk));
  return best;
}

double MeshLevel::h_max() const {
  double best = 0.0;
  for (Index c = 0; c < n_cells(); ++c) {
    const auto cv = cell_vertices(c);
    for (std::size_t a = 0; a < cv.size(); ++a)
      for (std::size_t b = a + 1; b < cv.size(); ++b)
        best = std::max(best, dist(vertices[cv[a]], vertices[cv[b]], dim));
  }
  return best;
}

Index MeshHierarchy::ancestor_cell(int fine_level, Index cell,
                                   int coarse_level) const {
  const auto& f = levels[fine_level];
  auto cc = f.cell_coords(cell);
  const int shift = fine_level - coarse_level;
  if (shift < 0)
    throw std::invalid_argument("ancestor_cell: coarse_level above fine_level");
  for (int a = 0; a < 3; ++a)
    cc[a] >>= shift;
  return levels[coarse_level].cell_index(cc);
}

MeshHierarchy make_cartesian(int dim, std::array<double, 3> lo,
                             std::array<double, 3> hi, Index base_cells_per_axis,
                             int refinements) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("make_cartesian: dim must be 1, 2 or 3");
  if (base_cells_per_axis < 1 || refinements < 0)
    throw std::invalid_argument("make_cartesian: invalid sizes");
  for (int a = 0; a < dim; ++a)
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("make_cartesian: empty extent");

  MeshHierarchy h;
  for (int l = 0; l <= refinements; ++l) {
    MeshLevel m;
    m.dim = dim;
    m.level = l;
    m.lo = lo;
    m.hi = hi;
    const Index n = base_cells_per_axis << l;
    if (n > (Index{1} << 24))
      throw std::length_error("make_cartesian: cell count overflow");
    for (int a = 0; a < dim; ++a)
      m.cells[a] = n;
    const auto nv = m.n_verts_axis();
    if (nv[0] * nv[1] * nv[2] > (Index{1} << 28))
      throw std::length_error("make_cartesian: vertex count overflow");
    m.vertices.resize(static_cast<std::size_t>(nv[0] * nv[1] * nv[2]));
    for (Index kk = 0; kk < nv[2]; ++kk)
      for (Index j = 0; j < nv[1]; ++j)
        for (Index i = 0; i < nv[0]; ++i) {
          Point p{0, 0, 0};
          p[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / n;
          if (dim > 1)
            p[1] = lo[1] + (hi[1] - lo[1]) * static_cast<double>(j) / n;
          if (dim > 2)
            p[2] = lo[2] + (hi[2] - lo[2]) * static_cast<double>(kk) / n;
          m.vertices[static_cast<std::size_t>(m.vertex_index(i, j, kk))] = p;
        }
    h.levels.push_back(std::move(m));
  }
  return h;
}

void perturb(MeshHierarchy& mesh, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0 || magnitude >= 0.5)
    throw std::invalid_argument("perturb: magnitude must be in [0, 0.5)");
  if (magnitude == 0.0)
    return;

  MeshLevel& fine = mesh.levels.back();
  const auto n = fine.n_verts_axis();
  Xoshiro256 rng(seed);
  std::vector<Point> moved = fine.vertices;
  for (Index kk = 0; kk < n[2]; ++kk)
    for (Index j = 0; j < n[1]; ++j)
      for (Index i = 0; i < n[0]; ++i) {
        const double len =
            magnitude * min_adjacent_edge(fine, i, j, kk);
        auto dir = rng.direction(fine.dim);
        const Index vi = fine.vertex_index(i, j, kk);
        Point p = fine.vertices[static_cast<std::size_t>(vi)];
        const std::array<Index, 3> idx{i, j, kk};
        for (int a = 0; a < fine.dim; ++a) {
          // boundary vertices may only move tangentially to their facet
          if (idx[a] == 0 || idx[a] == n[a] - 1)
            continue;
          p[a] += len * dir[a];
        }
        moved[static_cast<std::size_t>(vi)] = p;
      }
  fine.vertices = std::move(moved);
  fine.perturbed = true;

  // coarse levels take the perturbed positions of the vertices they share
  // with the finest level, preserving geometric nesting of vertex positions
  const int fl = mesh.n_levels() - 1;
  for (int l = 0; l < fl; ++l) {
    MeshLevel& m = mesh.levels[l];
    const Index stride = Index{1} << (fl - l);
    const auto nc = m.n_verts_axis();
    for (Index kk = 0; kk < nc[2]; ++kk)
      for (Index j = 0; j < nc[1]; ++j)
        for (Index i = 0; i < nc[0]; ++i)
          m.vertices[static_cast<std::size_t>(m.vertex_index(i, j, kk))] =
              fine.vertices[static_cast<std::size_t>(fine.vertex_index(
                  i * stride, m.dim > 1 ? j * stride : 0,
                  m.dim > 2 ? kk * stride : 0))];
    m.perturbed = true;
  }

  for (const auto& m : mesh.levels)
    check_positive_jacobians(m);
}

double CoefficientField::evaluate(const MeshHierarchy& mesh, int level,
                                  Index cell, const Point& x) const {
  double v = base(x);
  if (!coarse_cell_scale.empty()) {
    const Index cc = mesh.ancestor_cell(level, cell, 0);
    v *= coarse_cell_scale[static_cast<std::size_t>(cc)];
  }
  if (v <= 0.0)
    throw std::runtime_error("CoefficientField: non-positive value");
  return v;
}

bool CoefficientField::is_unit() const {
  return coarse_cell_scale.empty() && base({0.1, 0.2, 0.3}) == 1.0 &&
         base({0.7, 0.8, 0.9}) == 1.0;
}

CoefficientField constant_coefficient(double value) {
  if (value <= 0.0)
    throw std::invalid_argument("constant_coefficient: value must be > 0");
  CoefficientField f;
  f.base = [value](const Point&) { return value; };
  return f;
}

CoefficientField coefficient_shm(int dim) {
  CoefficientField f;
  if (dim >= 3) {
    f.base = [](const Point& x) {
      if (x[1] < 0.2)
        return 1.0;
      return x[2] < 0.2 ? 9.0 : 16.0;
    };
  } else if (dim == 2) {
    f.base = [](const Point& x) { return x[1] < 0.2 ? 1.0 : 9.0; };
  }
  return f;
}

CoefficientField randomize_coefficient(const CoefficientField& field,
                                       const MeshHierarchy& mesh, double lo,
                                       double hi, std::uint64_t seed) {
  if (!(lo > 0.0) || hi < lo)
    throw std::invalid_argument("randomize_coefficient: need 0 < lo <= hi");
  CoefficientField out = field;
  Xoshiro256 rng(seed);
  const Index nc = mesh.levels.front().n_cells();
  out.coarse_cell_scale.resize(static_cast<std::size_t>(nc));
  for (Index c = 0; c < nc; ++c) {
    double scale = rng.uniform(lo, hi);
    if (!field.coarse_cell_scale.empty())
      scale *= field.coarse_cell_scale[static_cast<std::size_t>(c)];
    out.coarse_cell_scale[static_cast<std::size_t>(c)] = scale;
  }
  return out;
}

} // namespace stmg
