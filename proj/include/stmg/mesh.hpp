#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace stmg {

using Index = std::int64_t;
using Point = std::array<double, 3>;

/// One level of a tensor-product hexahedral/quadrilateral mesh hierarchy.
/// Vertices and cells are numbered lexicographically (x fastest). Cell
/// geometry is the d-linear map of its 2^d corner vertices.
struct MeshLevel {
  int dim = 1;
  int level = 0;
  std::array<Index, 3> cells{1, 1, 1};  // unused axes = 1
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{1, 1, 1};
  std::vector<Point> vertices;
  bool perturbed = false;

  Index n_cells() const { return cells[0] * cells[1] * cells[2]; }
  std::array<Index, 3> n_verts_axis() const {
    return {cells[0] + 1, dim > 1 ? cells[1] + 1 : 1, dim > 2 ? cells[2] + 1 : 1};
  }
  Index n_verts() const {
    auto n = n_verts_axis();
    return n[0] * n[1] * n[2];
  }
  Index vertex_index(Index i, Index j, Index kk) const {
    auto n = n_verts_axis();
    return (kk * n[1] + j) * n[0] + i;
  }
  std::array<Index, 3> cell_coords(Index c) const {
    return {c % cells[0], (c / cells[0]) % cells[1], c / (cells[0] * cells[1])};
  }
  Index cell_index(std::array<Index, 3> cc) const {
    return (cc[2] * cells[1] + cc[1]) * cells[0] + cc[0];
  }
  /// corner vertices of a cell, lexicographic over the 2^dim corners
  std::vector<Index> cell_vertices(Index c) const;
  std::vector<Point> cell_vertex_positions(Index c) const;
  /// minimum corner-to-corner edge length over the whole level
  double h_min() const;
  double h_max() const;
};

/// Nested refinement hierarchy; levels[0] is the coarsest.
struct MeshHierarchy {
  std::vector<MeshLevel> levels;
  const MeshLevel& finest() const { return levels.back(); }
  int n_levels() const { return static_cast<int>(levels.size()); }
  /// ancestor cell on a coarser level (pure index arithmetic; valid on
  /// perturbed hierarchies since refinement never changes topology)
  Index ancestor_cell(int fine_level, Index cell, int coarse_level) const;
};

/// Build refinements+1 nested Cartesian levels of [lo,hi]^dim with
/// base_cells_per_axis cells per axis on the coarsest level.
MeshHierarchy make_cartesian(int dim, std::array<double, 3> lo,
                             std::array<double, 3> hi, Index base_cells_per_axis,
                             int refinements);

/// Randomly displace the finest level's vertices by magnitude times the
/// minimal adjacent edge length and project boundary vertices back onto
/// their facet; coarser levels inherit the perturbed positions of shared
/// vertices. Throws if a cell inverts.
void perturb(MeshHierarchy& mesh, double magnitude, std::uint64_t seed);

///// Cell-wise positive coefficient field: a base function of the position
/// optionally scaled per coarse (level-0) cell.
struct CoefficientField {
  std::function<double(const Point&)> base = [](const Point&) { return 1.0; };
  std::vector<double> coarse_cell_scale; // empty = no per-cell scaling

  double evaluate(const MeshHierarchy& mesh, int level, Index cell,
                  const Point& x) const;
  bool is_unit() const;
};

CoefficientField constant_coefficient(double value);

/// The piecewise speed-of-sound field of the structural-health-monitoring
///// demo: 1 for y<0.2, 9 for y>=0.2 & z<0.2, 16 otherwise. In 2D the
/// z-clause is dropped, in 1D the field is 1.
CoefficientField coefficient_shm(int dim);

/// Per-coarse-cell multiplier c ~ U[lo,hi], deterministic by seed.
CoefficientField randomize_coefficient(const CoefficientField& field,
                                       const MeshHierarchy& mesh, double lo,
                                       double hi, std::uint64_t seed);

} // namespace stmg
