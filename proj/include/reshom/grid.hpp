#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace reshom {

using index_t = std::int64_t;

/// Uniform tensor-product grid of interior nodes on K_R = (-R/2, R/2)^d with
/// spacing h = 1/n_per_unit. Boundary nodes are eliminated: there are
/// m = R*n_per_unit - 1 interior nodes per axis and size = m^d unknowns.
/// Node coordinates are odd multiples of h/2, so the grid is symmetric about
/// the origin bit-exactly.
struct Grid {
  int dim = 1;
  double length = 1.0;  // R
  int n_per_unit = 1;
  double h = 1.0;
  index_t m = 0;     // interior nodes per axis
  index_t size = 0;  // m^dim

  /// Validates R >= 1, R*n integral, dim in {1,2,3}.
  static Grid make(int dim, double length, int n_per_unit);

  /// Coordinate of interior node i (1-based, 1..m) along any axis.
  double coord(index_t i) const { return static_cast<double>(2 * i - m - 1) * (0.5 * h); }
  /// Coordinate of the face between nodes i and i+1 (0-based face index 0..m).
  double face_coord(index_t f) const { return static_cast<double>(2 * f - m) * (0.5 * h); }

  /// Flat index of a multi-index (entries 1..m), first axis fastest.
  index_t flatten(std::span<const index_t> idx) const;
  void unflatten(index_t flat, std::span<index_t> idx) const;
};

/// Values at the interior nodes of a grid.
struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.size), 0.0) {}
  GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
};

/// Uniform periodic grid on the unit cell K with n nodes per axis at
/// coordinates i*h, i = 0..n-1 (no eliminated boundary).
struct PeriodicGrid {
  int dim = 1;
  int n = 1;
  double h = 1.0;
  index_t size = 0;  // n^dim

  static PeriodicGrid make(int dim, int n_per_unit);

  double coord(index_t i) const { return static_cast<double>(i) * h; }
  index_t flatten(std::span<const index_t> idx) const;
  void unflatten(index_t flat, std::span<index_t> idx) const;
};

}  // namespace reshom
