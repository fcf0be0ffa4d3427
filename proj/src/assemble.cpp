#include "reshom/assemble.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"

namespace reshom {

namespace {

// Face layout along axis k: the face coordinate index runs over 0..m (Dirichlet)
// or 0..n-1 (periodic, face f sits between nodes f and f+1 mod n); the other
// axes keep their node indices. Faces are flattened with the face axis fastest.

std::vector<double> face_values(const CoefficientField& field, const Grid& grid, int axis) {
  const index_t m = grid.m;
  const int d = grid.dim;
  index_t others = 1;
  for (int k = 0; k < d; ++k)
    if (k != axis) others *= m;
  std::vector<double> faces(static_cast<std::size_t>((m + 1) * others));
#pragma omp parallel for schedule(static)
  for (index_t rest = 0; rest < others; ++rest) {
    std::array<double, 3> x{};
    index_t rem = rest;
    for (int k = 0; k < d; ++k) {
      if (k == axis) continue;
      x[static_cast<std::size_t>(k)] = grid.coord(rem % m + 1);
      rem /= m;
    }
    for (index_t f = 0; f <= m; ++f) {
      x[static_cast<std::size_t>(axis)] = grid.face_coord(f);
      faces[static_cast<std::size_t>(rest * (m + 1) + f)] =
          field.entry(axis, std::span<const double>(x.data(), static_cast<std::size_t>(d)));
    }
  }
  return faces;
}

// Index of face f (0..m) along `axis` for the node with multi-index idx.
index_t face_flat(const Grid& grid, int axis, std::span<const index_t> idx, index_t f) {
  const index_t m = grid.m;
  index_t rest = 0, stride = 1;
  for (int k = 0; k < grid.dim; ++k) {
    if (k == axis) continue;
    rest += (idx[static_cast<std::size_t>(k)] - 1) * stride;
    stride *= m;
  }
  return rest * (m + 1) + f;
}

std::vector<double> periodic_face_values(const CoefficientField& field, const PeriodicGrid& grid,
                                         int axis) {
  const index_t n = grid.n;
  const int d = grid.dim;
  index_t others = 1;
  for (int k = 0; k < d; ++k)
    if (k != axis) others *= n;
  std::vector<double> faces(static_cast<std::size_t>(n * others));
#pragma omp parallel for schedule(static)
  for (index_t rest = 0; rest < others; ++rest) {
    std::array<double, 3> x{};
    index_t rem = rest;
    for (int k = 0; k < d; ++k) {
      if (k == axis) continue;
      x[static_cast<std::size_t>(k)] = grid.coord(rem % n);
      rem /= n;
    }
    for (index_t f = 0; f < n; ++f) {
      x[static_cast<std::size_t>(axis)] =
          (static_cast<double>(2 * f + 1)) * (0.5 * grid.h);  // face between f and f+1
      faces[static_cast<std::size_t>(rest * n + f)] =
          field.entry(axis, std::span<const double>(x.data(), static_cast<std::size_t>(d)));
    }
  }
  return faces;
}

index_t periodic_face_flat(const PeriodicGrid& grid, int axis, std::span<const index_t> idx,
                           index_t f) {
  const index_t n = grid.n;
  index_t rest = 0, stride = 1;
  for (int k = 0; k < grid.dim; ++k) {
    if (k == axis) continue;
    rest += idx[static_cast<std::size_t>(k)] * stride;
    stride *= n;
  }
  return rest * n + f;
}

void check_field_grid(const CoefficientField& field, int dim) {
  if (field.dim() != dim) throw ConfigError("coefficient field dimension does not match the grid");
}

}  // namespace

GridFunction DiscreteOperator::apply(const GridFunction& v) const {
  if (static_cast<index_t>(v.values.size()) != matrix.rows)
    throw ConfigError("grid function size does not match the operator");
  GridFunction out(grid);
  matrix.multiply(v.data(), out.data());
  return out;
}

DiscreteOperator assemble_operator(const CoefficientField& field, const Grid& grid) {
  check_field_grid(field, grid.dim);
  const int d = grid.dim;
  const index_t m = grid.m;
  const index_t n_rows = grid.size;
  const double inv_h2 = 1.0 / (grid.h * grid.h);

  std::vector<std::vector<double>> faces(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) faces[static_cast<std::size_t>(k)] = face_values(field, grid, k);

  CsrMatrix a;
  a.rows = n_rows;
  a.rowptr.assign(static_cast<std::size_t>(n_rows) + 1, 0);

  // Row sizes, then prefix sum, then a deterministic parallel fill.
#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < n_rows; ++r) {
    std::array<index_t, 3> idx{};
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(d)));
    index_t nnz = 1;
    for (int k = 0; k < d; ++k) {
      if (idx[static_cast<std::size_t>(k)] > 1) ++nnz;
      if (idx[static_cast<std::size_t>(k)] < m) ++nnz;
    }
    a.rowptr[static_cast<std::size_t>(r) + 1] = nnz;
  }
  for (index_t r = 0; r < n_rows; ++r)
    a.rowptr[static_cast<std::size_t>(r) + 1] += a.rowptr[static_cast<std::size_t>(r)];
  a.colind.resize(static_cast<std::size_t>(a.rowptr.back()));
  a.values.resize(static_cast<std::size_t>(a.rowptr.back()));

#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < n_rows; ++r) {
    std::array<index_t, 3> idx{};
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(d)));
    const std::span<const index_t> idxs(idx.data(), static_cast<std::size_t>(d));

    double diag = 0.0;
    std::array<double, 3> left{}, right{};
    for (int k = 0; k < d; ++k) {
      const index_t i = idx[static_cast<std::size_t>(k)];
      left[static_cast<std::size_t>(k)] =
          faces[static_cast<std::size_t>(k)][static_cast<std::size_t>(face_flat(grid, k, idxs, i - 1))];
      right[static_cast<std::size_t>(k)] =
          faces[static_cast<std::size_t>(k)][static_cast<std::size_t>(face_flat(grid, k, idxs, i))];
      diag += (left[static_cast<std::size_t>(k)] + right[static_cast<std::size_t>(k)]) * inv_h2;
    }

    index_t p = a.rowptr[static_cast<std::size_t>(r)];
    index_t stride = 1;
    std::array<index_t, 3> strides{};
    for (int k = 0; k < d; ++k) {
      strides[static_cast<std::size_t>(k)] = stride;
      stride *= m;
    }
    // Columns in ascending order: -e_d .. -e_1, diagonal, +e_1 .. +e_d.
    for (int k = d - 1; k >= 0; --k)
      if (idx[static_cast<std::size_t>(k)] > 1) {
        a.colind[static_cast<std::size_t>(p)] = r - strides[static_cast<std::size_t>(k)];
        a.values[static_cast<std::size_t>(p)] = -left[static_cast<std::size_t>(k)] * inv_h2;
        ++p;
      }
    a.colind[static_cast<std::size_t>(p)] = r;
    a.values[static_cast<std::size_t>(p)] = diag;
    ++p;
    for (int k = 0; k < d; ++k)
      if (idx[static_cast<std::size_t>(k)] < m) {
        a.colind[static_cast<std::size_t>(p)] = r + strides[static_cast<std::size_t>(k)];
        a.values[static_cast<std::size_t>(p)] = -right[static_cast<std::size_t>(k)] * inv_h2;
        ++p;
      }
  }
  a.finalize();

  DiscreteOperator op;
  op.grid = grid;
  op.matrix = std::move(a);
  op.alpha = field.alpha();
  op.beta = field.beta();
  return op;
}

GridFunction assemble_source(const CoefficientField& field, const Grid& grid, int axis) {
  check_field_grid(field, grid.dim);
  if (axis < 0 || axis >= grid.dim) throw ConfigError("source axis out of range");
  const index_t m = grid.m;
  const double inv_h = 1.0 / grid.h;
  const std::vector<double> faces = face_values(field, grid, axis);
  GridFunction g(grid);
#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < grid.size; ++r) {
    std::array<index_t, 3> idx{};
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(grid.dim)));
    const std::span<const index_t> idxs(idx.data(), static_cast<std::size_t>(grid.dim));
    const index_t i = idx[static_cast<std::size_t>(axis)];
    const double a_right = faces[static_cast<std::size_t>(face_flat(grid, axis, idxs, i))];
    const double a_left = faces[static_cast<std::size_t>(face_flat(grid, axis, idxs, i - 1))];
    g.values[static_cast<std::size_t>(r)] = (a_right - a_left) * inv_h;
  }
  return g;
}

double spectral_radius(const DiscreteOperator& op, double tol) {
  if (!(tol > 0.0) || tol > 0.1) throw ConfigError("spectral_radius tolerance must be in (0, 0.1]");
  const index_t n = op.grid.size;
  std::vector<double> v(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> w(static_cast<std::size_t>(n));
  const long cap = static_cast<long>(std::ceil(100.0 / tol));
  double lambda = 0.0;
  for (long it = 0; it < cap; ++it) {
    op.matrix.multiply(v.data(), w.data());
    const double rayleigh = kernels::dot(v, w);
    const double wn = kernels::norm2(w);
    if (wn == 0.0) return 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / wn;
    if (it > 0 && std::fabs(rayleigh - lambda) <= tol * std::fabs(rayleigh)) return rayleigh;
    lambda = rayleigh;
  }
  throw SolveError("power iteration did not stagnate within the iteration cap");
}

std::vector<double> PeriodicOperator::apply(const std::vector<double>& v) const {
  if (static_cast<index_t>(v.size()) != matrix.rows)
    throw ConfigError("vector size does not match the periodic operator");
  std::vector<double> out(v.size());
  matrix.multiply(v.data(), out.data());
  return out;
}

PeriodicOperator assemble_periodic_operator(const CoefficientField& field, int n_per_unit) {
  const PeriodicGrid grid = PeriodicGrid::make(field.dim(), n_per_unit);
  const int d = grid.dim;
  const index_t n = grid.n;
  const double inv_h2 = 1.0 / (grid.h * grid.h);

  std::vector<std::vector<double>> faces(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k)
    faces[static_cast<std::size_t>(k)] = periodic_face_values(field, grid, k);

  CsrMatrix a;
  a.rows = grid.size;
  a.rowptr.assign(static_cast<std::size_t>(grid.size) + 1, 0);
  for (index_t r = 0; r < grid.size; ++r)
    a.rowptr[static_cast<std::size_t>(r) + 1] =
        a.rowptr[static_cast<std::size_t>(r)] + (2 * d + 1);
  a.colind.resize(static_cast<std::size_t>(a.rowptr.back()));
  a.values.resize(static_cast<std::size_t>(a.rowptr.back()));

#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < grid.size; ++r) {
    std::array<index_t, 3> idx{};
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(d)));
    const std::span<const index_t> idxs(idx.data(), static_cast<std::size_t>(d));

    struct Entry {
      index_t col;
      double val;
    };
    std::array<Entry, 7> row{};
    int count = 0;
    double diag = 0.0;
    index_t stride = 1;
    for (int k = 0; k < d; ++k) {
      const index_t i = idx[static_cast<std::size_t>(k)];
      const index_t f_right = i;
      const index_t f_left = (i + n - 1) % n;
      const double a_right =
          faces[static_cast<std::size_t>(k)][static_cast<std::size_t>(periodic_face_flat(grid, k, idxs, f_right))];
      const double a_left =
          faces[static_cast<std::size_t>(k)][static_cast<std::size_t>(periodic_face_flat(grid, k, idxs, f_left))];
      diag += (a_left + a_right) * inv_h2;
      const index_t up = r + ((i + 1) % n - i) * stride;
      const index_t dn = r + ((i + n - 1) % n - i) * stride;
      row[static_cast<std::size_t>(count++)] = {up, -a_right * inv_h2};
      row[static_cast<std::size_t>(count++)] = {dn, -a_left * inv_h2};
      stride *= n;
    }
    row[static_cast<std::size_t>(count++)] = {r, diag};
    std::sort(row.begin(), row.begin() + count,
              [](const Entry& x, const Entry& y) { return x.col < y.col; });
    index_t p = a.rowptr[static_cast<std::size_t>(r)];
    for (int e = 0; e < count; ++e, ++p) {
      a.colind[static_cast<std::size_t>(p)] = row[static_cast<std::size_t>(e)].col;
      a.values[static_cast<std::size_t>(p)] = row[static_cast<std::size_t>(e)].val;
    }
  }
  a.finalize();

  PeriodicOperator op;
  op.grid = grid;
  op.matrix = std::move(a);
  op.alpha = field.alpha();
  op.beta = field.beta();
  return op;
}

std::vector<double> assemble_periodic_source(const CoefficientField& field, int n_per_unit,
                                             int axis) {
  const PeriodicGrid grid = PeriodicGrid::make(field.dim(), n_per_unit);
  if (axis < 0 || axis >= grid.dim) throw ConfigError("source axis out of range");
  const index_t n = grid.n;
  const double inv_h = 1.0 / grid.h;
  const std::vector<double> faces = periodic_face_values(field, grid, axis);
  std::vector<double> g(static_cast<std::size_t>(grid.size));
#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < grid.size; ++r) {
    std::array<index_t, 3> idx{};
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(grid.dim)));
    const std::span<const index_t> idxs(idx.data(), static_cast<std::size_t>(grid.dim));
    const index_t i = idx[static_cast<std::size_t>(axis)];
    const double a_right =
        faces[static_cast<std::size_t>(periodic_face_flat(grid, axis, idxs, i))];
    const double a_left =
        faces[static_cast<std::size_t>(periodic_face_flat(grid, axis, idxs, (i + n - 1) % n))];
    g[static_cast<std::size_t>(r)] = (a_right - a_left) * inv_h;
  }
  return g;
}

}  // namespace reshom
