#include "reshom/grid.hpp"

#include <cmath>

#include "reshom/errors.hpp"

namespace reshom {

Grid Grid::make(int dim, double length, int n_per_unit) {
  if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2 or 3");
  if (!(length >= 1.0)) throw ConfigError("domain side R must be >= 1");
  if (n_per_unit < 1) throw ConfigError("n_per_unit must be positive");
  const double cells = length * n_per_unit;
  const double rounded = std::nearbyint(cells);
  if (std::fabs(cells - rounded) > 1e-9 * std::max(1.0, cells))
    throw ConfigError("R*n_per_unit must be an integer (grid incommensurate with the cube)");
  Grid g;
  g.dim = dim;
  g.length = length;
  g.n_per_unit = n_per_unit;
  g.h = 1.0 / n_per_unit;
  g.m = static_cast<index_t>(rounded) - 1;
  if (g.m < 1) throw ConfigError("grid has no interior nodes");
  g.size = 1;
  for (int k = 0; k < dim; ++k) g.size *= g.m;
  return g;
}

index_t Grid::flatten(std::span<const index_t> idx) const {
  index_t flat = 0, stride = 1;
  for (int k = 0; k < dim; ++k) {
    flat += (idx[static_cast<std::size_t>(k)] - 1) * stride;
    stride *= m;
  }
  return flat;
}

void Grid::unflatten(index_t flat, std::span<index_t> idx) const {
  for (int k = 0; k < dim; ++k) {
    idx[static_cast<std::size_t>(k)] = flat % m + 1;
    flat /= m;
  }
}

PeriodicGrid PeriodicGrid::make(int dim, int n_per_unit) {
  if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2 or 3");
  if (n_per_unit < 3) throw ConfigError("periodic grid needs n_per_unit >= 3");
  PeriodicGrid g;
  g.dim = dim;
  g.n = n_per_unit;
  g.h = 1.0 / n_per_unit;
  g.size = 1;
  for (int k = 0; k < dim; ++k) g.size *= g.n;
  return g;
}

index_t PeriodicGrid::flatten(std::span<const index_t> idx) const {
  index_t flat = 0, stride = 1;
  for (int k = 0; k < dim; ++k) {
    flat += idx[static_cast<std::size_t>(k)] * stride;
    stride *= n;
  }
  return flat;
}

void PeriodicGrid::unflatten(index_t flat, std::span<index_t> idx) const {
  for (int k = 0; k < dim; ++k) {
    idx[static_cast<std::size_t>(k)] = flat % n;
    flat /= n;
  }
}

}  // namespace reshom
