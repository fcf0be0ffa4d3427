#include "reshom/filter.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "reshom/errors.hpp"

namespace reshom {

namespace {

double polynomial_profile(int q, double x) {
  if (std::fabs(x) > 0.5) return 0.0;
  if (q == 0) return 1.0;  // flat filter keeps its endpoint value
  return std::pow(0.25 - x * x, q);
}

double bump_profile(double x) {
  const double ax = std::fabs(x);
  if (ax >= 0.5) return 0.0;
  return std::exp(-2.0 / (1.0 - 2.0 * ax));  // underflows to 0 near the ends
}

template <class Profile>
double trapezoid_mass(Profile&& profile) {
  constexpr int kPanels = 1 << 16;
  const double h = 1.0 / kPanels;
  double sum = 0.5 * (profile(-0.5) + profile(0.5));
  for (int i = 1; i < kPanels; ++i) sum += profile(-0.5 + i * h);
  return sum * h;
}

}  // namespace

double Filter::profile(double x) const {
  return order_ < 0 ? bump_profile(x) : polynomial_profile(order_, x);
}

double Filter::operator()(double x) const { return normalizer_ * profile(x); }

Filter make_polynomial_filter(int q) {
  if (q < 0 || q > 20) throw ConfigError("polynomial filter order must be in 0..20");
  const double mass = trapezoid_mass([q](double x) { return polynomial_profile(q, x); });
  return Filter(q, 1.0 / mass);
}

Filter make_exponential_filter() {
  const double mass = trapezoid_mass(bump_profile);
  return Filter(-1, 1.0 / mass);
}

double filtered_average(const GridFunction& f, const Filter& filter, double L) {
  const Grid& grid = f.grid;
  const int d = grid.dim;
  const index_t m = grid.m;
  if (!(L > 0.0)) throw ConfigError("averaging box side L must be positive");
  if (!(L < grid.length)) throw ConfigError("averaging box side L must be smaller than R");
  const double cells = L * grid.n_per_unit;
  const index_t ln = static_cast<index_t>(std::nearbyint(cells));
  if (std::fabs(cells - ln) > 1e-9 * std::max(1.0, cells))
    throw ConfigError("L*n_per_unit must be an integer (averaging box incommensurate)");
  if ((static_cast<index_t>(std::nearbyint(grid.length * grid.n_per_unit)) - ln) % 2 != 0)
    throw ConfigError("(R - L)*n_per_unit must be even so K_L corners land on grid nodes");

  // Node i is inside K_L iff |2i - m - 1| <= L*n; equality marks the boundary.
  const index_t i_lo = (m + 1 - ln) / 2;
  const index_t i_hi = (m + 1 + ln) / 2;
  const index_t width = i_hi - i_lo + 1;

  std::vector<double> wmu(static_cast<std::size_t>(width));
  double mass_1d = 0.0;
  for (index_t i = i_lo; i <= i_hi; ++i) {
    const double t = static_cast<double>(2 * i - m - 1);  // x / (h/2)
    const double trap = (std::llabs(static_cast<long long>(t)) == ln) ? 0.5 * grid.h : grid.h;
    const double v = filter(grid.coord(i) / L) / L * trap;
    wmu[static_cast<std::size_t>(i - i_lo)] = v;
    mass_1d += v;
  }
  if (!(mass_1d > 0.0)) throw ConfigError("filter mass vanished on this grid");

  double numerator = 0.0;
  index_t slices = 1;
  for (int k = 1; k < d; ++k) slices *= width;
  std::vector<double> partial(static_cast<std::size_t>(slices));
#pragma omp parallel for schedule(static)
  for (index_t s = 0; s < slices; ++s) {
    std::array<index_t, 3> idx{};
    double w_rest = 1.0;
    index_t rem = s;
    for (int k = 1; k < d; ++k) {
      const index_t off = rem % width;
      idx[static_cast<std::size_t>(k)] = i_lo + off;
      w_rest *= wmu[static_cast<std::size_t>(off)];
      rem /= width;
    }
    index_t base = 0, stride = 1;
    for (int k = 0; k < d; ++k) {
      if (k > 0) base += (idx[static_cast<std::size_t>(k)] - 1) * stride;
      stride *= m;
    }
    double s_line = 0.0;
    for (index_t i = i_lo; i <= i_hi; ++i)
      s_line += f.values[static_cast<std::size_t>(base + (i - 1))] *
                wmu[static_cast<std::size_t>(i - i_lo)];
    partial[static_cast<std::size_t>(s)] = s_line * w_rest;
  }
  for (double p : partial) numerator += p;

  double mass = 1.0;
  for (int k = 0; k < d; ++k) mass *= mass_1d;
  return numerator / mass;
}

}  // namespace reshom
