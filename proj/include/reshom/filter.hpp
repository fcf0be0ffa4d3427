#pragma once

#include "reshom/grid.hpp"

namespace reshom {

/// Unit-mass averaging kernel mu on [-1/2, 1/2], zero outside. Polynomial
/// kernels (1/4 - x^2)^q vanish with their first q-1 derivatives at the
/// endpoints; the infinite-order kernel is the smooth bump
/// exp(-2/(1 - 2|x|)). The normalization constant is fixed at construction
/// by composite trapezoid quadrature with 2^16 panels.
class Filter {
public:
  /// mu(x); zero for |x| >= 1/2.
  double operator()(double x) const;

  /// q for polynomial filters, -1 for the infinite-order bump.
  int order() const { return order_; }
  bool infinite_order() const { return order_ < 0; }
  double normalizer() const { return normalizer_; }

private:
  friend Filter make_polynomial_filter(int q);
  friend Filter make_exponential_filter();
  Filter(int order, double normalizer) : order_(order), normalizer_(normalizer) {}

  double profile(double x) const;

  int order_;
  double normalizer_;
};

/// mu(x) = c_q (1/4 - x^2)^q; q = 0 is the flat filter. q must be <= 20
/// (normalization loses precision beyond that).
Filter make_polynomial_filter(int q);

/// Normalized bump exp(-2/(1 - 2|x|)). Every one-sided derivative vanishes
/// at the endpoints; note the published profile is a function of |x| and so
/// is only Lipschitz at x = 0, which limits the averaging rate it can
/// deliver in practice to about L^-2.
Filter make_exponential_filter();

/// Weighted average of f over K_L = (-L/2, L/2)^d with the product kernel
/// mu_L(x) = L^-d prod_k mu(x_k / L), by composite trapezoid on the grid
/// nodes (half weights on the K_L boundary). The quadrature weights are
/// renormalized by the discrete mass of mu_L so that constants are averaged
/// exactly. Requires L < R and (R - L) * n_per_unit even so that the K_L
/// boundary lies on grid nodes.
double filtered_average(const GridFunction& f, const Filter& filter, double L);

}  // namespace reshom
