#pragma once

#include "reshom/coefficient.hpp"
#include "reshom/csr.hpp"
#include "reshom/grid.hpp"

namespace reshom {

/// Sparse SPD finite-difference discretization of -div(a grad .) on K_R with
/// homogeneous Dirichlet boundary (boundary nodes eliminated). The flux-form
/// stencil samples each diagonal entry of a at cell-face midpoints; every
/// face coefficient is computed once and written to both symmetric entries,
/// so A = A^T holds bitwise.
struct DiscreteOperator {
  Grid grid;
  CsrMatrix matrix;
  double alpha = 0.0;  // coefficient lower bound (diagnostics)
  double beta = 0.0;

  GridFunction apply(const GridFunction& v) const;
};

DiscreteOperator assemble_operator(const CoefficientField& field, const Grid& grid);

/// Discrete source g^j = div(a e_j) built from the same face values as the
/// operator: g_i = (a_j(x_i + h/2 e_j) - a_j(x_i - h/2 e_j)) / h. Exactly
/// zero for constant fields. Axis j is 0-based.
GridFunction assemble_source(const CoefficientField& field, const Grid& grid, int axis);

/// Power-iteration estimate of the spectral radius with deterministic
/// all-ones start; stops when the Rayleigh quotient stagnates below tol
/// relative, fails after ceil(100/tol) iterations.
double spectral_radius(const DiscreteOperator& op, double tol);

/// Same flux-form discretization on the periodic unit cell (indices wrap).
/// Singular with the constants as null space; row sums are exactly zero.
struct PeriodicOperator {
  PeriodicGrid grid;
  CsrMatrix matrix;
  double alpha = 0.0;
  double beta = 0.0;

  std::vector<double> apply(const std::vector<double>& v) const;
};

PeriodicOperator assemble_periodic_operator(const CoefficientField& field, int n_per_unit);

std::vector<double> assemble_periodic_source(const CoefficientField& field, int n_per_unit,
                                             int axis);

}  // namespace reshom
