#pragma once

#include <cstdint>

#include "reshom/assemble.hpp"
#include "reshom/grid.hpp"

namespace reshom {

/// Lowest eigenpairs of a discrete operator plus the expansion coefficients
/// of a source vector in that partial eigenbasis.
struct SpectralTruncation {
  Grid grid;
  index_t n = 0;
  index_t n_modes = 0;
  std::vector<double> eigenvalues;   // ascending, positive
  std::vector<double> eigenvectors;  // n x n_modes, column-major, orthonormal
  std::vector<double> coefficients;  // <g, phi_k>; empty if no source given

  const double* mode(index_t k) const { return eigenvectors.data() + k * n; }
  double max_residual(const DiscreteOperator& op) const;  // max ||A phi - lambda phi|| / lambda
  double orthogonality_defect() const;
};

/// Computes the lowest n_modes eigenpairs: dense Householder+QL when
/// N <= 4096, otherwise Lanczos with full reorthogonalization and Ritz
/// extraction (seeded start vector, iteration cap 50*n_modes + 200).
/// Eigenpair residuals are verified to 1e-8 relative. When a source g is
/// supplied its coefficients <g, phi_k> are stored for expmv_spectral.
SpectralTruncation partial_eigendecomposition(const DiscreteOperator& op, index_t n_modes,
                                              const GridFunction* g = nullptr,
                                              std::uint64_t seed = 0);

/// Truncated expansion sum_k e^{-lambda_k T} g_k phi_k. Requires the
/// decomposition to carry source coefficients; n_modes = 0 gives zero.
GridFunction expmv_spectral(const SpectralTruncation& trunc, double T);

/// Largest c with lambda_k >= c k^{2/d} R^{-2} over the computed lowest
/// n_eigs eigenvalues (1-indexed), i.e. min_k lambda_k R^2 / k^{2/d}.
double estimate_cd(const DiscreteOperator& op, index_t n_eigs);

}  // namespace reshom
