#pragma once

#include <optional>

#include "reshom/assemble.hpp"
#include "reshom/grid.hpp"

namespace reshom {

/// k-step symmetric Lanczos factorization A Q = Q H + beta_k q_{k+1} e_k^T
/// with full reorthogonalization (two-pass modified Gram-Schmidt against all
/// prior vectors). H is the symmetric tridiagonal with diagonal `alpha` and
/// off-diagonal `beta[0..k-2]`; `beta[k-1]` couples to the next vector.
struct LanczosDecomposition {
  Grid grid;
  index_t n = 0;
  index_t k = 0;                // effective dimension (may be < requested)
  bool invariant = false;       // happy breakdown: exact invariant subspace
  double g_norm = 0.0;          // ||g||_2 (the bound's beta)
  std::vector<double> basis;    // n x k, column-major
  std::vector<double> alpha;    // k
  std::vector<double> beta;     // k; beta[j] couples columns j and j+1
  std::vector<double> next;     // q_{k+1} (empty after breakdown)

  const double* column(index_t j) const { return basis.data() + j * n; }

  /// max |Q^T Q - I|; full reorthogonalization keeps this near rounding.
  double orthogonality_defect() const;
};

/// Runs k Lanczos steps from q_1 = g/||g||. Terminates early (with the
/// invariant flag set) when beta_j <= 1e-12 ||g||. Throws on g = 0; callers
/// short-circuit that case since e^{-TA} 0 = 0.
LanczosDecomposition lanczos(const DiscreteOperator& op, const GridFunction& g, index_t k);

/// Grows an existing decomposition to k_new steps.
void lanczos_extend(const DiscreteOperator& op, LanczosDecomposition& dec, index_t k_new);

/// ||g|| Q exp(-T H) e_1, with exp(-T H) formed from the eigendecomposition
/// of the small tridiagonal H (implicit QL), never by scaling-and-squaring.
GridFunction expmv_lanczos(const LanczosDecomposition& dec, double T);

/// A-priori Krylov error bound for exp(-T A) g with rho_T >= rho(T A):
/// 10 b e^{-4k^2/(5 rho)} for sqrt(rho) <= k <= rho/2,
/// (40 b/rho) e^{-rho/4} (e rho/(4k))^k for k >= rho/2,
/// +infinity below sqrt(rho); the smaller value where both branches apply.
double hochbruck_lubich_bound(double rho_T, index_t k, double g_norm);

/// k = ceil(sqrt(c_d) T / (2h)) clamped to [2, n_max]; c_d is the h^2-scaled
/// spectral-radius constant rho(A_h) h^2.
index_t choose_k(double h, double T, double c_d, index_t n_max);

struct ExpmvDiagnostics {
  index_t k_used = 0;
  bool invariant = false;
  bool converged = true;
  double g_norm = 0.0;
  double bound = 0.0;  // Hochbruck-Lubich value when available, else 0
};

/// Applies e^{-TA} g by Lanczos, growing the subspace geometrically from
/// k_start until two successive approximations differ by less than
/// tol * ||g||, up to k_max columns.
GridFunction expmv_lanczos_adaptive(const DiscreteOperator& op, const GridFunction& g, double T,
                                    double tol, index_t k_start, index_t k_max,
                                    ExpmvDiagnostics* diag = nullptr);

}  // namespace reshom
