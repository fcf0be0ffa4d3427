#pragma once

#include <functional>
#include <span>
#include <vector>

#include "reshom/csr.hpp"

namespace reshom {

struct CgOptions {
  double tol = 1e-10;      // relative true residual
  index_t max_iter = 0;    // 0: 20*sqrt(N) + 500
  bool jacobi = true;
  bool project_mean_zero = false;  // for singular consistent periodic systems
  const std::vector<double>* start = nullptr;  // default: zero vector
};

struct CgResult {
  index_t iterations = 0;
  double residual = 0.0;  // relative true residual at return
};

/// Preconditioned conjugate gradients on an SPD (or consistent singular,
/// with projection) system. The recurrence residual is checked against the
/// recomputed true residual before returning; throws SolveError if the
/// iteration cap is reached first.
CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x,
                  const CgOptions& opts = {});

/// Direct LU solve for tridiagonal systems (the 1-d Dirichlet operators and
/// Crank-Nicolson steps). Factored once, reusable across right-hand sides.
class TridiagonalFactor {
public:
  explicit TridiagonalFactor(const CsrMatrix& a);
  void solve(std::span<const double> b, std::vector<double>& x) const;

private:
  std::vector<double> lower_, diag_, upper_;
};

/// B = I*shift_diag + scale*A, same sparsity pattern as A.
CsrMatrix shifted_matrix(const CsrMatrix& a, double scale, double shift_diag);

/// Mean of v subtracted in place; returns the removed mean.
double remove_mean(std::span<double> v);

}  // namespace reshom
