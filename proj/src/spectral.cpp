#include "reshom/spectral.hpp"

#include <cmath>
#include <random>

#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"
#include "reshom/solvers.hpp"
#include "reshom/tridiag_eig.hpp"

namespace reshom {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr index_t kDenseLimit = 4096;

void check_residuals(const DiscreteOperator& op, const SpectralTruncation& trunc) {
  const double defect = trunc.max_residual(op);
  if (defect > kResidualTol)
    throw SolveError("eigenpair residual " + std::to_string(defect) + " exceeds tolerance");
}

SpectralTruncation dense_path(const DiscreteOperator& op, index_t n_modes) {
  const index_t n = op.grid.size;
  std::vector<double> dense(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  const CsrMatrix& a = op.matrix;
  for (index_t r = 0; r < n; ++r)
    for (index_t p = a.rowptr[static_cast<std::size_t>(r)]; p < a.rowptr[static_cast<std::size_t>(r) + 1]; ++p)
      dense[static_cast<std::size_t>(r * n + a.colind[static_cast<std::size_t>(p)])] =
          a.values[static_cast<std::size_t>(p)];
  std::vector<double> w;
  dense_eigh(dense, w, n);

  SpectralTruncation trunc;
  trunc.grid = op.grid;
  trunc.n = n;
  trunc.n_modes = n_modes;
  trunc.eigenvalues.assign(w.begin(), w.begin() + n_modes);
  trunc.eigenvectors.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n_modes));
  for (index_t k = 0; k < n_modes; ++k)
    for (index_t i = 0; i < n; ++i)
      trunc.eigenvectors[static_cast<std::size_t>(k * n + i)] =
          dense[static_cast<std::size_t>(i * n + k)];
  return trunc;
}

// Inverse Lanczos: the lowest modes of A are the dominant, well-separated
// modes of A^-1, whose action is one CG solve per step (the "matvec block"
// the iteration cap counts). Plain Lanczos on A stalls on these modes.
SpectralTruncation lanczos_path(const DiscreteOperator& op, index_t n_modes, std::uint64_t seed) {
  const index_t n = op.grid.size;
  const std::size_t nn = static_cast<std::size_t>(n);
  const index_t cap = 50 * n_modes;

  std::vector<double> basis;  // n x k column-major
  std::vector<double> alpha, beta;
  std::vector<double> next(nn);
  {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : next) v = gauss(rng);
    const double norm = kernels::norm2(next);
    for (double& v : next) v /= norm;
  }

  CgOptions inner;
  inner.tol = 1e-12;
  std::vector<double> w;
  index_t applies = 0;

  auto step = [&]() {
    const index_t j = static_cast<index_t>(alpha.size());
    basis.insert(basis.end(), next.begin(), next.end());
    const double* qj = basis.data() + j * n;
    cg_solve(op.matrix, std::span<const double>(qj, nn), w, inner);
    ++applies;
    if (j > 0)
      kernels::axpy(-beta[static_cast<std::size_t>(j - 1)],
                    std::span<const double>(basis.data() + (j - 1) * n, nn), std::span<double>(w));
    const double a = kernels::dot(std::span<const double>(qj, nn), w);
    kernels::axpy(-a, std::span<const double>(qj, nn), std::span<double>(w));
    for (int pass = 0; pass < 2; ++pass)
      for (index_t i = 0; i <= j; ++i) {
        const std::span<const double> qi(basis.data() + i * n, nn);
        const double c = kernels::dot(qi, std::span<const double>(w));
        kernels::axpy(-c, qi, std::span<double>(w));
      }
    const double b = kernels::norm2(w);
    alpha.push_back(a);
    beta.push_back(b);
    if (b <= 1e-14) return false;  // invariant subspace of the inverse
    for (double& v : w) v /= b;
    next = w;
    return true;
  };

  SpectralTruncation trunc;
  trunc.grid = op.grid;
  trunc.n = n;
  trunc.n_modes = n_modes;

  bool exhausted = false;
  while (true) {
    const index_t target = std::min<index_t>(
        n, std::max<index_t>(n_modes + 8, static_cast<index_t>(alpha.size()) * 3 / 2));
    while (static_cast<index_t>(alpha.size()) < target && !exhausted)
      if (!step()) exhausted = true;

    const index_t kk = static_cast<index_t>(alpha.size());
    if (kk < n_modes) throw SolveError("Krylov space exhausted before the requested mode count");
    std::vector<double> theta(alpha.begin(), alpha.end());
    std::vector<double> e(static_cast<std::size_t>(kk), 0.0);
    for (index_t j = 0; j + 1 < kk; ++j) e[static_cast<std::size_t>(j)] = beta[static_cast<std::size_t>(j)];
    std::vector<double> z(static_cast<std::size_t>(kk) * static_cast<std::size_t>(kk), 0.0);
    for (index_t j = 0; j < kk; ++j) z[static_cast<std::size_t>(j * kk + j)] = 1.0;
    tridiag_eigh(theta, e, z, kk);

    // the top n_modes Ritz pairs of the inverse are the candidates
    trunc.eigenvalues.assign(static_cast<std::size_t>(n_modes), 0.0);
    trunc.eigenvectors.assign(nn * static_cast<std::size_t>(n_modes), 0.0);
    for (index_t m = 0; m < n_modes; ++m) {
      // largest inverse Ritz value = smallest eigenvalue of A, slot m = 0
      const index_t col = kk - 1 - m;
      double* phi = trunc.eigenvectors.data() + m * n;
      std::fill(phi, phi + n, 0.0);
      for (index_t c = 0; c < kk; ++c)
        kernels::axpy(z[static_cast<std::size_t>(c * kk + col)],
                      std::span<const double>(basis.data() + c * n, nn),
                      std::span<double>(phi, nn));
      const double norm = kernels::norm2(std::span<const double>(phi, nn));
      for (index_t i = 0; i < n; ++i) phi[i] /= norm;
      // Rayleigh quotient with A gives the eigenvalue estimate directly
      op.matrix.multiply(phi, w.data());
      trunc.eigenvalues[static_cast<std::size_t>(m)] =
          kernels::dot(std::span<const double>(phi, nn), std::span<const double>(w.data(), nn));
    }
    if (trunc.max_residual(op) <= kResidualTol) break;
    if (exhausted || applies >= cap)
      throw SolveError("partial eigendecomposition did not converge within the iteration cap");
  }
  return trunc;
}

}  // namespace

double SpectralTruncation::max_residual(const DiscreteOperator& op) const {
  std::vector<double> tmp(static_cast<std::size_t>(n));
  double worst = 0.0;
  for (index_t k = 0; k < n_modes; ++k) {
    op.matrix.multiply(mode(k), tmp.data());
    const double lambda = eigenvalues[static_cast<std::size_t>(k)];
    kernels::axpy(-lambda, std::span<const double>(mode(k), static_cast<std::size_t>(n)),
                  std::span<double>(tmp));
    worst = std::max(worst, kernels::norm2(tmp) / std::max(lambda, 1e-300));
  }
  return worst;
}

double SpectralTruncation::orthogonality_defect() const {
  double defect = 0.0;
  for (index_t i = 0; i < n_modes; ++i) {
    const std::span<const double> vi(mode(i), static_cast<std::size_t>(n));
    for (index_t j = i; j < n_modes; ++j) {
      const std::span<const double> vj(mode(j), static_cast<std::size_t>(n));
      const double v = kernels::dot(vi, vj);
      defect = std::max(defect, std::fabs(i == j ? v - 1.0 : v));
    }
  }
  return defect;
}

SpectralTruncation partial_eigendecomposition(const DiscreteOperator& op, index_t n_modes,
                                              const GridFunction* g, std::uint64_t seed) {
  const index_t n = op.grid.size;
  if (n_modes < 0 || n_modes > n) throw ConfigError("mode count must be in [0, N]");
  SpectralTruncation trunc;
  if (n_modes == 0) {
    trunc.grid = op.grid;
    trunc.n = n;
    trunc.n_modes = 0;
  } else {
    trunc = (n <= kDenseLimit) ? dense_path(op, n_modes) : lanczos_path(op, n_modes, seed);
    for (index_t k = 0; k < n_modes; ++k)
      if (!(trunc.eigenvalues[static_cast<std::size_t>(k)] > 0.0))
        throw SolveError("non-positive eigenvalue in the partial decomposition");
    check_residuals(op, trunc);
  }
  if (g) {
    if (static_cast<index_t>(g->values.size()) != n)
      throw ConfigError("source size does not match the operator");
    trunc.coefficients.resize(static_cast<std::size_t>(n_modes));
    for (index_t k = 0; k < n_modes; ++k)
      trunc.coefficients[static_cast<std::size_t>(k)] = kernels::dot(
          std::span<const double>(trunc.mode(k), static_cast<std::size_t>(n)), g->values);
  }
  return trunc;
}

GridFunction expmv_spectral(const SpectralTruncation& trunc, double T) {
  if (T < 0.0) throw ConfigError("expmv requires T >= 0");
  if (trunc.n_modes > 0 && trunc.coefficients.size() != static_cast<std::size_t>(trunc.n_modes))
    throw ConfigError("spectral truncation carries no source coefficients");
  GridFunction out(trunc.grid);
  for (index_t k = 0; k < trunc.n_modes; ++k) {
    const double w = std::exp(-T * trunc.eigenvalues[static_cast<std::size_t>(k)]) *
                     trunc.coefficients[static_cast<std::size_t>(k)];
    kernels::axpy(w, std::span<const double>(trunc.mode(k), static_cast<std::size_t>(trunc.n)),
                  std::span<double>(out.values));
  }
  return out;
}

double estimate_cd(const DiscreteOperator& op, index_t n_eigs) {
  if (n_eigs < 4) throw ConfigError("estimate_cd needs at least 4 eigenvalues");
  const SpectralTruncation trunc = partial_eigendecomposition(op, n_eigs);
  const double r2 = op.grid.length * op.grid.length;
  const double exponent = 2.0 / op.grid.dim;
  double c = std::numeric_limits<double>::infinity();
  for (index_t k = 1; k <= n_eigs; ++k)
    c = std::min(c, trunc.eigenvalues[static_cast<std::size_t>(k - 1)] * r2 /
                        std::pow(static_cast<double>(k), exponent));
  return c;
}

}  // namespace reshom
