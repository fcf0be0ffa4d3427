#include "reshom/lanczos.hpp"

#include <cmath>
#include <limits>

#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"
#include "reshom/tridiag_eig.hpp"

namespace reshom {

namespace {

constexpr double kBreakdownFactor = 1e-12;

// Two-pass modified Gram-Schmidt of w against the first j+1 columns.
void reorthogonalize(const LanczosDecomposition& dec, index_t j, std::vector<double>& w) {
  const std::span<double> ws(w);
  for (int pass = 0; pass < 2; ++pass) {
    for (index_t i = 0; i <= j; ++i) {
      const std::span<const double> qi(dec.column(i), static_cast<std::size_t>(dec.n));
      const double c = kernels::dot(qi, ws);
      kernels::axpy(-c, qi, ws);
    }
  }
}

// One Lanczos step: consumes dec.next (= beta[k-1]-scaled residual direction).
void step(const DiscreteOperator& op, LanczosDecomposition& dec) {
  const index_t n = dec.n;
  const index_t j = dec.k;
  dec.basis.insert(dec.basis.end(), dec.next.begin(), dec.next.end());
  std::vector<double> w(static_cast<std::size_t>(n));
  op.matrix.multiply(dec.column(j), w.data());
  const std::span<const double> qj(dec.column(j), static_cast<std::size_t>(n));
  if (j > 0) {
    const std::span<const double> qprev(dec.column(j - 1), static_cast<std::size_t>(n));
    kernels::axpy(-dec.beta[static_cast<std::size_t>(j - 1)], qprev, std::span<double>(w));
  }
  const double a = kernels::dot(qj, w);
  kernels::axpy(-a, qj, std::span<double>(w));
  reorthogonalize(dec, j, w);
  const double b = kernels::norm2(w);
  dec.alpha.push_back(a);
  dec.beta.push_back(b);
  dec.k = j + 1;
  if (b <= kBreakdownFactor * dec.g_norm) {
    dec.invariant = true;
    dec.next.clear();
    return;
  }
  for (double& v : w) v /= b;
  dec.next = std::move(w);
}

// y = exp(-T H_k) e_1 via the tridiagonal eigendecomposition.
std::vector<double> small_expm_e1(const LanczosDecomposition& dec, double T) {
  const index_t k = dec.k;
  std::vector<double> d(dec.alpha.begin(), dec.alpha.end());
  std::vector<double> e(static_cast<std::size_t>(k), 0.0);
  for (index_t j = 0; j + 1 < k; ++j) e[static_cast<std::size_t>(j)] = dec.beta[static_cast<std::size_t>(j)];
  std::vector<double> z(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0.0);
  for (index_t j = 0; j < k; ++j) z[static_cast<std::size_t>(j * k + j)] = 1.0;
  tridiag_eigh(d, e, z, k);
  std::vector<double> y(static_cast<std::size_t>(k), 0.0);
  for (index_t j = 0; j < k; ++j) {
    const double w = std::exp(-T * d[static_cast<std::size_t>(j)]) * z[static_cast<std::size_t>(j)];
    for (index_t i = 0; i < k; ++i)
      y[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i * k + j)] * w;
  }
  return y;
}

GridFunction assemble_result(const LanczosDecomposition& dec, const std::vector<double>& y) {
  GridFunction out(dec.grid);
  for (index_t j = 0; j < dec.k; ++j) {
    const std::span<const double> qj(dec.column(j), static_cast<std::size_t>(dec.n));
    kernels::axpy(dec.g_norm * y[static_cast<std::size_t>(j)], qj, std::span<double>(out.values));
  }
  return out;
}

}  // namespace

double LanczosDecomposition::orthogonality_defect() const {
  double defect = 0.0;
  for (index_t i = 0; i < k; ++i) {
    const std::span<const double> qi(column(i), static_cast<std::size_t>(n));
    for (index_t j = i; j < k; ++j) {
      const std::span<const double> qj(column(j), static_cast<std::size_t>(n));
      const double v = kernels::dot(qi, qj);
      defect = std::max(defect, std::fabs(i == j ? v - 1.0 : v));
    }
  }
  return defect;
}

LanczosDecomposition lanczos(const DiscreteOperator& op, const GridFunction& g, index_t k) {
  const index_t n = op.grid.size;
  if (static_cast<index_t>(g.values.size()) != n)
    throw ConfigError("vector size does not match the operator");
  if (k < 1 || k > n) throw ConfigError("Lanczos subspace dimension must be in [1, N]");
  const double gn = kernels::norm2(g.values);
  if (gn == 0.0) throw ConfigError("Lanczos requires a nonzero start vector");

  LanczosDecomposition dec;
  dec.grid = op.grid;
  dec.n = n;
  dec.g_norm = gn;
  dec.basis.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::min(k, n)));
  dec.next.resize(static_cast<std::size_t>(n));
  for (index_t i = 0; i < n; ++i)
    dec.next[static_cast<std::size_t>(i)] = g.values[static_cast<std::size_t>(i)] / gn;
  lanczos_extend(op, dec, k);
  return dec;
}

void lanczos_extend(const DiscreteOperator& op, LanczosDecomposition& dec, index_t k_new) {
  if (k_new > dec.n) k_new = dec.n;
  while (dec.k < k_new && !dec.invariant) step(op, dec);
}

GridFunction expmv_lanczos(const LanczosDecomposition& dec, double T) {
  if (T < 0.0) throw ConfigError("expmv requires T >= 0");
  return assemble_result(dec, small_expm_e1(dec, T));
}

double hochbruck_lubich_bound(double rho_T, index_t k, double g_norm) {
  if (!(rho_T > 0.0) || k < 1) throw ConfigError("hochbruck_lubich_bound needs rho > 0, k >= 1");
  const double kk = static_cast<double>(k);
  double bound = std::numeric_limits<double>::infinity();
  if (kk >= std::sqrt(rho_T) && kk <= rho_T / 2.0)
    bound = std::min(bound, 10.0 * g_norm * std::exp(-4.0 * kk * kk / (5.0 * rho_T)));
  if (kk >= rho_T / 2.0) {
    const double log_term = kk * (1.0 + std::log(rho_T / (4.0 * kk))) - rho_T / 4.0;
    bound = std::min(bound, 40.0 * g_norm / rho_T * std::exp(log_term));
  }
  return bound;
}

index_t choose_k(double h, double T, double c_d, index_t n_max) {
  if (!(h > 0.0) || !(T > 0.0) || !(c_d > 0.0))
    throw ConfigError("choose_k needs positive h, T, c_d");
  const double k = std::ceil(std::sqrt(c_d) * T / (2.0 * h));
  index_t ki = k > 1.0 ? static_cast<index_t>(k) : 2;
  if (ki < 2) ki = 2;
  if (ki > n_max) ki = n_max;
  return ki;
}

GridFunction expmv_lanczos_adaptive(const DiscreteOperator& op, const GridFunction& g, double T,
                                    double tol, index_t k_start, index_t k_max,
                                    ExpmvDiagnostics* diag) {
  if (T < 0.0) throw ConfigError("expmv requires T >= 0");
  const index_t n = op.grid.size;
  if (k_max > n) k_max = n;
  if (k_start < 2) k_start = 2;
  if (k_start > k_max) k_start = k_max;

  LanczosDecomposition dec = lanczos(op, g, k_start);
  GridFunction prev = expmv_lanczos(dec, T);
  bool converged = dec.invariant || dec.k >= n;
  while (!converged) {
    index_t k_next = dec.k + std::max<index_t>(8, dec.k / 2);
    if (k_next > k_max) k_next = k_max;
    if (k_next == dec.k) break;
    lanczos_extend(op, dec, k_next);
    GridFunction cur = expmv_lanczos(dec, T);
    double diff2 = 0.0;
    for (std::size_t i = 0; i < cur.values.size(); ++i) {
      const double dv = cur.values[i] - prev.values[i];
      diff2 += dv * dv;
    }
    prev = std::move(cur);
    if (std::sqrt(diff2) <= tol * dec.g_norm || dec.invariant || dec.k >= n) {
      converged = true;
    } else if (dec.k >= k_max) {
      break;
    }
  }
  if (diag) {
    diag->k_used = dec.k;
    diag->invariant = dec.invariant;
    diag->converged = converged;
    diag->g_norm = dec.g_norm;
    diag->bound = 0.0;
  }
  return prev;
}

}  // namespace reshom
