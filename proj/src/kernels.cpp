#include "reshom/kernels.hpp"

#include <cmath>
#include <vector>

namespace reshom::kernels {

namespace {

inline double chunk_dot(const double* x, const double* y, index_t lo, index_t hi) {
  double s = 0.0;
  for (index_t i = lo; i < hi; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

void csr_matvec(index_t rows, const index_t* rowptr, const index_t* colind,
                const double* values, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (index_t p = rowptr[r]; p < rowptr[r + 1]; ++p) s += values[p] * x[colind[p]];
    y[r] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  const index_t n = static_cast<index_t>(x.size());
  const index_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static)
  for (index_t c = 0; c < nchunks; ++c) {
    const index_t lo = c * kChunk;
    partial[static_cast<std::size_t>(c)] =
        chunk_dot(x.data(), y.data(), lo, std::min(lo + kChunk, n));
  }
  double s = 0.0;
  for (double p : partial) s += p;  // fixed order: thread-count independent
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const index_t n = static_cast<index_t>(x.size());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y) {
  const index_t n = static_cast<index_t>(x.size());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void scale(double a, std::span<double> x) {
  const index_t n = static_cast<index_t>(x.size());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) x[i] *= a;
}

namespace serial {

void csr_matvec(index_t rows, const index_t* rowptr, const index_t* colind,
                const double* values, const double* x, double* y) {
  for (index_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (index_t p = rowptr[r]; p < rowptr[r + 1]; ++p) s += values[p] * x[colind[p]];
    y[r] = s;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  const index_t n = static_cast<index_t>(x.size());
  double s = 0.0;
  for (index_t lo = 0; lo < n; lo += kChunk) s += chunk_dot(x.data(), y.data(), lo, std::min(lo + kChunk, n));
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void xpby(std::span<const double> x, double b, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + b * y[i];
}

void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

}  // namespace serial

}  // namespace reshom::kernels
