#pragma once

#include <cstddef>
#include <span>

#include "reshom/grid.hpp"

namespace reshom::kernels {

// Data-parallel vector and sparse-matrix kernels. The parallel versions use
// OpenMP; reductions are chunked in a fixed order so results are bitwise
// identical for any thread count, and bitwise identical to the serial
// reference implementations in kernels::serial.

inline constexpr index_t kChunk = 4096;

void csr_matvec(index_t rows, const index_t* rowptr, const index_t* colind,
                const double* values, const double* x, double* y);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += a*x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// y = x + b*y
void xpby(std::span<const double> x, double b, std::span<double> y);
void scale(double a, std::span<double> x);

namespace serial {
void csr_matvec(index_t rows, const index_t* rowptr, const index_t* colind,
                const double* values, const double* x, double* y);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double b, std::span<double> y);
void scale(double a, std::span<double> x);
}  // namespace serial

}  // namespace reshom::kernels
