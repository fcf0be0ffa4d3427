// Compares the OpenMP kernels against the serial reference implementations
// on assembled 2-d operators and verifies the results agree bitwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "reshom/assemble.hpp"
#include "reshom/coefficient.hpp"
#include "reshom/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace reshom;

namespace {

double seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <class F>
double time_loop(int reps, F&& body) {
  body();  // warm up
  const double t0 = seconds();
  for (int r = 0; r < reps; ++r) body();
  return (seconds() - t0) / reps;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

void bench_size(int n_per_unit, double R, int reps) {
  const CoefficientField field = CoefficientField::family("checker-smooth", {{"c0", 2.0}, {"c1", 1.0}});
  const Grid grid = Grid::make(2, R, n_per_unit);
  const DiscreteOperator op = assemble_operator(field, grid);
  const CsrMatrix& a = op.matrix;
  const std::size_t n = static_cast<std::size_t>(grid.size);

  std::vector<double> x(n), y_par(n), y_ser(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.37 * static_cast<double>(i) + 1.0);

  const double t_mv_par = time_loop(reps, [&] {
    kernels::csr_matvec(a.rows, a.rowptr.data(), a.colind.data(), a.values.data(), x.data(),
                        y_par.data());
  });
  const double t_mv_ser = time_loop(reps, [&] {
    kernels::serial::csr_matvec(a.rows, a.rowptr.data(), a.colind.data(), a.values.data(),
                                x.data(), y_ser.data());
  });
  const bool mv_same = bitwise_equal(y_par, y_ser);

  double dot_par = 0.0, dot_ser = 0.0;
  const double t_dot_par = time_loop(reps, [&] { dot_par = kernels::dot(x, y_par); });
  const double t_dot_ser = time_loop(reps, [&] { dot_ser = kernels::serial::dot(x, y_ser); });

  std::vector<double> z_par(x), z_ser(x);
  const double t_axpy_par = time_loop(reps, [&] { kernels::axpy(0.5, y_par, z_par); });
  const double t_axpy_ser = time_loop(reps, [&] { kernels::serial::axpy(0.5, y_ser, z_ser); });

  std::printf("N=%-8lld matvec %8.3f / %8.3f us (x%.2f, %s)  dot %7.3f / %7.3f us (x%.2f, %s)  axpy %7.3f / %7.3f us (x%.2f, %s)\n",
              static_cast<long long>(grid.size), 1e6 * t_mv_par, 1e6 * t_mv_ser,
              t_mv_ser / t_mv_par, mv_same ? "bitwise" : "MISMATCH", 1e6 * t_dot_par,
              1e6 * t_dot_ser, t_dot_ser / t_dot_par, dot_par == dot_ser ? "bitwise" : "MISMATCH",
              1e6 * t_axpy_par, 1e6 * t_axpy_ser, t_axpy_ser / t_axpy_par,
              bitwise_equal(z_par, z_ser) ? "bitwise" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d (parallel / serial timings)\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP (parallel / serial timings)\n");
#endif
  bench_size(16, 4.0, 200);
  bench_size(32, 8.0, 50);
  bench_size(32, 16.0, 20);
  return 0;
}
