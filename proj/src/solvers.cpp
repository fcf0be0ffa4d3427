#include "reshom/solvers.hpp"

#include <cmath>

#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"

namespace reshom {

double remove_mean(std::span<double> v) {
  double mean = 0.0;
  for (index_t lo = 0; lo < static_cast<index_t>(v.size()); lo += kernels::kChunk) {
    double s = 0.0;
    const index_t hi = std::min<index_t>(lo + kernels::kChunk, static_cast<index_t>(v.size()));
    for (index_t i = lo; i < hi; ++i) s += v[static_cast<std::size_t>(i)];
    mean += s;
  }
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  return mean;
}

CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x,
                  const CgOptions& opts) {
  const index_t n = a.rows;
  if (static_cast<index_t>(b.size()) != n) throw ConfigError("rhs size does not match the matrix");
  const double b_norm = kernels::norm2(b);
  if (opts.start) {
    if (static_cast<index_t>(opts.start->size()) != n)
      throw ConfigError("start vector size does not match the matrix");
    x = *opts.start;
  } else {
    x.assign(static_cast<std::size_t>(n), 0.0);
  }
  if (b_norm == 0.0) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    return {0, 0.0};
  }

  const index_t cap = opts.max_iter > 0
                          ? opts.max_iter
                          : static_cast<index_t>(20.0 * std::sqrt(static_cast<double>(n))) + 500;

  std::vector<double> r(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n)),
      p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));

  auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (opts.jacobi) {
      const index_t len = n;
#pragma omp parallel for schedule(static)
      for (index_t i = 0; i < len; ++i) {
        const double d = a.diagonal[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = d != 0.0 ? in[static_cast<std::size_t>(i)] / d
                                                    : in[static_cast<std::size_t>(i)];
      }
    } else {
      out = in;
    }
  };

  // r = b - A x
  a.multiply(x.data(), r.data());
  for (index_t i = 0; i < n; ++i)
    r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
  if (opts.project_mean_zero) {
    remove_mean(r);
    remove_mean(x);
  }
  precondition(r, z);
  if (opts.project_mean_zero) remove_mean(z);
  p = z;
  double rz = kernels::dot(r, z);

  index_t it = 0;
  while (it < cap) {
    ++it;
    a.multiply(p.data(), q.data());
    const double pq = kernels::dot(p, q);
    if (pq <= 0.0) throw SolveError("conjugate gradients broke down (non-positive curvature)");
    const double alpha = rz / pq;
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, q, r);
    if (opts.project_mean_zero) remove_mean(r);
    const double r_norm = kernels::norm2(r);
    if (r_norm <= opts.tol * b_norm) {
      // Recurrence may drift; accept only a recomputed true residual.
      a.multiply(x.data(), q.data());
      for (index_t i = 0; i < n; ++i)
        q[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - q[static_cast<std::size_t>(i)];
      if (opts.project_mean_zero) remove_mean(q);
      const double true_norm = kernels::norm2(q);
      if (true_norm <= opts.tol * b_norm) {
        if (opts.project_mean_zero) remove_mean(x);
        return {it, true_norm / b_norm};
      }
      r = q;  // residual replacement, continue iterating
    }
    precondition(r, z);
    if (opts.project_mean_zero) remove_mean(z);
    const double rz_next = kernels::dot(r, z);
    kernels::xpby(z, rz_next / rz, p);
    rz = rz_next;
  }
  throw SolveError("conjugate gradients did not converge within " + std::to_string(cap) +
                   " iterations");
}

TridiagonalFactor::TridiagonalFactor(const CsrMatrix& a) {
  const index_t n = a.rows;
  lower_.assign(static_cast<std::size_t>(n), 0.0);
  diag_.assign(static_cast<std::size_t>(n), 0.0);
  upper_.assign(static_cast<std::size_t>(n), 0.0);
  for (index_t r = 0; r < n; ++r) {
    for (index_t p = a.rowptr[static_cast<std::size_t>(r)]; p < a.rowptr[static_cast<std::size_t>(r) + 1]; ++p) {
      const index_t c = a.colind[static_cast<std::size_t>(p)];
      const double v = a.values[static_cast<std::size_t>(p)];
      if (c == r - 1)
        lower_[static_cast<std::size_t>(r)] = v;
      else if (c == r)
        diag_[static_cast<std::size_t>(r)] = v;
      else if (c == r + 1)
        upper_[static_cast<std::size_t>(r)] = v;
      else if (v != 0.0)
        throw ConfigError("matrix is not tridiagonal");
    }
  }
  // In-place LU (no pivoting; diagonally dominant by construction).
  for (index_t i = 1; i < n; ++i) {
    const double w = lower_[static_cast<std::size_t>(i)] / diag_[static_cast<std::size_t>(i) - 1];
    lower_[static_cast<std::size_t>(i)] = w;
    diag_[static_cast<std::size_t>(i)] -= w * upper_[static_cast<std::size_t>(i) - 1];
  }
}

void TridiagonalFactor::solve(std::span<const double> b, std::vector<double>& x) const {
  const std::size_t n = diag_.size();
  if (b.size() != n) throw ConfigError("rhs size does not match the factor");
  x.assign(n, 0.0);
  x[0] = b[0];
  for (std::size_t i = 1; i < n; ++i) x[i] = b[i] - lower_[i] * x[i - 1];
  x[n - 1] /= diag_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - upper_[i] * x[i + 1]) / diag_[i];
}

CsrMatrix shifted_matrix(const CsrMatrix& a, double scale, double shift_diag) {
  CsrMatrix b = a;
  for (std::size_t p = 0; p < b.values.size(); ++p) b.values[p] *= scale;
  for (index_t r = 0; r < b.rows; ++r)
    for (index_t p = b.rowptr[static_cast<std::size_t>(r)]; p < b.rowptr[static_cast<std::size_t>(r) + 1]; ++p)
      if (b.colind[static_cast<std::size_t>(p)] == r) b.values[static_cast<std::size_t>(p)] += shift_diag;
  b.finalize();
  return b;
}

}  // namespace reshom
