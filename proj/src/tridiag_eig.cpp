#include "reshom/tridiag_eig.hpp"

#include <cmath>
#include <cstddef>

#include "reshom/errors.hpp"

namespace reshom {

// Symmetric tridiagonal QL with implicit Wilkinson shifts, derived from the
// Algol procedure tql2 (Bowdler, Martin, Reinsch, Wilkinson; Handbook for
// Automatic Computation, Vol. II) via its EISPACK/JAMA descendants.
void tridiag_eigh(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                  index_t n) {
  if (n == 0) return;
  const std::size_t nn = static_cast<std::size_t>(n);
  e.resize(nn);
  e[nn - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < nn; ++l) {
    tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
    std::size_t m = l;
    while (m < nn && std::fabs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 80) throw SolveError("tridiagonal QL failed to converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < nn; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < nn; ++k) {
            h = z[k * nn + i + 1];
            z[k * nn + i + 1] = s * z[k * nn + i] + c * h;
            z[k * nn + i] = c * z[k * nn + i] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::fabs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  // Ascending order, carrying the eigenvector columns along.
  for (std::size_t i = 0; i + 1 < nn; ++i) {
    std::size_t k = i;
    double p = d[i];
    for (std::size_t j = i + 1; j < nn; ++j)
      if (d[j] < p) {
        k = j;
        p = d[j];
      }
    if (k != i) {
      d[k] = d[i];
      d[i] = p;
      for (std::size_t j = 0; j < nn; ++j) std::swap(z[j * nn + i], z[j * nn + k]);
    }
  }
}

// Householder reduction to tridiagonal form with accumulated transformations
// (tred2 from the same lineage). v is row-major n x n; on return it holds the
// orthogonal reduction matrix.
static void tred2(std::vector<double>& v, std::vector<double>& d, std::vector<double>& e,
                  std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) d[j] = v[(n - 1) * n + j];

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::fabs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v[(i - 1) * n + j];
        v[i * n + j] = 0.0;
        v[j * n + i] = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double g = std::sqrt(h);
      const double f0 = d[i - 1];
      if (f0 > 0) g = -g;
      e[i] = scale * g;
      h -= f0 * g;
      d[i - 1] = f0 - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        const double fj = d[j];
        v[j * n + i] = fj;
        double gj = e[j] + v[j * n + j] * fj;
        for (std::size_t k = j + 1; k < i; ++k) {
          gj += v[k * n + j] * d[k];
          e[k] += v[k * n + j] * fj;
        }
        e[j] = gj;
      }
      double f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        const double fj = d[j];
        const double gj = e[j];
        for (std::size_t k = j; k < i; ++k) v[k * n + j] -= (fj * e[k] + gj * d[k]);
        d[j] = v[(i - 1) * n + j];
        v[i * n + j] = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v[(n - 1) * n + i] = v[i * n + i];
    v[i * n + i] = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v[k * n + i + 1] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v[k * n + i + 1] * v[k * n + j];
        for (std::size_t k = 0; k <= i; ++k) v[k * n + j] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v[k * n + i + 1] = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v[(n - 1) * n + j];
    v[(n - 1) * n + j] = 0.0;
  }
  v[(n - 1) * n + (n - 1)] = 1.0;
  e[0] = 0.0;
}

void dense_eigh(std::vector<double>& a, std::vector<double>& w, index_t n) {
  const std::size_t nn = static_cast<std::size_t>(n);
  if (a.size() != nn * nn) throw ConfigError("dense_eigh: matrix size mismatch");
  w.assign(nn, 0.0);
  if (n == 0) return;
  if (n == 1) {
    w[0] = a[0];
    a[0] = 1.0;
    return;
  }
  std::vector<double> e(nn, 0.0);
  tred2(a, w, e, nn);
  // tred2 couples rows (i-1, i) through e[i]; shift to the (i, i+1) convention.
  for (std::size_t i = 1; i < nn; ++i) e[i - 1] = e[i];
  e[nn - 1] = 0.0;
  tridiag_eigh(w, e, a, n);
}

}  // namespace reshom
