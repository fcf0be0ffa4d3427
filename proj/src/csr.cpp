#include "reshom/csr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "reshom/kernels.hpp"

namespace reshom {

void CsrMatrix::finalize() {
  diagonal.assign(static_cast<std::size_t>(rows), 0.0);
  for (index_t r = 0; r < rows; ++r)
    for (index_t p = rowptr[static_cast<std::size_t>(r)]; p < rowptr[static_cast<std::size_t>(r) + 1]; ++p)
      if (colind[static_cast<std::size_t>(p)] == r)
        diagonal[static_cast<std::size_t>(r)] = values[static_cast<std::size_t>(p)];
}

void CsrMatrix::multiply(const double* x, double* y) const {
  kernels::csr_matvec(rows, rowptr.data(), colind.data(), values.data(), x, y);
}

double CsrMatrix::at(index_t r, index_t c) const {
  const auto lo = colind.begin() + static_cast<std::ptrdiff_t>(rowptr[static_cast<std::size_t>(r)]);
  const auto hi = colind.begin() + static_cast<std::ptrdiff_t>(rowptr[static_cast<std::size_t>(r) + 1]);
  const auto it = std::lower_bound(lo, hi, c);
  if (it == hi || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - colind.begin())];
}

double CsrMatrix::symmetry_defect() const {
  double defect = 0.0;
  for (index_t r = 0; r < rows; ++r)
    for (index_t p = rowptr[static_cast<std::size_t>(r)]; p < rowptr[static_cast<std::size_t>(r) + 1]; ++p) {
      const index_t c = colind[static_cast<std::size_t>(p)];
      defect = std::max(defect, std::fabs(values[static_cast<std::size_t>(p)] - at(c, r)));
    }
  return defect;
}

void write_matrix_market(const CsrMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows << ' ' << a.rows << ' ' << a.nnz() << '\n';
  char buf[64];
  for (index_t r = 0; r < a.rows; ++r) {
    for (index_t p = a.rowptr[static_cast<std::size_t>(r)]; p < a.rowptr[static_cast<std::size_t>(r) + 1]; ++p) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), a.values[static_cast<std::size_t>(p)],
                                     std::chars_format::general, 17);
      os << (r + 1) << ' ' << (a.colind[static_cast<std::size_t>(p)] + 1) << ' ';
      os.write(buf, ptr - buf);
      os << '\n';
    }
  }
}

}  // namespace reshom
