#pragma once

#include <iosfwd>
#include <vector>

#include "reshom/grid.hpp"

namespace reshom {

/// Compressed-sparse-row matrix with columns sorted within each row and a
/// cached diagonal. Immutable after finalize().
struct CsrMatrix {
  index_t rows = 0;
  std::vector<index_t> rowptr;   // rows + 1
  std::vector<index_t> colind;   // nnz
  std::vector<double> values;    // nnz
  std::vector<double> diagonal;  // rows (0 where structurally absent)

  index_t nnz() const { return static_cast<index_t>(colind.size()); }

  /// Populates the diagonal cache; call once after assembly.
  void finalize();

  /// y = A x (OpenMP kernel).
  void multiply(const double* x, double* y) const;

  /// Entry (r, c), 0 if not stored.
  double at(index_t r, index_t c) const;

  /// Max |A - A^T| over all entries; 0 means bitwise symmetric.
  double symmetry_defect() const;
};

/// Writes Matrix Market coordinate format (general, real), entries sorted by
/// row then column, 1-based indices, 17 significant digits.
void write_matrix_market(const CsrMatrix& a, std::ostream& os);

}  // namespace reshom
