#pragma once

#include <vector>

#include "reshom/grid.hpp"

namespace reshom {

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal d
/// (n entries) and subdiagonal e (n-1 entries, e[i] couples rows i and i+1).
/// Implicit QL with Wilkinson shifts (the classic Handbook/EISPACK tql2).
/// On return d holds the eigenvalues in ascending order and the columns of
/// the row-major n x n matrix z hold the eigenvectors. z must be initialized
/// to the identity (or to an orthogonal matrix to accumulate onto).
void tridiag_eigh(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                  index_t n);

/// Full eigendecomposition of a dense symmetric matrix: Householder
/// tridiagonalization (tred2) followed by tridiag_eigh. `a` is row-major
/// n x n; on return its columns are the eigenvectors and w the ascending
/// eigenvalues.
void dense_eigh(std::vector<double>& a, std::vector<double>& w, index_t n);

}  // namespace reshom
