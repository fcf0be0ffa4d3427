#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "reshom/expression.hpp"

namespace reshom {

enum class FieldKind { Scalar, Diagonal, Sampled };

/// Oscillatory diagonal coefficient tensor a(x) on the unit cell, with
/// ellipticity bounds 0 < alpha <= a_kk(x) <= beta. Immutable once built.
class CoefficientField {
public:
  /// Scalar field a(x) = e(x) * I.
  static CoefficientField scalar(int dim, Expression e, bool periodic);
  /// Diagonal field a(x) = diag(e_1(x), ..., e_d(x)).
  static CoefficientField diagonal(std::vector<Expression> entries, bool periodic);
  /// Grid-aligned samples of the d diagonal entries on the half-step lattice
  /// {m / res : m integer}^d of the unit cell (res samples per unit length).
  /// Evaluation off the lattice is an error; no interpolation is performed.
  static CoefficientField sampled(int dim, int res,
                                  std::vector<std::vector<double>> diag_values);

  /// Builds one of the named families: "constant" {c, dim?}, "sine1d"
  /// {c0, c1}, "layered2d" {c0, c1}, "checker-smooth" {c0, c1}.
  static CoefficientField family(const std::string& name,
                                 const std::map<std::string, double>& params);

  /// Diagonal entry a_kk at x (k is 0-based).
  double entry(int k, std::span<const double> x) const;

  int dim() const { return dim_; }
  FieldKind kind() const { return kind_; }
  bool periodic() const { return periodic_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::vector<Expression>& expressions() const { return exprs_; }

  /// Copy with explicit ellipticity bounds (bounds are metadata only).
  CoefficientField with_bounds(double alpha, double beta) const;

private:
  CoefficientField() = default;

  int dim_ = 1;
  FieldKind kind_ = FieldKind::Scalar;
  bool periodic_ = true;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<Expression> exprs_;            // 1 (scalar) or d (diagonal)
  int sample_res_ = 0;                       // half-step lattice resolution
  std::vector<std::vector<double>> samples_; // d arrays of res^d values
};

/// Min/max of the diagonal entries over a tensor-product sampling of the
/// unit cell with samples_per_dim points per axis. Throws ConfigError if the
/// sampled minimum is not positive (ellipticity violation).
std::pair<double, double> estimate_bounds(const CoefficientField& field,
                                          int samples_per_dim);

/// Max of |a_kk(x) - a_kk(x + e_i)| over n_samples random points, all axes
/// and all diagonal entries. Zero (to rounding) for periodic fields.
double periodicity_defect(const CoefficientField& field, int n_samples,
                          unsigned long long seed);

/// Samples an analytic field onto the half-step lattice with res points per
/// unit length (res must be even so both nodes and face centers are hit).
CoefficientField sample_field(const CoefficientField& field, int res);

}  // namespace reshom
