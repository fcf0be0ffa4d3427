#pragma once

#include <array>
#include <string>

#include "reshom/cell.hpp"
#include "reshom/coefficient.hpp"
#include "reshom/filter.hpp"

namespace reshom {

/// d x d effective tensor with the provenance of the run that produced it.
struct HomogenizedTensor {
  int dim = 0;
  std::array<double, 9> entries{};  // row-major

  struct Meta {
    double R = 0.0, L = 0.0, T = 0.0;
    int q = 0;  // filter order, -1 for the infinite-order filter
    std::string method;
    double h = 0.0;
    std::vector<double> residuals;  // per direction
    index_t k = 0;                  // Lanczos columns (max over directions)
    index_t n_modes = 0;
    index_t n_steps = 0;
    double bound = 0.0;
    index_t cg_iterations = 0;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
    double symmetry_defect = 0.0;
  } meta;

  double at(int i, int j) const { return entries[static_cast<std::size_t>(i * dim + j)]; }
  double& at(int i, int j) { return entries[static_cast<std::size_t>(i * dim + j)]; }
};

struct HomogenizeOptions {
  double R = 4.0;
  double L = 2.0;
  double T = 1.0;
  int n_per_unit = 16;
  CorrectionMethod method = CorrectionMethod::Lanczos;
  CellParams cell;
  int filter_q = 0;  // -1: infinite-order
};

/// Assembles a^0_{T,R,L}: per direction j, builds g^j, applies the selected
/// correction, solves the cell problem, and filter-averages the flux
/// integrand a_ij + a_ii d_i chi^j over K_L. Directions run concurrently
/// when RESHOM_THREADS allows.
HomogenizedTensor homogenize(const CoefficientField& field, const HomogenizeOptions& opts);

/// Spectrally truncated variant; records the a-priori truncation bound
/// (R/L)^{d/2} R exp(-c_d N^{2/d} T / R^2) with the estimated c_d.
HomogenizedTensor truncated_homogenize(const CoefficientField& field,
                                       const HomogenizeOptions& opts, index_t n_modes);

/// Exact periodic reference: unfiltered cell average of the flux integrand
/// with the periodic corrector, on an n_per_unit_ref unit-cell grid.
HomogenizedTensor exact_reference(const CoefficientField& field, int n_per_unit_ref,
                                  double cg_tol = 1e-10);

/// Second-order Richardson extrapolation of two references computed at
/// n and 2n points per unit.
HomogenizedTensor richardson_combine(const HomogenizedTensor& coarse,
                                     const HomogenizedTensor& fine);

struct SelectedParameters {
  double L = 0.0;
  double T = 0.0;
};

/// L = k_o R rounded down to a grid-commensurate value, T = sqrt(c2/c1)
/// (1 - k_o) R; enforces the hypothesis T < 2 c2 |R-L|^2 / d.
SelectedParameters select_parameters(double R, double k_o, double c1, double c2, int dim,
                                     int n_per_unit);

double frobenius_error(const HomogenizedTensor& a, const HomogenizedTensor& b);

}  // namespace reshom
