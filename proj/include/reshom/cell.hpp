#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "reshom/assemble.hpp"
#include "reshom/grid.hpp"

namespace reshom {

enum class CorrectionMethod { Lanczos, Spectral, Parabolic, None };

enum class LinearSolverKind { Auto, Cg, Direct };

struct CellParams {
  double cg_tol = 1e-10;
  LinearSolverKind solver = LinearSolverKind::Auto;
  // Lanczos correction
  std::optional<index_t> k;    // fixed subspace size (no adaptation)
  std::optional<double> c_d;   // spectral-radius constant override for choose_k
  double expmv_tol = 1e-9;
  index_t k_max = 600;
  // Spectral correction
  std::optional<index_t> n_modes;  // default: all N modes
  // Parabolic route
  index_t n_steps = 256;
  std::uint64_t seed = 0;
};

struct CorrectionInfo {
  std::string method;
  double g_norm = 0.0;
  index_t k = 0;            // Lanczos columns used
  index_t n_modes = 0;      // spectral modes used
  index_t n_steps = 0;      // parabolic steps
  double rho_estimate = 0.0;
  double bound = 0.0;       // a-priori bound on the correction error
  bool expmv_converged = true;
  index_t cg_iterations = 0;  // all inner and outer CG iterations
};

/// Solution of a cell problem on K_R with homogeneous Dirichlet boundary.
struct CellSolution {
  GridFunction chi;
  int direction = 0;  // 0-based axis j
  std::vector<GridFunction> gradient;
  double residual_norm = 0.0;  // ||A chi - rhs|| / ||rhs||
  CorrectionInfo info;
};

/// Mean-zero solution of the periodic cell problem on the unit cell.
struct PeriodicCellSolution {
  PeriodicGrid grid;
  std::vector<double> chi;
  int direction = 0;
  std::vector<std::vector<double>> gradient;
  double residual_norm = 0.0;
  index_t cg_iterations = 0;
};

/// Solves -div(a grad chi) = g - e^{-TA} g with the requested correction
/// method, then conjugate gradients (Jacobi preconditioned; direct
/// tridiagonal solve in 1-d under Auto). Zero right-hand sides short-circuit
/// to chi = 0.
CellSolution solve_modified_cell(const DiscreteOperator& op, const GridFunction& g, double T,
                                 CorrectionMethod method, const CellParams& params = {},
                                 int direction = 0);

/// Uncorrected Dirichlet baseline A chi = g (the T -> infinity limit).
CellSolution solve_dirichlet_cell(const DiscreteOperator& op, const GridFunction& g,
                                  const CellParams& params = {}, int direction = 0);

/// Crank-Nicolson integration of du/dt + A u = 0 from u(0) = g with
/// dt = T/n_steps; chi accumulates the trapezoid-in-time integral, which
/// satisfies A chi = g - u(T) exactly up to the inner solver tolerance.
CellSolution parabolic_integral(const DiscreteOperator& op, const GridFunction& g, double T,
                                index_t n_steps, const CellParams& params = {},
                                int direction = 0);

/// Periodic cell problem -div(a grad chi) = div(a e_j) on the unit cell;
/// the singular consistent system is solved by CG restricted to the
/// mean-zero subspace.
PeriodicCellSolution solve_periodic_reference(const CoefficientField& field, int n_per_unit,
                                              int axis, double cg_tol = 1e-10);

/// Centered differences with zero ghost values outside K_R.
std::vector<GridFunction> gradient(const GridFunction& chi);

/// Centered differences with periodic wrap on the unit cell.
std::vector<std::vector<double>> periodic_gradient(const PeriodicGrid& grid,
                                                   const std::vector<double>& chi);

/// sqrt(h^d sum v_i^2), the trapezoid L2 norm for functions vanishing on
/// (or periodic across) the boundary.
double l2_norm(const GridFunction& f);
double l2_norm(const PeriodicGrid& grid, const std::vector<double>& v);

}  // namespace reshom
