#include "reshom/cell.hpp"

#include <array>
#include <cmath>
#include <memory>

#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"
#include "reshom/lanczos.hpp"
#include "reshom/solvers.hpp"
#include "reshom/spectral.hpp"

namespace reshom {

namespace {

struct SolveStats {
  index_t iterations = 0;
  double residual = 0.0;
};

bool use_direct(const DiscreteOperator& op, LinearSolverKind kind) {
  if (kind == LinearSolverKind::Cg) return false;
  if (kind == LinearSolverKind::Direct) {
    if (op.grid.dim != 1) throw ConfigError("direct solver is only available in 1-d");
    return true;
  }
  return op.grid.dim == 1 && op.grid.size <= 50000;
}

SolveStats linear_solve(const DiscreteOperator& op, std::span<const double> b,
                        std::vector<double>& x, const CellParams& params) {
  if (use_direct(op, params.solver)) {
    TridiagonalFactor factor(op.matrix);
    factor.solve(b, x);
    std::vector<double> r(b.size());
    op.matrix.multiply(x.data(), r.data());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double bn = kernels::norm2(b);
    return {0, bn > 0.0 ? kernels::norm2(r) / bn : 0.0};
  }
  CgOptions opts;
  opts.tol = params.cg_tol;
  const CgResult res = cg_solve(op.matrix, b, x, opts);
  return {res.iterations, res.residual};
}

CellSolution finish(const DiscreteOperator& op, GridFunction chi, int direction,
                    double residual, CorrectionInfo info) {
  CellSolution sol;
  sol.chi = std::move(chi);
  sol.direction = direction;
  sol.gradient = gradient(sol.chi);
  sol.residual_norm = residual;
  sol.info = std::move(info);
  (void)op;
  return sol;
}

CellSolution zero_solution(const DiscreteOperator& op, int direction, CorrectionInfo info) {
  return finish(op, GridFunction(op.grid), direction, 0.0, std::move(info));
}

}  // namespace

CellSolution solve_modified_cell(const DiscreteOperator& op, const GridFunction& g, double T,
                                 CorrectionMethod method, const CellParams& params,
                                 int direction) {
  if (T < 0.0) throw ConfigError("cell problem requires T >= 0");
  if (method == CorrectionMethod::Parabolic)
    return parabolic_integral(op, g, T, params.n_steps, params, direction);
  if (method == CorrectionMethod::None) return solve_dirichlet_cell(op, g, params, direction);

  CorrectionInfo info;
  info.method = method == CorrectionMethod::Lanczos ? "lanczos" : "spectral";
  info.g_norm = kernels::norm2(g.values);
  if (info.g_norm == 0.0 || T == 0.0) return zero_solution(op, direction, std::move(info));

  GridFunction correction;
  if (method == CorrectionMethod::Lanczos) {
    // The h^2-scaled spectral-radius constant drives the subspace size; the
    // power-iteration estimate sits slightly below rho, so pad it.
    const double rho_est = spectral_radius(op, 0.01) * 1.03;
    info.rho_estimate = rho_est;
    const double c_d = params.c_d ? *params.c_d : rho_est * op.grid.h * op.grid.h;
    if (params.k) {
      LanczosDecomposition dec = lanczos(op, g, *params.k);
      correction = expmv_lanczos(dec, T);
      info.k = dec.k;
      info.expmv_converged = true;
    } else {
      const index_t k0 = choose_k(op.grid.h, T, c_d, op.grid.size);
      ExpmvDiagnostics diag;
      correction = expmv_lanczos_adaptive(op, g, T, params.expmv_tol, k0,
                                          std::max(params.k_max, k0), &diag);
      info.k = diag.k_used;
      info.expmv_converged = diag.converged;
    }
    info.bound = hochbruck_lubich_bound(rho_est * T, info.k, info.g_norm);
  } else {
    const index_t n_modes = params.n_modes ? *params.n_modes : op.grid.size;
    const SpectralTruncation trunc = partial_eigendecomposition(op, n_modes, &g, params.seed);
    correction = expmv_spectral(trunc, T);
    info.n_modes = n_modes;
    info.bound = n_modes > 0 ? std::exp(-trunc.eigenvalues.back() * T) * info.g_norm
                             : info.g_norm;
  }

  std::vector<double> rhs(g.values);
  kernels::axpy(-1.0, correction.values, std::span<double>(rhs));
  if (kernels::norm2(rhs) == 0.0) return zero_solution(op, direction, std::move(info));

  GridFunction chi(op.grid);
  const SolveStats stats = linear_solve(op, rhs, chi.values, params);
  info.cg_iterations = stats.iterations;
  return finish(op, std::move(chi), direction, stats.residual, std::move(info));
}

CellSolution solve_dirichlet_cell(const DiscreteOperator& op, const GridFunction& g,
                                  const CellParams& params, int direction) {
  CorrectionInfo info;
  info.method = "none-correction";
  info.g_norm = kernels::norm2(g.values);
  if (info.g_norm == 0.0) return zero_solution(op, direction, std::move(info));
  GridFunction chi(op.grid);
  const SolveStats stats = linear_solve(op, g.values, chi.values, params);
  info.cg_iterations = stats.iterations;
  return finish(op, std::move(chi), direction, stats.residual, std::move(info));
}

CellSolution parabolic_integral(const DiscreteOperator& op, const GridFunction& g, double T,
                                index_t n_steps, const CellParams& params, int direction) {
  if (T < 0.0) throw ConfigError("parabolic integration requires T >= 0");
  if (n_steps < 2) throw ConfigError("parabolic integration needs n_steps >= 2");
  CorrectionInfo info;
  info.method = "parabolic-integral";
  info.n_steps = n_steps;
  info.g_norm = kernels::norm2(g.values);
  if (info.g_norm == 0.0 || T == 0.0) return zero_solution(op, direction, std::move(info));

  const double dt = T / static_cast<double>(n_steps);
  const CsrMatrix b_mat = shifted_matrix(op.matrix, 0.5 * dt, 1.0);  // I + dt/2 A
  const bool direct = use_direct(op, params.solver);
  std::unique_ptr<TridiagonalFactor> factor;
  if (direct) factor = std::make_unique<TridiagonalFactor>(b_mat);

  const std::size_t n = g.values.size();
  std::vector<double> u = g.values, rhs(n), u_next(n);
  GridFunction chi(op.grid);
  index_t total_iters = 0;
  for (index_t s = 0; s < n_steps; ++s) {
    // rhs = (I - dt/2 A) u
    op.matrix.multiply(u.data(), rhs.data());
    for (std::size_t i = 0; i < n; ++i) rhs[i] = u[i] - 0.5 * dt * rhs[i];
    if (direct) {
      factor->solve(rhs, u_next);
    } else {
      CgOptions opts;
      opts.tol = 1e-12;
      opts.start = &u;  // warm start
      const CgResult res = cg_solve(b_mat, rhs, u_next, opts);
      total_iters += res.iterations;
    }
    for (std::size_t i = 0; i < n; ++i)
      chi.values[i] += 0.5 * dt * (u[i] + u_next[i]);
    std::swap(u, u_next);
  }

  // A chi = g - u(T) holds exactly for the Crank-Nicolson trapezoid sum.
  std::vector<double> rhs_eff(n), r(n);
  for (std::size_t i = 0; i < n; ++i) rhs_eff[i] = g.values[i] - u[i];
  op.matrix.multiply(chi.data(), r.data());
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs_eff[i] - r[i];
  const double rhs_norm = kernels::norm2(rhs_eff);
  const double residual = rhs_norm > 0.0 ? kernels::norm2(r) / rhs_norm : 0.0;
  info.cg_iterations = total_iters;
  return finish(op, std::move(chi), direction, residual, std::move(info));
}

PeriodicCellSolution solve_periodic_reference(const CoefficientField& field, int n_per_unit,
                                              int axis, double cg_tol) {
  if (!field.periodic()) throw ConfigError("periodic reference requires a periodic field");
  const PeriodicOperator op = assemble_periodic_operator(field, n_per_unit);
  std::vector<double> g = assemble_periodic_source(field, n_per_unit, axis);

  double mean = 0.0, amax = 0.0;
  for (double v : g) {
    mean += v;
    amax = std::max(amax, std::fabs(v));
  }
  mean /= static_cast<double>(g.size());
  if (amax > 0.0 && std::fabs(mean) > 1e-10 * amax)
    throw SolveError("periodic source is not mean-zero; assembly is inconsistent");

  PeriodicCellSolution sol;
  sol.grid = op.grid;
  sol.direction = axis;
  if (kernels::norm2(g) == 0.0) {
    sol.chi.assign(g.size(), 0.0);
  } else {
    CgOptions opts;
    opts.tol = cg_tol;
    opts.project_mean_zero = true;
    const CgResult res = cg_solve(op.matrix, g, sol.chi, opts);
    sol.residual_norm = res.residual;
    sol.cg_iterations = res.iterations;
  }
  sol.gradient = periodic_gradient(op.grid, sol.chi);
  return sol;
}

std::vector<GridFunction> gradient(const GridFunction& chi) {
  const Grid& grid = chi.grid;
  const int d = grid.dim;
  const index_t m = grid.m;
  const double inv_2h = 1.0 / (2.0 * grid.h);
  std::vector<GridFunction> out(static_cast<std::size_t>(d), GridFunction(grid));
  for (int axis = 0; axis < d; ++axis) {
    index_t stride = 1;
    for (int k = 0; k < axis; ++k) stride *= m;
    double* gv = out[static_cast<std::size_t>(axis)].data();
    const double* cv = chi.data();
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < grid.size; ++r) {
      const index_t i = (r / stride) % m + 1;
      const double up = i < m ? cv[r + stride] : 0.0;  // Dirichlet ghost
      const double dn = i > 1 ? cv[r - stride] : 0.0;
      gv[r] = (up - dn) * inv_2h;
    }
  }
  return out;
}

std::vector<std::vector<double>> periodic_gradient(const PeriodicGrid& grid,
                                                   const std::vector<double>& chi) {
  const int d = grid.dim;
  const index_t n = grid.n;
  const double inv_2h = 1.0 / (2.0 * grid.h);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(d),
                                       std::vector<double>(chi.size()));
  for (int axis = 0; axis < d; ++axis) {
    index_t stride = 1;
    for (int k = 0; k < axis; ++k) stride *= n;
    double* gv = out[static_cast<std::size_t>(axis)].data();
    const double* cv = chi.data();
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < grid.size; ++r) {
      const index_t i = (r / stride) % n;
      const index_t up = r + ((i + 1) % n - i) * stride;
      const index_t dn = r + ((i + n - 1) % n - i) * stride;
      gv[r] = (cv[up] - cv[dn]) * inv_2h;
    }
  }
  return out;
}

double l2_norm(const GridFunction& f) {
  return std::pow(f.grid.h, 0.5 * f.grid.dim) * kernels::norm2(f.values);
}

double l2_norm(const PeriodicGrid& grid, const std::vector<double>& v) {
  return std::pow(grid.h, 0.5 * grid.dim) * kernels::norm2(v);
}

}  // namespace reshom
