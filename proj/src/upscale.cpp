#include "reshom/upscale.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>

#include "reshom/errors.hpp"
#include "reshom/spectral.hpp"

namespace reshom {

namespace {

int worker_threads() {
  if (const char* env = std::getenv("RESHOM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// a_kk sampled at grid nodes, one array per axis.
std::vector<double> node_coefficients(const CoefficientField& field, const Grid& grid, int axis) {
  std::vector<double> out(static_cast<std::size_t>(grid.size));
  const int d = grid.dim;
#pragma omp parallel for schedule(static)
  for (index_t r = 0; r < grid.size; ++r) {
    std::array<index_t, 3> idx{};
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(d)));
    std::array<double, 3> x{};
    for (int k = 0; k < d; ++k)
      x[static_cast<std::size_t>(k)] = grid.coord(idx[static_cast<std::size_t>(k)]);
    out[static_cast<std::size_t>(r)] =
        field.entry(axis, std::span<const double>(x.data(), static_cast<std::size_t>(d)));
  }
  return out;
}

Filter build_filter(int q) {
  return q < 0 ? make_exponential_filter() : make_polynomial_filter(q);
}

struct DirectionResult {
  CellSolution sol;
  std::array<double, 3> column{};  // entries (i, j) for fixed j
};

}  // namespace

HomogenizedTensor homogenize(const CoefficientField& field, const HomogenizeOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = field.dim();
  if (!(opts.L > 0.0) || !(opts.L < opts.R))
    throw ConfigError("averaging side L must satisfy 0 < L < R");
  if (opts.T < 0.0) throw ConfigError("T must be nonnegative");
  const Grid grid = Grid::make(d, opts.R, opts.n_per_unit);
  const DiscreteOperator op = assemble_operator(field, grid);
  const Filter filter = build_filter(opts.filter_q);

  std::vector<std::vector<double>> node_a(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) node_a[static_cast<std::size_t>(k)] = node_coefficients(field, grid, k);

  auto solve_direction = [&](int j) {
    DirectionResult out;
    const GridFunction g = assemble_source(field, grid, j);
    out.sol = solve_modified_cell(op, g, opts.T, opts.method, opts.cell, j);
    GridFunction integrand(grid);
    for (int i = 0; i < d; ++i) {
      const std::vector<double>& ai = node_a[static_cast<std::size_t>(i)];
      const std::vector<double>& di = out.sol.gradient[static_cast<std::size_t>(i)].values;
      if (i == j) {
        for (std::size_t r = 0; r < integrand.values.size(); ++r)
          integrand.values[r] = ai[r] * (1.0 + di[r]);
      } else {
        for (std::size_t r = 0; r < integrand.values.size(); ++r)
          integrand.values[r] = ai[r] * di[r];
      }
      out.column[static_cast<std::size_t>(i)] = filtered_average(integrand, filter, opts.L);
    }
    return out;
  };

  std::vector<DirectionResult> results(static_cast<std::size_t>(d));
  if (worker_threads() > 1 && d > 1) {
    std::vector<std::future<DirectionResult>> futures;
    futures.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      futures.push_back(std::async(std::launch::async, solve_direction, j));
    for (int j = 0; j < d; ++j) results[static_cast<std::size_t>(j)] = futures[static_cast<std::size_t>(j)].get();
  } else {
    for (int j = 0; j < d; ++j) results[static_cast<std::size_t>(j)] = solve_direction(j);
  }

  HomogenizedTensor tensor;
  tensor.dim = d;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      tensor.at(i, j) = results[static_cast<std::size_t>(j)].column[static_cast<std::size_t>(i)];

  auto& meta = tensor.meta;
  meta.R = opts.R;
  meta.L = opts.L;
  meta.T = opts.T;
  meta.q = opts.filter_q;
  meta.h = grid.h;
  meta.seed = opts.cell.seed;
  switch (opts.method) {
    case CorrectionMethod::Lanczos: meta.method = "lanczos"; break;
    case CorrectionMethod::Spectral: meta.method = "spectral"; break;
    case CorrectionMethod::Parabolic: meta.method = "parabolic"; break;
    case CorrectionMethod::None: meta.method = "none"; break;
  }
  for (int j = 0; j < d; ++j) {
    const CellSolution& sol = results[static_cast<std::size_t>(j)].sol;
    meta.residuals.push_back(sol.residual_norm);
    meta.k = std::max(meta.k, sol.info.k);
    meta.n_modes = std::max(meta.n_modes, sol.info.n_modes);
    meta.n_steps = std::max(meta.n_steps, sol.info.n_steps);
    meta.bound = std::max(meta.bound, sol.info.bound);
    meta.cg_iterations += sol.info.cg_iterations;
  }
  double defect = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) defect = std::max(defect, std::fabs(tensor.at(i, j) - tensor.at(j, i)));
  meta.symmetry_defect = defect;
  meta.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return tensor;
}

HomogenizedTensor truncated_homogenize(const CoefficientField& field,
                                       const HomogenizeOptions& opts, index_t n_modes) {
  HomogenizeOptions local = opts;
  local.method = CorrectionMethod::Spectral;
  local.cell.n_modes = n_modes;
  HomogenizedTensor tensor = homogenize(field, local);
  const Grid grid = Grid::make(field.dim(), opts.R, opts.n_per_unit);
  if (n_modes > 0 && grid.size >= 8) {
    const DiscreteOperator op = assemble_operator(field, grid);
    const double c_d = estimate_cd(op, 8);
    const double rate = std::pow(static_cast<double>(n_modes), 2.0 / grid.dim) * opts.T /
                        (opts.R * opts.R);
    tensor.meta.bound = std::pow(opts.R / opts.L, 0.5 * grid.dim) * opts.R *
                        std::exp(-c_d * rate);
  }
  return tensor;
}

HomogenizedTensor exact_reference(const CoefficientField& field, int n_per_unit_ref,
                                  double cg_tol) {
  if (!field.periodic()) throw ConfigError("exact reference requires a periodic field");
  const auto t0 = std::chrono::steady_clock::now();
  const int d = field.dim();
  const PeriodicGrid grid = PeriodicGrid::make(d, n_per_unit_ref);

  std::vector<std::vector<double>> node_a(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    std::vector<double>& arr = node_a[static_cast<std::size_t>(k)];
    arr.resize(static_cast<std::size_t>(grid.size));
    for (index_t r = 0; r < grid.size; ++r) {
      std::array<index_t, 3> idx{};
      grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(d)));
      std::array<double, 3> x{};
      for (int c = 0; c < d; ++c)
        x[static_cast<std::size_t>(c)] = grid.coord(idx[static_cast<std::size_t>(c)]);
      arr[static_cast<std::size_t>(r)] =
          field.entry(k, std::span<const double>(x.data(), static_cast<std::size_t>(d)));
    }
  }

  HomogenizedTensor tensor;
  tensor.dim = d;
  auto& meta = tensor.meta;
  for (int j = 0; j < d; ++j) {
    const PeriodicCellSolution sol = solve_periodic_reference(field, n_per_unit_ref, j, cg_tol);
    for (int i = 0; i < d; ++i) {
      const std::vector<double>& ai = node_a[static_cast<std::size_t>(i)];
      const std::vector<double>& di = sol.gradient[static_cast<std::size_t>(i)];
      double sum = 0.0;
      for (std::size_t r = 0; r < ai.size(); ++r)
        sum += (i == j ? ai[r] * (1.0 + di[r]) : ai[r] * di[r]);
      tensor.at(i, j) = sum / static_cast<double>(grid.size);
    }
    meta.residuals.push_back(sol.residual_norm);
    meta.cg_iterations += sol.cg_iterations;
  }
  meta.method = "periodic-reference";
  meta.h = grid.h;
  meta.R = 1.0;
  meta.L = 1.0;
  double defect = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) defect = std::max(defect, std::fabs(tensor.at(i, j) - tensor.at(j, i)));
  meta.symmetry_defect = defect;
  meta.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return tensor;
}

HomogenizedTensor richardson_combine(const HomogenizedTensor& coarse,
                                     const HomogenizedTensor& fine) {
  if (coarse.dim != fine.dim) throw ConfigError("tensor dimensions differ");
  HomogenizedTensor out = fine;
  for (int i = 0; i < fine.dim; ++i)
    for (int j = 0; j < fine.dim; ++j)
      out.at(i, j) = fine.at(i, j) + (fine.at(i, j) - coarse.at(i, j)) / 3.0;
  out.meta.method = "periodic-reference-richardson";
  return out;
}

SelectedParameters select_parameters(double R, double k_o, double c1, double c2, int dim,
                                     int n_per_unit) {
  if (!(k_o > 0.0) || !(k_o < 1.0)) throw ConfigError("k_o must lie in (0, 1)");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("c1 and c2 must be positive");
  if (dim < 1 || dim > 3) throw ConfigError("dimension must be 1, 2 or 3");
  const index_t rn = static_cast<index_t>(std::nearbyint(R * n_per_unit));
  // Round L down to the nearest grid-commensurate value with K_L corners on
  // grid nodes: L*n integral and (R-L)*n even.
  index_t ln = static_cast<index_t>(std::floor(k_o * R * n_per_unit * (1.0 + 1e-12)));
  while (ln > 0 && (rn - ln) % 2 != 0) --ln;
  if (ln <= 0) throw ConfigError("k_o R is too small to fit a grid-commensurate L");
  const double L = static_cast<double>(ln) / n_per_unit;
  const double T = std::sqrt(c2 / c1) * (1.0 - k_o) * R;
  const double gap = R - L;
  if (!(T < 2.0 * c2 * gap * gap / dim))
    throw HypothesisError("T = " + std::to_string(T) +
                          " violates T < 2 c2 |R-L|^2 / d = " +
                          std::to_string(2.0 * c2 * gap * gap / dim));
  return {L, T};
}

double frobenius_error(const HomogenizedTensor& a, const HomogenizedTensor& b) {
  if (a.dim != b.dim) throw ConfigError("tensor dimensions differ");
  double sum = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) {
      const double diff = a.at(i, j) - b.at(i, j);
      sum += diff * diff;
    }
  return std::sqrt(sum);
}

}  // namespace reshom
