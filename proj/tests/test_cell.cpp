#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "reshom/cell.hpp"
#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"
#include "reshom/solvers.hpp"
#include "reshom/spectral.hpp"

using namespace reshom;

namespace {

CoefficientField sine_field() { return CoefficientField::family("sine1d", {{"c0", 2.0}, {"c1", 1.0}}); }

double rel_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff / norm);
}

// Crank-Nicolson evolution on the periodic unit cell; also accumulates the
// trapezoid time integrals of v and of ||grad v||_L2^2.
struct PeriodicEvolution {
  std::vector<double> u_final;
  std::vector<double> integral_v;
  double grad_l2t_sq = 0.0;
};

PeriodicEvolution evolve_periodic(const PeriodicOperator& op, const std::vector<double>& g,
                                  double T, int steps) {
  const double dt = T / steps;
  const CsrMatrix b_mat = shifted_matrix(op.matrix, 0.5 * dt, 1.0);
  std::vector<double> u = g, rhs(g.size()), u_next(g.size());
  PeriodicEvolution out;
  out.integral_v.assign(g.size(), 0.0);
  auto grad_sq = [&](const std::vector<double>& v) {
    double sum = 0.0;
    for (const auto& comp : periodic_gradient(op.grid, v)) {
      const double nrm = l2_norm(op.grid, comp);
      sum += nrm * nrm;
    }
    return sum;
  };
  double prev_grad = grad_sq(u);
  for (int s = 0; s < steps; ++s) {
    op.matrix.multiply(u.data(), rhs.data());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = u[i] - 0.5 * dt * rhs[i];
    CgOptions opts;
    opts.tol = 1e-12;
    opts.start = &u;
    cg_solve(b_mat, rhs, u_next, opts);
    for (std::size_t i = 0; i < u.size(); ++i)
      out.integral_v[i] += 0.5 * dt * (u[i] + u_next[i]);
    const double g_next = grad_sq(u_next);
    out.grad_l2t_sq += 0.5 * dt * (prev_grad + g_next);
    prev_grad = g_next;
    std::swap(u, u_next);
  }
  out.u_final = u;
  return out;
}

double h_div_norm(const CoefficientField& field, const Grid& grid, int axis) {
  const GridFunction g = assemble_source(field, grid, axis);
  double sum = 0.0;
  std::array<index_t, 3> idx{};
  std::array<double, 3> x{};
  for (index_t r = 0; r < grid.size; ++r) {
    grid.unflatten(r, std::span<index_t>(idx.data(), static_cast<std::size_t>(grid.dim)));
    for (int k = 0; k < grid.dim; ++k)
      x[static_cast<std::size_t>(k)] = grid.coord(idx[static_cast<std::size_t>(k)]);
    const double a =
        field.entry(axis, std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim)));
    sum += a * a + g.values[static_cast<std::size_t>(r)] * g.values[static_cast<std::size_t>(r)];
  }
  return std::sqrt(std::pow(grid.h, grid.dim) * sum);
}

double grad_l2(const CellSolution& sol) {
  double sum = 0.0;
  for (const GridFunction& comp : sol.gradient) {
    const double nrm = l2_norm(comp);
    sum += nrm * nrm;
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("trivial right-hand sides short-circuit to zero") {
  const CoefficientField c = CoefficientField::family("constant", {{"c", 2.0}});
  const Grid grid = Grid::make(1, 4.0, 8);
  const DiscreteOperator op = assemble_operator(c, grid);
  const GridFunction g = assemble_source(c, grid, 0);  // exactly zero

  for (CorrectionMethod m : {CorrectionMethod::Lanczos, CorrectionMethod::Spectral,
                             CorrectionMethod::Parabolic, CorrectionMethod::None}) {
    const CellSolution sol = solve_modified_cell(op, g, 2.0, m);
    for (double v : sol.chi.values) CHECK(v == 0.0);
    CHECK(sol.residual_norm == 0.0);
  }

  // T = 0: rhs = g - g = 0 even for a genuine source
  const DiscreteOperator ops = assemble_operator(sine_field(), grid);
  const GridFunction gs = assemble_source(sine_field(), grid, 0);
  const CellSolution at0 = solve_modified_cell(ops, gs, 0.0, CorrectionMethod::Spectral);
  for (double v : at0.chi.values) CHECK(v == 0.0);
  CHECK_THROWS_AS(solve_modified_cell(ops, gs, -1.0, CorrectionMethod::Lanczos), ConfigError);
}

TEST_CASE("residual contract holds for every method") {
  const Grid grid = Grid::make(1, 8.0, 16);
  const DiscreteOperator op = assemble_operator(sine_field(), grid);
  const GridFunction g = assemble_source(sine_field(), grid, 0);
  CellParams params;
  params.solver = LinearSolverKind::Cg;
  for (CorrectionMethod m :
       {CorrectionMethod::Lanczos, CorrectionMethod::Spectral, CorrectionMethod::None}) {
    const CellSolution sol = solve_modified_cell(op, g, 2.0, m, params);
    CHECK(sol.residual_norm <= 1e-10);
  }
  const CellSolution par = parabolic_integral(op, g, 2.0, 64, params);
  CHECK(par.residual_norm <= 1e-9);
  CHECK(par.info.method == "parabolic-integral");
}

TEST_CASE("direct and CG cell solves agree") {
  const Grid grid = Grid::make(1, 8.0, 16);
  const DiscreteOperator op = assemble_operator(sine_field(), grid);
  const GridFunction g = assemble_source(sine_field(), grid, 0);
  CellParams direct;
  direct.solver = LinearSolverKind::Direct;
  CellParams cg;
  cg.solver = LinearSolverKind::Cg;
  const CellSolution a = solve_dirichlet_cell(op, g, direct);
  const CellSolution b = solve_dirichlet_cell(op, g, cg);
  CHECK(rel_gap(a.chi.values, b.chi.values) <= 1e-8);
}

TEST_CASE("modified cell solution approaches the Dirichlet baseline as T grows") {
  const Grid grid = Grid::make(1, 4.0, 16);
  const DiscreteOperator op = assemble_operator(sine_field(), grid);
  const GridFunction g = assemble_source(sine_field(), grid, 0);
  const oracles::DenseOracle oracle(op);
  const double t_large = 40.0 / oracle.lambda_min();  // e^{-AT} g below 1e-14 ||g||
  const CellSolution far = solve_modified_cell(op, g, t_large, CorrectionMethod::Spectral);
  const CellSolution baseline = solve_dirichlet_cell(op, g);
  CHECK(rel_gap(far.chi.values, baseline.chi.values) <= 1e-9);
}

TEST_CASE("parabolic integral matches the elliptic solve at second order in dt") {
  // Coarse steps sit in the stiff-tail regime where the gap decays like
  // exp(-c/dt^2); h = 1/8 keeps lambda_max small enough that these step
  // counts are dt^2-dominated.
  const Grid grid = Grid::make(1, 8.0, 8);
  const DiscreteOperator op = assemble_operator(sine_field(), grid);
  const GridFunction g = assemble_source(sine_field(), grid, 0);
  const double T = 4.0;
  const CellSolution elliptic = solve_modified_cell(op, g, T, CorrectionMethod::Spectral);

  std::vector<double> gaps;
  for (int steps : {64, 128, 256}) {
    const CellSolution par = parabolic_integral(op, g, T, steps);
    gaps.push_back(rel_gap(par.chi.values, elliptic.chi.values));
  }
  CHECK(gaps.back() <= 1e-5);
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double ratio = gaps[i - 1] / gaps[i];
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
  }
}

TEST_CASE("Crank-Nicolson endpoint agrees with expmv at second order") {
  const Grid grid = Grid::make(1, 4.0, 8);
  const DiscreteOperator op = assemble_operator(sine_field(), grid);
  const GridFunction g = assemble_source(sine_field(), grid, 0);
  const double T = 1.0;
  const SpectralTruncation full = partial_eigendecomposition(op, op.grid.size, &g);
  const GridFunction exact = expmv_spectral(full, T);
  double prev = -1.0;
  for (int steps : {64, 128}) {
    const CellSolution par = parabolic_integral(op, g, T, steps);
    // A chi = g - u(T) holds exactly, so u(T) = g - A chi
    const GridFunction achi = op.apply(par.chi);
    std::vector<double> u_t(g.values.size());
    for (std::size_t i = 0; i < u_t.size(); ++i) u_t[i] = g.values[i] - achi.values[i];
    double gap = 0.0;
    for (std::size_t i = 0; i < u_t.size(); ++i) {
      const double d = u_t[i] - exact.values[i];
      gap += d * d;
    }
    gap = std::sqrt(gap) / kernels::norm2(g.values);
    if (prev > 0.0) CHECK(prev / gap == doctest::Approx(4.0).epsilon(0.25));
    prev = gap;
  }
}

TEST_CASE("periodic reference: mean-zero solution with small residual") {
  const PeriodicCellSolution sol = solve_periodic_reference(sine_field(), 64, 0);
  CHECK(sol.residual_norm <= 1e-10);
  double mean = 0.0, amax = 0.0;
  for (double v : sol.chi) {
    mean += v;
    amax = std::max(amax, std::fabs(v));
  }
  CHECK(std::fabs(mean / static_cast<double>(sol.chi.size())) <= 1e-12 * amax);

  const CoefficientField c = CoefficientField::family("constant", {{"c", 3.0}});
  const PeriodicCellSolution zero = solve_periodic_reference(c, 16, 0);
  for (double v : zero.chi) CHECK(v == 0.0);

  CHECK_THROWS_AS(
      solve_periodic_reference(CoefficientField::scalar(1, Expression::parse("2 + x1"), false), 16, 0),
      ConfigError);
}

TEST_CASE("time integral of the periodic parabolic problem solves the periodic cell problem") {
  const CoefficientField field = sine_field();
  const int n = 32;
  const PeriodicOperator op = assemble_periodic_operator(field, n);
  const std::vector<double> g = assemble_periodic_source(field, n, 0);
  // lambda_0 ~ a_hom (2 pi)^2 = 68: by T = 0.5 the tail is below 1e-14
  const PeriodicEvolution evo = evolve_periodic(op, g, 0.5, 512);
  const PeriodicCellSolution ref = solve_periodic_reference(field, n, 0);
  CHECK(rel_gap(evo.integral_v, ref.chi) <= 1e-4);
}

TEST_CASE("a-priori gradient bound for the periodic parabolic solution") {
  // || grad v ||_{L2(0,T;L2)} <= sqrt(1/(2 alpha)) ||g||_{L2}, within 1.1
  const CoefficientField field = sine_field();
  const int n = 64;
  const PeriodicOperator op = assemble_periodic_operator(field, n);
  const std::vector<double> g = assemble_periodic_source(field, n, 0);
  const PeriodicEvolution evo = evolve_periodic(op, g, 1.0, 400);
  const double measured = std::sqrt(evo.grad_l2t_sq);
  const double bound = std::sqrt(1.0 / (2.0 * field.alpha())) * l2_norm(op.grid, g);
  CHECK(measured <= 1.1 * bound);
  CHECK(measured > 0.05 * bound);  // not vacuous
}

TEST_CASE("gradient stencils") {
  const Grid grid = Grid::make(2, 2.0, 8);
  // linear profile: exact constant gradient away from the boundary rows
  GridFunction lin(grid);
  std::array<index_t, 2> idx{};
  for (index_t r = 0; r < grid.size; ++r) {
    grid.unflatten(r, idx);
    lin.values[static_cast<std::size_t>(r)] = 2.0 * grid.coord(idx[0]) - 0.5 * grid.coord(idx[1]);
  }
  const std::vector<GridFunction> grads = gradient(lin);
  for (index_t r = 0; r < grid.size; ++r) {
    grid.unflatten(r, idx);
    if (idx[0] > 1 && idx[0] < grid.m && idx[1] > 1 && idx[1] < grid.m) {
      CHECK(grads[0].values[static_cast<std::size_t>(r)] == doctest::Approx(2.0).epsilon(1e-13));
      CHECK(grads[1].values[static_cast<std::size_t>(r)] == doctest::Approx(-0.5).epsilon(1e-13));
    }
  }

  // zero field
  const std::vector<GridFunction> zero = gradient(GridFunction(grid));
  for (double v : zero[0].values) CHECK(v == 0.0);

  // smooth field: interior order >= 1.9
  std::vector<double> errs;
  for (int n : {16, 32, 64}) {
    const Grid g1 = Grid::make(1, 2.0, n);
    GridFunction f(g1);
    for (index_t i = 1; i <= g1.m; ++i)
      f.values[static_cast<std::size_t>(i - 1)] = std::sin(2.0 * M_PI * g1.coord(i));
    const GridFunction d = gradient(f)[0];
    double err = 0.0;
    for (index_t i = 2; i < g1.m; ++i)
      err = std::max(err, std::fabs(d.values[static_cast<std::size_t>(i - 1)] -
                                    2.0 * M_PI * std::cos(2.0 * M_PI * g1.coord(i))));
    errs.push_back(err);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(std::log2(errs[i - 1] / errs[i]) >= 1.9);
}

TEST_CASE("discrete H1 bound holds for every solved cell problem") {
  for (int dim : {1, 2}) {
    const CoefficientField field =
        dim == 1 ? sine_field() : CoefficientField::family("layered2d", {{"c0", 2.0}, {"c1", 1.0}});
    const Grid grid = Grid::make(dim, 4.0, dim == 1 ? 32 : 8);
    const DiscreteOperator op = assemble_operator(field, grid);
    const double c_p = grid.length * std::sqrt(static_cast<double>(dim)) / M_PI;
    const double c_bound = std::sqrt((1.0 + c_p * c_p) / (field.alpha() * field.alpha()));
    for (int j = 0; j < dim; ++j) {
      const GridFunction g = assemble_source(field, grid, j);
      if (kernels::norm2(g.values) == 0.0) continue;
      const double rhs_norm = h_div_norm(field, grid, j);
      for (CorrectionMethod m :
           {CorrectionMethod::Lanczos, CorrectionMethod::Spectral, CorrectionMethod::None,
            CorrectionMethod::Parabolic}) {
        const CellSolution sol = solve_modified_cell(op, g, 1.0, m, {}, j);
        CHECK(grad_l2(sol) <= 1.1 * c_bound * rhs_norm);
      }
    }
  }
}
