#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reshom/coefficient.hpp"
#include "reshom/errors.hpp"

using namespace reshom;

TEST_CASE("builtin families and their analytic bounds") {
  const CoefficientField c = CoefficientField::family("constant", {{"c", 1.0}});
  CHECK(c.alpha() == 1.0);
  CHECK(c.beta() == 1.0);
  const double x0 = 0.37;
  CHECK(c.entry(0, std::span<const double>(&x0, 1)) == 1.0);

  const CoefficientField s = CoefficientField::family("sine1d", {{"c0", 2.0}, {"c1", 1.0}});
  CHECK(s.alpha() == 1.0);
  CHECK(s.beta() == 3.0);
  CHECK(s.dim() == 1);
  const double quarter = 0.25;
  CHECK(s.entry(0, std::span<const double>(&quarter, 1)) == doctest::Approx(3.0).epsilon(1e-15));

  const CoefficientField l = CoefficientField::family("layered2d", {{"c0", 2.0}, {"c1", 1.0}});
  CHECK(l.alpha() == 1.0);
  CHECK(l.beta() == 3.0);
  CHECK(l.dim() == 2);
  CHECK(l.kind() == FieldKind::Diagonal);
  const std::vector<double> p{0.25, 0.9};
  CHECK(l.entry(0, p) == l.entry(1, p));  // layers: both entries f(x1)

  const CoefficientField ch = CoefficientField::family("checker-smooth", {{"c0", 2.0}, {"c1", 1.0}});
  CHECK(ch.dim() == 2);
  const std::vector<double> pq{0.25, 0.25};
  CHECK(ch.entry(0, pq) == doctest::Approx(3.0).epsilon(1e-15));

  CHECK_THROWS_AS(CoefficientField::family("nope", {}), ConfigError);
  CHECK_THROWS_AS(CoefficientField::family("sine1d", {{"c0", 1.0}, {"c1", 2.0}}), ConfigError);
  CHECK_THROWS_AS(CoefficientField::family("constant", {{"c", -1.0}}), ConfigError);
}

TEST_CASE("estimate_bounds brackets analytic ranges") {
  const CoefficientField c3 = CoefficientField::family("constant", {{"c", 3.0}});
  const auto [a3, b3] = estimate_bounds(c3, 16);
  CHECK(a3 == 3.0);
  CHECK(b3 == 3.0);

  const CoefficientField s = CoefficientField::family("sine1d", {{"c0", 2.0}, {"c1", 1.0}});
  const auto [a, b] = estimate_bounds(s, 256);
  CHECK(a == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(b == doctest::Approx(3.0).epsilon(1e-3));
  // sampled bracket must stay inside the true range
  CHECK(a >= 1.0 - 1e-12);
  CHECK(b <= 3.0 + 1e-12);

  // 5% bracketing for >= 64 samples per axis
  const auto [a64, b64] = estimate_bounds(s, 64);
  CHECK(a64 <= 1.05);
  CHECK(b64 >= 3.0 * 0.95);

  const CoefficientField bad =
      CoefficientField::scalar(1, Expression::parse("2 + sin(2*pi*x1)"), true).with_bounds(1.0, 3.0);
  CHECK_THROWS_AS(estimate_bounds(bad, 4), ConfigError);  // too few samples
  CHECK_THROWS_AS(CoefficientField::scalar(1, Expression::parse("sin(2*pi*x1)"), true),
                  ConfigError);  // sign-changing: ellipticity violation
}

TEST_CASE("bounds monotonicity under sample refinement") {
  const CoefficientField ch = CoefficientField::family("checker-smooth", {{"c0", 2.0}, {"c1", 0.7}});
  double prev_lo = -1e300, prev_hi = 1e300;
  for (int s : {8, 16, 32, 64}) {
    const auto [lo, hi] = estimate_bounds(ch, s);
    if (prev_lo > -1e300) {
      CHECK(lo <= prev_lo + 1e-14);  // bracket only widens toward the truth
      CHECK(hi >= prev_hi - 1e-14);
    }
    prev_lo = lo;
    prev_hi = hi;
  }
}

TEST_CASE("periodicity of every builtin family") {
  for (const auto& [name, params] :
       std::vector<std::pair<std::string, std::map<std::string, double>>>{
           {"constant", {{"c", 2.0}}},
           {"sine1d", {{"c0", 2.0}, {"c1", 1.0}}},
           {"layered2d", {{"c0", 2.0}, {"c1", 1.0}}},
           {"checker-smooth", {{"c0", 2.0}, {"c1", 1.0}}}}) {
    const CoefficientField f = CoefficientField::family(name, params);
    CHECK(f.periodic());
    CHECK(periodicity_defect(f, 100, 7) <= 1e-12);
  }
}

TEST_CASE("sampled fields evaluate exactly on their lattice") {
  const CoefficientField s = CoefficientField::family("sine1d", {{"c0", 2.0}, {"c1", 1.0}});
  const int res = 16;  // half-step lattice for an 8-cells-per-unit grid
  const CoefficientField sampled = sample_field(s, res);
  CHECK(sampled.kind() == FieldKind::Sampled);
  for (int i = -res; i <= 2 * res; ++i) {
    const double x = static_cast<double>(i) / res;
    const double want = s.entry(0, std::span<const double>(&x, 1));
    // analytic sine pattern is 1-periodic up to rounding in the argument
    CHECK(sampled.entry(0, std::span<const double>(&x, 1)) == doctest::Approx(want).epsilon(1e-12));
  }
  const double off = 0.5 / res + 1e-3;
  CHECK_THROWS_AS(sampled.entry(0, std::span<const double>(&off, 1)), EvalError);
  CHECK(sampled.alpha() > 0.9);
  CHECK(sampled.beta() <= 3.0);
}

TEST_CASE("with_bounds validates ordering") {
  const CoefficientField c = CoefficientField::family("constant", {{"c", 2.0}});
  CHECK_THROWS_AS(c.with_bounds(3.0, 1.0), ConfigError);
  CHECK_THROWS_AS(c.with_bounds(-1.0, 1.0), ConfigError);
  const CoefficientField c2 = c.with_bounds(0.5, 4.0);
  CHECK(c2.alpha() == 0.5);
  CHECK(c2.beta() == 4.0);
}
