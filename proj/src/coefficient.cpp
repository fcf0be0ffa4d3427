#include "reshom/coefficient.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "reshom/errors.hpp"

namespace reshom {

namespace {

Expression two_pi_x(int axis) {
  using E = Expression;
  return E::binary(BinaryOp::Mul, E::binary(BinaryOp::Mul, E::literal(2.0), E::pi()),
                   E::variable(axis));
}

Expression sine_profile(double c0, double c1, int axis) {
  using E = Expression;
  return E::binary(BinaryOp::Add, E::literal(c0),
                   E::binary(BinaryOp::Mul, E::literal(c1),
                             E::call(FuncKind::Sin, {two_pi_x(axis)})));
}

double get_param(const std::map<std::string, double>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("family parameter '" + key + "' missing");
  return it->second;
}

int default_bound_samples(int dim) { return dim == 1 ? 256 : dim == 2 ? 64 : 24; }

}  // namespace

CoefficientField CoefficientField::scalar(int dim, Expression e, bool periodic) {
  if (dim < 1 || dim > 3) throw ConfigError("field dimension must be 1, 2 or 3");
  if (e.arity() > dim) throw ConfigError("expression uses more variables than the field dimension");
  CoefficientField f;
  f.dim_ = dim;
  f.kind_ = FieldKind::Scalar;
  f.periodic_ = periodic;
  f.exprs_.push_back(std::move(e));
  auto [a, b] = estimate_bounds(f, default_bound_samples(dim));
  f.alpha_ = a;
  f.beta_ = b;
  return f;
}

CoefficientField CoefficientField::diagonal(std::vector<Expression> entries, bool periodic) {
  const int dim = static_cast<int>(entries.size());
  if (dim < 1 || dim > 3) throw ConfigError("diagonal field needs 1..3 entries");
  CoefficientField f;
  f.dim_ = dim;
  f.kind_ = FieldKind::Diagonal;
  f.periodic_ = periodic;
  f.exprs_ = std::move(entries);
  for (const Expression& e : f.exprs_)
    if (e.arity() > dim) throw ConfigError("expression uses more variables than the field dimension");
  auto [a, b] = estimate_bounds(f, default_bound_samples(dim));
  f.alpha_ = a;
  f.beta_ = b;
  return f;
}

CoefficientField CoefficientField::sampled(int dim, int res,
                                           std::vector<std::vector<double>> diag_values) {
  if (dim < 1 || dim > 3) throw ConfigError("field dimension must be 1, 2 or 3");
  if (res < 2 || res % 2 != 0) throw ConfigError("sample resolution must be even and >= 2");
  if (static_cast<int>(diag_values.size()) != dim)
    throw ConfigError("sampled field needs one value array per dimension");
  std::size_t count = 1;
  for (int k = 0; k < dim; ++k) count *= static_cast<std::size_t>(res);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& arr : diag_values) {
    if (arr.size() != count) throw ConfigError("sampled array has wrong length");
    for (double v : arr) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo > 0.0)) throw ConfigError("sampled field violates ellipticity (min <= 0)");
  CoefficientField f;
  f.dim_ = dim;
  f.kind_ = FieldKind::Sampled;
  f.periodic_ = true;
  f.sample_res_ = res;
  f.samples_ = std::move(diag_values);
  f.alpha_ = lo;
  f.beta_ = hi;
  return f;
}

CoefficientField CoefficientField::family(const std::string& name,
                                          const std::map<std::string, double>& params) {
  using E = Expression;
  if (name == "constant") {
    const double c = get_param(params, "c");
    if (!(c > 0.0)) throw ConfigError("constant family needs c > 0");
    int dim = 1;
    if (auto it = params.find("dim"); it != params.end()) dim = static_cast<int>(it->second);
    CoefficientField f = scalar(dim, E::literal(c), true);
    f.alpha_ = c;
    f.beta_ = c;
    return f;
  }
  if (name == "sine1d" || name == "layered2d" || name == "checker-smooth") {
    const double c0 = get_param(params, "c0");
    const double c1 = get_param(params, "c1");
    if (!(c0 > std::fabs(c1))) throw ConfigError(name + " family needs c0 > |c1|");
    CoefficientField f = [&] {
      if (name == "sine1d") return scalar(1, sine_profile(c0, c1, 0), true);
      if (name == "layered2d")
        return diagonal({sine_profile(c0, c1, 0), sine_profile(c0, c1, 0)}, true);
      // checker-smooth: c0 + c1*sin(2 pi x1)*sin(2 pi x2)
      Expression osc = E::binary(BinaryOp::Mul, E::call(FuncKind::Sin, {two_pi_x(0)}),
                                 E::call(FuncKind::Sin, {two_pi_x(1)}));
      return scalar(2, E::binary(BinaryOp::Add, E::literal(c0),
                                 E::binary(BinaryOp::Mul, E::literal(c1), std::move(osc))),
                    true);
    }();
    f.alpha_ = c0 - std::fabs(c1);
    f.beta_ = c0 + std::fabs(c1);
    return f;
  }
  throw ConfigError("unknown coefficient family '" + name + "'");
}

double CoefficientField::entry(int k, std::span<const double> x) const {
  if (k < 0 || k >= dim_) throw ConfigError("diagonal entry index out of range");
  if (kind_ == FieldKind::Scalar) return exprs_[0].evaluate(x);
  if (kind_ == FieldKind::Diagonal) return exprs_[static_cast<std::size_t>(k)].evaluate(x);
  // Sampled: snap to the half-step lattice, periodic wrap.
  std::size_t flat = 0, stride = 1;
  for (int c = 0; c < dim_; ++c) {
    const double t = x[static_cast<std::size_t>(c)] * sample_res_;
    const double r = std::nearbyint(t);
    if (std::fabs(t - r) > 1e-9 * std::max(1.0, std::fabs(t)))
      throw EvalError("sampled field evaluated off its lattice");
    long idx = static_cast<long>(r) % sample_res_;
    if (idx < 0) idx += sample_res_;
    flat += static_cast<std::size_t>(idx) * stride;
    stride *= static_cast<std::size_t>(sample_res_);
  }
  return samples_[static_cast<std::size_t>(k)][flat];
}

CoefficientField CoefficientField::with_bounds(double alpha, double beta) const {
  if (!(alpha > 0.0) || !(alpha <= beta)) throw ConfigError("bounds must satisfy 0 < alpha <= beta");
  CoefficientField f = *this;
  f.alpha_ = alpha;
  f.beta_ = beta;
  return f;
}

std::pair<double, double> estimate_bounds(const CoefficientField& field, int samples_per_dim) {
  if (samples_per_dim < 8) throw ConfigError("estimate_bounds needs >= 8 samples per dimension");
  const int d = field.dim();
  const int s = samples_per_dim;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(s);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int c = 0; c < d; ++c) {
      x[static_cast<std::size_t>(c)] = static_cast<double>(rem % static_cast<std::size_t>(s)) / s;
      rem /= static_cast<std::size_t>(s);
    }
    for (int k = 0; k < d; ++k) {
      const double v = field.entry(k, x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo > 0.0)) throw ConfigError("ellipticity violation: sampled minimum is not positive");
  return {lo, hi};
}

double periodicity_defect(const CoefficientField& field, int n_samples,
                          unsigned long long seed) {
  const int d = field.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
  double defect = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    for (int c = 0; c < d; ++c) x[static_cast<std::size_t>(c)] = unif(rng);
    for (int axis = 0; axis < d; ++axis) {
      y = x;
      y[static_cast<std::size_t>(axis)] += 1.0;
      for (int k = 0; k < d; ++k)
        defect = std::max(defect, std::fabs(field.entry(k, x) - field.entry(k, y)));
    }
  }
  return defect;
}

CoefficientField sample_field(const CoefficientField& field, int res) {
  const int d = field.dim();
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(res);
  std::vector<std::vector<double>> arrays(static_cast<std::size_t>(d),
                                          std::vector<double>(total));
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int c = 0; c < d; ++c) {
      x[static_cast<std::size_t>(c)] =
          static_cast<double>(rem % static_cast<std::size_t>(res)) / res;
      rem /= static_cast<std::size_t>(res);
    }
    for (int k = 0; k < d; ++k) arrays[static_cast<std::size_t>(k)][flat] = field.entry(k, x);
  }
  return CoefficientField::sampled(d, res, std::move(arrays));
}

}  // namespace reshom
