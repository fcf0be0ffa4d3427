#include "reshom/study.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <future>
#include <sstream>

#include "reshom/errors.hpp"
#include "reshom/kernels.hpp"
#include "reshom/lanczos.hpp"
#include "reshom/spectral.hpp"

namespace reshom {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "expected a number");
  return j.get<double>();
}

CoefficientField parse_coefficient(const json& j) {
  if (!j.is_object()) bad_field("coefficient", "expected an object");
  if (j.contains("family")) {
    std::map<std::string, double> params;
    if (j.contains("params")) {
      if (!j.at("params").is_object()) bad_field("coefficient.params", "expected an object");
      for (const auto& [key, value] : j.at("params").items())
        params[key] = require_number(value, "coefficient.params." + key);
    }
    return CoefficientField::family(j.at("family").get<std::string>(), params);
  }
  if (j.contains("expr")) {
    const json& e = j.at("expr");
    const bool periodic = j.value("periodic", true);
    const int dim = j.value("dim", 1);
    std::vector<std::string> sources;
    if (e.is_string()) {
      sources.push_back(e.get<std::string>());
    } else if (e.is_array()) {
      for (const auto& s : e) sources.push_back(s.get<std::string>());
    } else {
      bad_field("coefficient.expr", "expected a string or array of strings");
    }
    std::vector<Expression> exprs;
    for (const std::string& s : sources) exprs.push_back(Expression::parse(s));
    if (exprs.size() == 1) return CoefficientField::scalar(dim, std::move(exprs[0]), periodic);
    if (static_cast<int>(exprs.size()) != dim)
      bad_field("coefficient.expr", "need 1 expression (scalar) or dim expressions (diagonal)");
    return CoefficientField::diagonal(std::move(exprs), periodic);
  }
  bad_field("coefficient", "needs either 'family' or 'expr'");
}

int parse_filter(const json& doc) {
  if (!doc.contains("filter")) return 0;
  const json& f = doc.at("filter");
  if (!f.is_object() || !f.contains("q")) bad_field("filter", "expected an object with 'q'");
  const json& q = f.at("q");
  if (q.is_string()) {
    if (q.get<std::string>() == "inf") return -1;
    bad_field("filter.q", "expected an integer or \"inf\"");
  }
  if (!q.is_number_integer()) bad_field("filter.q", "expected an integer or \"inf\"");
  return q.get<int>();
}

CorrectionMethod parse_method(const std::string& name) {
  if (name == "lanczos") return CorrectionMethod::Lanczos;
  if (name == "spectral") return CorrectionMethod::Spectral;
  if (name == "parabolic") return CorrectionMethod::Parabolic;
  if (name == "none") return CorrectionMethod::None;
  bad_field("method", "unknown method '" + name + "'");
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, ptr);
}

int worker_threads() {
  if (const char* env = std::getenv("RESHOM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

StudyConfig StudyConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  StudyConfig cfg;
  cfg.raw = doc;
  if (!doc.contains("coefficient")) bad_field("coefficient", "missing");
  cfg.field = parse_coefficient(doc.at("coefficient"));

  cfg.n_per_unit = doc.value("n_per_unit", 16);
  if (cfg.n_per_unit < 1) bad_field("n_per_unit", "must be positive");

  if (!doc.contains("R")) bad_field("R", "missing");
  const json& r = doc.at("R");
  if (r.is_number()) {
    cfg.r_values.push_back(r.get<double>());
  } else if (r.is_array() && !r.empty()) {
    for (const auto& v : r) cfg.r_values.push_back(require_number(v, "R"));
  } else {
    bad_field("R", "expected a number or non-empty array");
  }
  for (std::size_t i = 0; i < cfg.r_values.size(); ++i) {
    const double rv = cfg.r_values[i];
    if (!(rv >= 1.0)) bad_field("R", "entries must be >= 1");
    const double cells = rv * cfg.n_per_unit;
    if (std::fabs(cells - std::nearbyint(cells)) > 1e-9 * std::max(1.0, cells))
      bad_field("R", "entry " + std::to_string(rv) + " is not grid-commensurate");
    if (i > 0 && !(rv > cfg.r_values[i - 1])) bad_field("R", "list must be strictly increasing");
  }

  cfg.k_o = doc.value("k_o", 0.5);
  if (!(cfg.k_o > 0.0) || !(cfg.k_o < 1.0)) bad_field("k_o", "must lie in (0, 1)");
  if (doc.contains("c1")) {
    cfg.c1 = require_number(doc.at("c1"), "c1");
    if (!(*cfg.c1 > 0.0)) bad_field("c1", "must be positive");
  }
  cfg.c2 = doc.value("c2", 0.1);
  if (!(cfg.c2 > 0.0)) bad_field("c2", "must be positive");

  cfg.filter_q = parse_filter(doc);
  if (cfg.filter_q < -1 || cfg.filter_q > 20) bad_field("filter.q", "must be 0..20 or \"inf\"");

  cfg.method = parse_method(doc.value("method", std::string("lanczos")));

  if (doc.contains("method_params")) {
    const json& p = doc.at("method_params");
    if (!p.is_object()) bad_field("method_params", "expected an object");
    if (p.contains("k")) cfg.cell.k = p.at("k").get<index_t>();
    if (p.contains("c_d")) cfg.cell.c_d = require_number(p.at("c_d"), "method_params.c_d");
    if (p.contains("n_modes")) cfg.cell.n_modes = p.at("n_modes").get<index_t>();
    if (p.contains("n_steps")) cfg.cell.n_steps = p.at("n_steps").get<index_t>();
    if (p.contains("expmv_tol")) cfg.cell.expmv_tol = require_number(p.at("expmv_tol"), "method_params.expmv_tol");
    if (p.contains("k_max")) cfg.cell.k_max = p.at("k_max").get<index_t>();
  }
  cfg.cell.cg_tol = doc.value("cg_tol", 1e-10);
  if (!(cfg.cell.cg_tol > 0.0)) bad_field("cg_tol", "must be positive");
  const std::string solver = doc.value("solver", std::string("auto"));
  if (solver == "auto")
    cfg.cell.solver = LinearSolverKind::Auto;
  else if (solver == "cg")
    cfg.cell.solver = LinearSolverKind::Cg;
  else if (solver == "direct")
    cfg.cell.solver = LinearSolverKind::Direct;
  else
    bad_field("solver", "expected auto, cg or direct");
  cfg.cell.seed = doc.value("seed", 0ULL);

  cfg.baseline = doc.value("baseline", false);
  if (doc.contains("L")) cfg.l_override = require_number(doc.at("L"), "L");
  if (doc.contains("T")) cfg.t_override = require_number(doc.at("T"), "T");

  if (doc.contains("reference")) {
    const json& ref = doc.at("reference");
    if (!ref.is_object()) bad_field("reference", "expected an object");
    cfg.reference_n = ref.value("n_per_unit", 0);
    cfg.richardson = ref.value("richardson", true);
  }
  if (doc.contains("T_list")) {
    for (const auto& v : doc.at("T_list")) cfg.t_list.push_back(require_number(v, "T_list"));
  }
  return cfg;
}

double StudyConfig::effective_c1() const {
  if (c1) return *c1;
  return field.alpha() * M_PI * M_PI / field.dim();
}

json tensor_to_json(const HomogenizedTensor& tensor) {
  json meta{{"R", tensor.meta.R},
            {"L", tensor.meta.L},
            {"T", tensor.meta.T},
            {"q", tensor.meta.q},
            {"method", tensor.meta.method},
            {"h", tensor.meta.h},
            {"residuals", tensor.meta.residuals},
            {"k", tensor.meta.k},
            {"N_modes", tensor.meta.n_modes},
            {"n_steps", tensor.meta.n_steps},
            {"bound", tensor.meta.bound},
            {"cg_iterations", tensor.meta.cg_iterations},
            {"seed", tensor.meta.seed},
            {"timings_ms", tensor.meta.runtime_ms},
            {"symmetry_defect", tensor.meta.symmetry_defect}};
  std::vector<double> entries;
  for (int i = 0; i < tensor.dim; ++i)
    for (int j = 0; j < tensor.dim; ++j) entries.push_back(tensor.at(i, j));
  return json{{"dim", tensor.dim}, {"entries", entries}, {"meta", meta}};
}

namespace {

HomogenizeOptions options_for(const StudyConfig& cfg, double R) {
  HomogenizeOptions opts;
  opts.R = R;
  opts.n_per_unit = cfg.n_per_unit;
  opts.method = cfg.method;
  opts.cell = cfg.cell;
  opts.filter_q = cfg.filter_q;
  const SelectedParameters sel = [&] {
    if (cfg.l_override && cfg.t_override) return SelectedParameters{*cfg.l_override, *cfg.t_override};
    SelectedParameters s =
        select_parameters(R, cfg.k_o, cfg.effective_c1(), cfg.c2, cfg.field.dim(), cfg.n_per_unit);
    if (cfg.l_override) s.L = *cfg.l_override;
    if (cfg.t_override) s.T = *cfg.t_override;
    return s;
  }();
  opts.L = sel.L;
  opts.T = sel.T;
  return opts;
}

HomogenizedTensor study_reference(const StudyConfig& cfg, HomogenizedTensor* raw_out) {
  const int n_ref = cfg.reference_n > 0 ? cfg.reference_n : 2 * cfg.n_per_unit;
  HomogenizedTensor fine = exact_reference(cfg.field, n_ref, cfg.cell.cg_tol);
  if (raw_out) *raw_out = fine;
  if (cfg.richardson && n_ref % 2 == 0 && n_ref / 2 >= 3) {
    const HomogenizedTensor coarse = exact_reference(cfg.field, n_ref / 2, cfg.cell.cg_tol);
    return richardson_combine(coarse, fine);
  }
  return fine;
}

}  // namespace

json run_job(const StudyConfig& cfg) {
  const HomogenizeOptions opts = options_for(cfg, cfg.r_values.front());
  const HomogenizedTensor tensor = homogenize(cfg.field, opts);
  json report{{"config", cfg.raw}, {"tensor", tensor_to_json(tensor)}};
  if (cfg.field.periodic()) {
    HomogenizedTensor raw;
    const HomogenizedTensor ref = study_reference(cfg, &raw);
    report["reference"] = tensor_to_json(ref);
    report["reference_raw"] = tensor_to_json(raw);
    report["error_frobenius"] = frobenius_error(tensor, ref);
  }
  return report;
}

StudyResult run_study(const StudyConfig& cfg) {
  if (!cfg.field.periodic())
    throw ConfigError("config field 'coefficient': studies need a periodic field (reference required)");
  StudyResult result;
  result.reference = study_reference(cfg, &result.reference_raw);

  auto run_row = [&](double R) {
    StudyRow row;
    row.R = R;
    row.q = cfg.filter_q;
    try {
      const HomogenizeOptions opts = options_for(cfg, R);
      row.L = opts.L;
      row.T = opts.T;
      const HomogenizedTensor tensor = homogenize(cfg.field, opts);
      row.method = tensor.meta.method;
      row.error_frob = frobenius_error(tensor, result.reference);
      for (int i = 0; i < tensor.dim; ++i)
        for (int j = 0; j < tensor.dim; ++j)
          row.per_entry_error.push_back(std::fabs(tensor.at(i, j) - result.reference.at(i, j)));
      row.k = tensor.meta.k;
      row.n_modes = tensor.meta.n_modes;
      row.bound = tensor.meta.bound;
      row.cg_iters = tensor.meta.cg_iterations;
      row.runtime_ms = tensor.meta.runtime_ms;
      if (cfg.baseline) {
        HomogenizeOptions base = opts;
        base.method = CorrectionMethod::None;
        base.filter_q = 0;
        const HomogenizedTensor bt = homogenize(cfg.field, base);
        row.error_baseline = frobenius_error(bt, result.reference);
        row.cg_iters += bt.meta.cg_iterations;
        row.runtime_ms += bt.meta.runtime_ms;
      }
    } catch (const HypothesisError& e) {
      row.failed = true;
      row.failure = e.what();
      row.failure_code = 4;
    } catch (const ConfigError& e) {
      row.failed = true;
      row.failure = e.what();
      row.failure_code = 2;
    } catch (const Error& e) {
      row.failed = true;
      row.failure = e.what();
      row.failure_code = 3;
    }
    return row;
  };

  const std::size_t count = cfg.r_values.size();
  result.rows.resize(count);
  if (worker_threads() > 1 && count > 1) {
    std::vector<std::future<StudyRow>> futures;
    futures.reserve(count);
    for (double R : cfg.r_values)
      futures.push_back(std::async(std::launch::async, run_row, R));
    for (std::size_t i = 0; i < count; ++i) result.rows[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < count; ++i) result.rows[i] = run_row(cfg.r_values[i]);
  }
  return result;
}

json run_expmv_check(const StudyConfig& cfg) {
  const double R = cfg.r_values.front();
  const Grid grid = Grid::make(cfg.field.dim(), R, cfg.n_per_unit);
  if (grid.size > 4096)
    throw ConfigError("config field 'R': expmv-check needs N <= 4096 for the dense reference");
  const DiscreteOperator op = assemble_operator(cfg.field, grid);
  const GridFunction g = assemble_source(cfg.field, grid, 0);
  const double g_norm = kernels::norm2(g.values);
  if (g_norm == 0.0) throw ConfigError("config field 'coefficient': source vanishes (constant field)");

  const SpectralTruncation full = partial_eigendecomposition(op, grid.size, &g, cfg.cell.seed);
  const double rho = spectral_radius(op, 0.01) * 1.03;
  const double c_d = cfg.cell.c_d ? *cfg.cell.c_d : rho * grid.h * grid.h;

  std::vector<double> t_values = cfg.t_list;
  if (t_values.empty()) t_values = {4.0, 8.0, 12.0};

  json rows = json::array();
  for (double T : t_values) {
    const index_t k = cfg.cell.k ? *cfg.cell.k : choose_k(grid.h, T, c_d, grid.size);
    LanczosDecomposition dec = lanczos(op, g, k);
    const GridFunction approx = expmv_lanczos(dec, T);
    const GridFunction exact = expmv_spectral(full, T);
    std::vector<double> diff(exact.values);
    kernels::axpy(-1.0, approx.values, std::span<double>(diff));
    const double measured = kernels::norm2(diff);
    const double bound = hochbruck_lubich_bound(rho * T, dec.k, g_norm);
    rows.push_back(json{{"T", T},
                        {"k", dec.k},
                        {"measured_error", measured},
                        {"hochbruck_lubich_bound", bound},
                        {"est_arnoldi_bound", 10.0 * g_norm * std::exp(-T / 5.0)},
                        {"contraction_ok", kernels::norm2(approx.values) <= g_norm * (1.0 + 1e-12)},
                        {"orthogonality_defect", dec.orthogonality_defect()}});
  }
  return json{{"config", cfg.raw},
              {"g_norm", g_norm},
              {"rho_estimate", rho},
              {"c_d", c_d},
              {"rows", rows}};
}

RateFit fit_rate(std::span<const double> x, std::span<const double> error, bool log_x,
                 double floor) {
  if (x.size() != error.size()) throw ConfigError("fit_rate: mismatched columns");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(error[i] > floor) || !std::isfinite(error[i]) || !std::isfinite(x[i])) continue;
    xs.push_back(log_x ? std::log(x[i]) : x[i]);
    ys.push_back(std::log(error[i]));
  }
  if (xs.size() < 3) throw ConfigError("fit_rate needs at least 3 rows above the floor");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ConfigError("fit_rate: degenerate abscissae");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

std::string study_csv(const std::vector<StudyRow>& rows, bool with_timings) {
  std::string out = "R,L,T,method,q,error_frob,error_baseline,k,N_modes,bound,cg_iters,runtime_ms\n";
  for (const StudyRow& row : rows) {
    append_number(out, row.R);
    out += ',';
    append_number(out, row.L);
    out += ',';
    append_number(out, row.T);
    out += ',';
    out += row.failed ? "failed:" + row.failure : row.method;
    out += ',';
    if (row.q < 0)
      out += "inf";
    else
      out += std::to_string(row.q);
    out += ',';
    if (!row.failed) append_number(out, row.error_frob);
    out += ',';
    if (row.error_baseline) append_number(out, *row.error_baseline);
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    out += std::to_string(row.n_modes);
    out += ',';
    append_number(out, row.bound);
    out += ',';
    out += std::to_string(row.cg_iters);
    out += ',';
    append_number(out, with_timings ? row.runtime_ms : 0.0);
    out += '\n';
  }
  return out;
}

std::vector<double> read_csv_column(const std::string& csv_text, const std::string& column) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  std::vector<std::string> headers;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) headers.push_back(cell);
  }
  int target = -1;
  for (std::size_t i = 0; i < headers.size(); ++i)
    if (headers[i] == column) target = static_cast<int>(i);
  if (target < 0) throw ConfigError("CSV has no column '" + column + "'");
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int idx = 0;
    double value = std::numeric_limits<double>::quiet_NaN();
    while (std::getline(ls, cell, ',')) {
      if (idx == target && !cell.empty()) {
        char* end = nullptr;
        value = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) value = std::numeric_limits<double>::quiet_NaN();
      }
      ++idx;
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace reshom
