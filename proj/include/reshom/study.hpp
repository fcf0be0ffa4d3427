#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reshom/upscale.hpp"

namespace reshom {

/// Configuration for single jobs and R-sweeps, parsed from a JSON document.
/// Validation failures throw ConfigError naming the offending field.
struct StudyConfig {
  nlohmann::json raw;  // embedded verbatim in every report
  CoefficientField field = CoefficientField::family("constant", {{"c", 1.0}});
  int n_per_unit = 16;
  std::vector<double> r_values;
  double k_o = 0.5;
  std::optional<double> c1;  // default alpha pi^2 / d
  double c2 = 0.1;
  int filter_q = 0;  // -1: infinite order
  CorrectionMethod method = CorrectionMethod::Lanczos;
  CellParams cell;
  bool baseline = false;
  std::optional<double> l_override;
  std::optional<double> t_override;
  int reference_n = 0;  // 0: twice the study resolution
  bool richardson = true;
  std::vector<double> t_list;  // expmv-check sweep

  static StudyConfig from_json(const nlohmann::json& doc);

  double effective_c1() const;
};

struct StudyRow {
  double R = 0.0, L = 0.0, T = 0.0;
  std::string method;
  int q = 0;
  double error_frob = 0.0;
  std::optional<double> error_baseline;
  index_t k = 0;
  index_t n_modes = 0;
  double bound = 0.0;
  index_t cg_iters = 0;
  double runtime_ms = 0.0;
  std::vector<double> per_entry_error;
  bool failed = false;
  std::string failure;
  int failure_code = 0;  // CLI exit code semantics: 2 config, 3 solver, 4 hypothesis
};

struct StudyResult {
  std::vector<StudyRow> rows;
  HomogenizedTensor reference;
  HomogenizedTensor reference_raw;
};

/// One homogenization (plus the periodic reference when available); returns
/// the JSON report with the verbatim config embedded.
nlohmann::json run_job(const StudyConfig& config);

/// Sweeps the R list with L, T from select_parameters; rows are ordered by R
/// regardless of worker completion order. The baseline column reruns each R
/// with the uncorrected cell problem and the flat filter.
StudyResult run_study(const StudyConfig& config);

/// Krylov-versus-dense-spectral diagnostics over the configured T values.
nlohmann::json run_expmv_check(const StudyConfig& config);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

/// Ordinary least squares of log(error) against x (or log x); rows at or
/// below the floor are excluded; needs at least 3 usable rows.
RateFit fit_rate(std::span<const double> x, std::span<const double> error, bool log_x,
                 double floor);

/// CSV with the exact column set
/// R,L,T,method,q,error_frob,error_baseline,k,N_modes,bound,cg_iters,runtime_ms;
/// 17 significant digits, '.' decimal. with_timings=false zeroes the runtime
/// column so byte-identical output is reproducible.
std::string study_csv(const std::vector<StudyRow>& rows, bool with_timings);

/// Reads one numeric column of a study CSV (empty cells skipped as NaN).
std::vector<double> read_csv_column(const std::string& csv_text, const std::string& column);

nlohmann::json tensor_to_json(const HomogenizedTensor& tensor);

}  // namespace reshom
