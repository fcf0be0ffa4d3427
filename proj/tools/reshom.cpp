#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reshom/errors.hpp"
#include "reshom/study.hpp"

namespace {

using nlohmann::json;

reshom::StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw reshom::ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw reshom::ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return reshom::StudyConfig::from_json(doc);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw reshom::ConfigError("cannot open output file '" + out_path + "'");
  out << text;
}

int study_exit_code(const std::vector<reshom::StudyRow>& rows) {
  int code = 0;
  for (const auto& row : rows)
    if (row.failed) code = std::max(code, row.failure_code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effective-coefficient solver for oscillatory elliptic operators"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path, x_column = "logR", column = "error_frob";
  double floor = 0.0;
  bool no_timings = false;

  CLI::App* cmd_hom = app.add_subcommand("homogenize", "run one homogenization job");
  cmd_hom->add_option("config", config_path, "JSON config")->required();
  cmd_hom->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* cmd_ref = app.add_subcommand("reference", "periodic exact reference");
  cmd_ref->add_option("config", config_path)->required();
  cmd_ref->add_option("--out", out_path);

  CLI::App* cmd_study = app.add_subcommand("study", "R-sweep convergence study (CSV)");
  cmd_study->add_option("config", config_path)->required();
  cmd_study->add_option("--out", out_path);
  cmd_study->add_flag("--no-timings", no_timings, "zero the runtime column (reproducible output)");

  CLI::App* cmd_expmv = app.add_subcommand("expmv-check", "Krylov vs dense-spectral diagnostics");
  cmd_expmv->add_option("config", config_path)->required();
  cmd_expmv->add_option("--out", out_path);

  CLI::App* cmd_rate = app.add_subcommand("rate", "least-squares rate fit on a study CSV");
  cmd_rate->add_option("csv", csv_path, "study CSV path")->required();
  cmd_rate->add_option("--x", x_column, "abscissa: R or logR")->check(CLI::IsMember({"R", "logR"}));
  cmd_rate->add_option("--floor", floor, "exclude rows with error <= floor");
  cmd_rate->add_option("--col", column, "error column to fit");
  cmd_rate->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_hom->parsed()) {
      emit(reshom::run_job(load_config(config_path)).dump(2), out_path);
    } else if (cmd_ref->parsed()) {
      const reshom::StudyConfig cfg = load_config(config_path);
      const int n_ref = cfg.reference_n > 0 ? cfg.reference_n : 2 * cfg.n_per_unit;
      const reshom::HomogenizedTensor fine =
          reshom::exact_reference(cfg.field, n_ref, cfg.cell.cg_tol);
      json report{{"config", cfg.raw}, {"reference", reshom::tensor_to_json(fine)}};
      if (cfg.richardson && n_ref % 2 == 0 && n_ref / 2 >= 3) {
        const reshom::HomogenizedTensor coarse =
            reshom::exact_reference(cfg.field, n_ref / 2, cfg.cell.cg_tol);
        report["reference_richardson"] =
            reshom::tensor_to_json(reshom::richardson_combine(coarse, fine));
      }
      emit(report.dump(2), out_path);
    } else if (cmd_study->parsed()) {
      const reshom::StudyResult result = reshom::run_study(load_config(config_path));
      emit(reshom::study_csv(result.rows, !no_timings), out_path);
      const int code = study_exit_code(result.rows);
      if (code != 0) {
        for (const auto& row : result.rows)
          if (row.failed) std::cerr << "row R=" << row.R << " failed: " << row.failure << '\n';
        return code;
      }
    } else if (cmd_expmv->parsed()) {
      emit(reshom::run_expmv_check(load_config(config_path)).dump(2), out_path);
    } else if (cmd_rate->parsed()) {
      std::ifstream in(csv_path);
      if (!in) throw reshom::ConfigError("cannot open CSV '" + csv_path + "'");
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const std::vector<double> r = reshom::read_csv_column(text, "R");
      const std::vector<double> err = reshom::read_csv_column(text, column);
      const reshom::RateFit fit = reshom::fit_rate(r, err, x_column == "logR", floor);
      emit(json{{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"r_squared", fit.r_squared},
                {"points_used", fit.points_used},
                {"x", x_column},
                {"column", column}}
               .dump(2),
           out_path);
    }
  } catch (const reshom::HypothesisError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const reshom::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const reshom::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const reshom::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
