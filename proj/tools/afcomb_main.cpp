// Command line front end: Monte Carlo simulation, theoretical model
// evaluation, and curve comparison for two-LMS parallel combinations.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "afcomb/harness.hpp"
#include "afcomb/metrics.hpp"

namespace {

struct CommonOverrides {
  std::string out;
  std::uint64_t seed = 0;
  long realizations = 0;
  long horizon = 0;
  int workers = -1;
  bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOverrides& common, bool with_workers) {
  cmd->add_option("--out", common.out, "Output CSV path (overrides config)");
  cmd->add_option("--seed", common.seed, "Scenario seed (overrides config)")
      ->each([&common](const std::string&) { common.has_seed = true; });
  cmd->add_option("--realizations", common.realizations,
                  "Ensemble size (overrides config)");
  cmd->add_option("--horizon", common.horizon, "Horizon (overrides config)");
  if (with_workers)
    cmd->add_option("--workers", common.workers,
                    "Worker threads (0 = hardware concurrency)");
}

afcomb::ExperimentConfig load_with_overrides(const std::string& path,
                                             const CommonOverrides& common) {
  afcomb::ExperimentConfig cfg = afcomb::load_experiment_config(path);
  if (common.has_seed) cfg.scenario.seed = common.seed;
  if (common.realizations > 0) cfg.ensemble_size = common.realizations;
  if (common.horizon > 0) {
    cfg.scenario.horizon = common.horizon;
    cfg.steady_state_window =
        std::min(cfg.steady_state_window, cfg.scenario.horizon);
  }
  if (common.workers >= 0) cfg.workers = common.workers;
  if (!common.out.empty()) cfg.output_path = common.out;
  cfg.validate();
  return cfg;
}

int run_simulate(const std::string& config_path, const CommonOverrides& common) {
  const afcomb::ExperimentConfig cfg = load_with_overrides(config_path, common);
  const afcomb::EnsembleResult result = afcomb::run_ensemble(cfg);

  const double ss = afcomb::estimate_steady_state(result.combination.emse,
                                                  cfg.steady_state_window);
  std::printf("realizations: %ld (divergent %ld)\n",
              result.combination.n_realizations, result.combination.divergent);
  std::printf("steady-state emse (last %ld iterations): %.6g (%.2f dB)\n",
              cfg.steady_state_window, ss, afcomb::to_db(ss));
  for (const auto& baseline : result.baselines) {
    const double bss =
        afcomb::estimate_steady_state(baseline.emse, cfg.steady_state_window);
    std::printf("baseline %s steady-state emse: %.6g (%.2f dB)\n",
                baseline.name.c_str(), bss, afcomb::to_db(bss));
  }

  if (!cfg.output_path.empty()) {
    afcomb::write_metrics_csv(result.combination, cfg.output_path);
    std::printf("wrote %s\n", cfg.output_path.c_str());
    for (const auto& baseline : result.baselines) {
      const std::string path = cfg.output_path + "." + baseline.name + ".csv";
      afcomb::write_series_csv(baseline, path);
      std::printf("wrote %s\n", path.c_str());
    }
  }
  return 0;
}

int run_theory_cmd(const std::string& config_path, const CommonOverrides& common,
                   const std::string& path_name) {
  const afcomb::ExperimentConfig cfg = load_with_overrides(config_path, common);
  afcomb::TheoryPath path = afcomb::TheoryPath::kAuto;
  if (path_name == "general") path = afcomb::TheoryPath::kGeneral;
  if (path_name == "white") path = afcomb::TheoryPath::kWhite;

  const afcomb::TheoryResult result = afcomb::run_theory(cfg, path);
  if (result.steady_state) {
    std::printf("steady-state prediction: eta_bar %.6g, mu_bar %.6g, emse %.6g "
                "(%.2f dB)\n",
                result.steady_state->eta_bar, result.steady_state->mu_bar,
                result.steady_state->emse,
                afcomb::to_db(result.steady_state->emse));
  }
  if (result.steady_state_unreliable)
    std::printf("warning: steady-state model unreliable here (stationary "
                "scenario with a vanishing net step in the activation range)\n");
  const double final_zeta = result.table.emse.back();
  std::printf("transient model final emse: %.6g (%.2f dB)\n", final_zeta,
              afcomb::to_db(final_zeta));
  if (!cfg.output_path.empty()) {
    afcomb::write_metrics_csv(result.table, cfg.output_path);
    std::printf("wrote %s\n", cfg.output_path.c_str());
  }
  return 0;
}

int run_compare(const std::string& sim_path, const std::string& theory_path,
                double band_db, const std::string& out) {
  const afcomb::MetricsTable sim = afcomb::read_metrics_csv(sim_path);
  const afcomb::MetricsTable theory = afcomb::read_metrics_csv(theory_path);
  const afcomb::CompareReport report = afcomb::compare(sim, theory, band_db);
  std::printf("%s\n", report.to_json().c_str());
  if (!out.empty()) {
    std::ofstream stream(out, std::ios::binary);
    stream << report.to_json() << "\n";
    if (!stream) {
      std::fprintf(stderr, "error: failed writing %s\n", out.c_str());
      return 1;
    }
  }
  return report.max_abs_db <= band_db ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel combinations of LMS adaptive filters: simulation, "
               "theory, and comparison"};
  app.require_subcommand(1);

  CommonOverrides sim_common;
  std::string sim_config;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a Monte Carlo ensemble");
  simulate->add_option("config", sim_config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(simulate, sim_common, true);

  CommonOverrides theory_common;
  std::string theory_config;
  std::string theory_path_name = "auto";
  CLI::App* theory = app.add_subcommand("theory", "Evaluate the models");
  theory->add_option("config", theory_config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  theory->add_option("--path", theory_path_name, "auto | general | white")
      ->check(CLI::IsMember({"auto", "general", "white"}));
  add_common(theory, theory_common, false);

  std::string cmp_sim, cmp_theory, cmp_out;
  double band_db = 1.0;
  CLI::App* cmp = app.add_subcommand("compare", "Compare two EMSE tables");
  cmp->add_option("sim", cmp_sim, "Simulation CSV")->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("theory", cmp_theory, "Theory CSV")->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--band-db", band_db, "Agreement band in dB");
  cmp->add_option("--out", cmp_out, "Write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim_config, sim_common);
    if (theory->parsed())
      return run_theory_cmd(theory_config, theory_common, theory_path_name);
    if (cmp->parsed()) return run_compare(cmp_sim, cmp_theory, band_db, cmp_out);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
