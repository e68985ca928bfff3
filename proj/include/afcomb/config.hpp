#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afcomb/combinations.hpp"
#include "afcomb/scenario.hpp"
#include "afcomb/supervisors.hpp"

namespace afcomb {

struct SupervisorConfig {
  ActivationKind kind = ActivationKind::kSigmoid;
  double mu_a = 100.0;
  std::optional<double> a_min; // defaults depend on the activation
  std::optional<double> a_max;
  bool normalized = false;
  double beta = 0.9;
  double epsilon = 1e-2;
  double init_eta = 0.5;
};

struct CombinationConfig {
  TopologyKind topology = TopologyKind::kIndependent;
  double mu1 = 0.0;
  double mu2 = 0.0;
  long L = 1;
  double alpha_bar = 0.0;
  double eta_th = 0.98;
  SupervisorConfig supervisor;
};

struct BaselinesConfig {
  std::vector<double> lms; // step sizes of standalone LMS baselines
  bool vss = false;
  double alpha_vss = 0.95;
  double g_vss = 0.1;
  std::optional<double> mu_min; // default mu2
  std::optional<double> mu_max; // default mu1
  std::optional<double> mu_init; // default mu_max
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  CombinationConfig combination;
  BaselinesConfig baselines;
  long ensemble_size = 300;
  long steady_state_window = 1000;
  std::string output_path;
  int workers = 0; // 0 selects hardware concurrency

  void validate() const;
};

// Builds a live supervisor from the configuration, applying the
// per-activation saturation defaults.
SupervisorState make_supervisor(const SupervisorConfig& cfg);

Topology make_topology(const CombinationConfig& cfg);

CombinationState make_combination_state(const ExperimentConfig& cfg);

// Flat sectioned key=value format; sections [scenario], [combination],
// [supervisor], [baselines], [harness]. Unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Inverse of parse_experiment_config up to formatting; round-trips all
// values at full precision.
std::string experiment_config_to_text(const ExperimentConfig& cfg);

}  // namespace afcomb
