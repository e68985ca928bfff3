#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "afcomb/rng.hpp"

namespace afcomb {

// One phase of the plant process-noise schedule: from start_iteration on,
// the random walk uses covariance Q = sigma2_q * I.
struct ProcessNoisePhase {
  long start_iteration = 0;
  double sigma2_q = 0.0;
};

// Full description of a system-identification experiment data source.
struct ScenarioConfig {
  int filter_length = 1;       // M, taps of the unknown system / regressor
  double input_variance = 1.0; // stationary variance of u(i)
  double ar_coefficient = 0.0; // gamma in [0,1); 0 means white input
  double noise_variance = 0.0; // measurement noise variance
  std::vector<ProcessNoisePhase> process_noise_schedule{{0, 0.0}};
  // Empty vector selects the seeded unit-norm initialization; otherwise the
  // literal initial system, length filter_length.
  std::vector<double> true_system_init;
  long horizon = 1;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  // sigma2_q in force at iteration i: the phase with the largest
  // start_iteration <= i.
  double process_noise_at(long i) const;

  // Initial w^o. Shared by every realization of the same seed so that an
  // ensemble conditions on a single plant.
  Eigen::VectorXd initial_system() const;
};

struct SampleRecord {
  long iteration = 0;
  Eigen::VectorXd regressor;   // u_i, tapped delay line, u_i[k] = u(i-k)
  double desired = 0.0;        // d(i) = u_i' w^o_i + v(i)
  Eigen::VectorXd true_system; // w^o_i snapshot
};

// One AR(1) step: gamma*prev + sqrt(1-gamma^2)*x with x the innovation
// scaled to variance sigma2_u. gamma = 0 reduces to a white sequence.
double ar1_step(double prev, double gamma, double innovation, double sigma2_u);

// w_prev + q with q ~ N(0, sigma2_q I). sigma2_q = 0 returns w_prev
// bit-exactly and consumes no randomness.
Eigen::VectorXd random_walk_step(const Eigen::VectorXd& w_prev, double sigma2_q,
                                 GaussianStream& rng);

// Streaming generator for one realization. Deterministic given
// (cfg.seed, realization_index); input, noise, and walk use independent
// substreams. The delay line is pre-rolled with M-1 input samples so u_0
// is fully populated.
class StreamGenerator {
 public:
  StreamGenerator(ScenarioConfig cfg, std::uint64_t realization_index);

  SampleRecord next();

  long iteration() const { return iteration_; }
  const Eigen::VectorXd& true_system() const { return plant_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  ScenarioConfig cfg_;
  GaussianStream input_rng_;
  GaussianStream noise_rng_;
  GaussianStream walk_rng_;
  Eigen::VectorXd delay_line_;
  Eigen::VectorXd plant_;
  double prev_input_ = 0.0;
  long iteration_ = 0;
};

// Materializes the full stream of cfg.horizon records.
std::vector<SampleRecord> generate_stream(const ScenarioConfig& cfg,
                                          std::uint64_t realization_index);

}  // namespace afcomb
