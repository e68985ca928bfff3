#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afcomb/config.hpp"
#include "afcomb/metrics.hpp"
#include "afcomb/theory.hpp"

namespace afcomb {

struct EnsembleResult {
  MetricsTable combination;
  std::vector<SeriesTable> baselines; // one per LMS step, then VSS if enabled
};

// Runs ensemble_size independent realizations and accumulates per-iteration
// means. Realizations that diverge are counted and excluded; more than 1%
// divergent aborts the experiment. Output is identical for any worker
// count: realizations are accumulated in extended precision over a fixed
// chunk partition and merged in chunk order.
EnsembleResult run_ensemble(const ExperimentConfig& cfg);

enum class TheoryPath {
  kAuto,    // white-input recursions when ar_coefficient == 0
  kGeneral, // full covariance recursions
  kWhite,   // scalar recursions; requires a white scenario
};

struct SteadyStatePrediction {
  double eta_bar = 0.0;
  double mu_bar = 0.0;
  double emse = 0.0;
};

struct TheoryResult {
  MetricsTable table; // transient model outputs in the metrics schema
  std::optional<SteadyStatePrediction> steady_state;
  // The steady-state model is documented reliable for supervisors whose
  // activation range keeps the net step away from zero; flagged otherwise.
  bool steady_state_unreliable = false;
};

// Evaluates the transient model over the configured horizon plus the
// steady-state prediction. The transient model covers the unnormalized
// supervisor and cyclic feedback or parallel-independent topologies.
TheoryResult run_theory(const ExperimentConfig& cfg,
                        TheoryPath path = TheoryPath::kAuto);

struct CompareReport {
  double band_db = 0.0;
  double max_abs_db = 0.0;
  double mean_abs_db = 0.0;
  double fraction_within = 0.0;
  long n = 0;

  bool pass() const { return fraction_within >= 1.0; }
  std::string to_json() const;
};

// Per-iteration dB deviation of the EMSE columns of two aligned tables.
CompareReport compare(const MetricsTable& sim, const MetricsTable& theory,
                      double band_db);

}  // namespace afcomb
