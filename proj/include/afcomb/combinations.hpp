#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <utility>

#include "afcomb/filters.hpp"
#include "afcomb/supervisors.hpp"

namespace afcomb {

enum class TopologyKind {
  kIndependent,    // w_{n,a} = w_{n,i-1}
  kLeakage,        // filter 2 mixes in filter 1's previous coefficients
  kHandover,       // filter 2 cyclically and conditionally copies filter 1
  kCyclicFeedback, // every L iterations, w_{n,a} = w_{i-1}
};

struct Topology {
  TopologyKind kind = TopologyKind::kIndependent;
  long cycle_period = 1;       // L; > horizon effectively disables feedback
  double alpha_bar = 0.0;      // leakage amount in [0,1]
  double eta_threshold = 0.98; // leakage/handover condition on eta(i-1)

  void validate() const {
    if (cycle_period < 1)
      throw std::invalid_argument("topology: cycle_period must satisfy L >= 1");
    if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0))
      throw std::invalid_argument("topology: alpha_bar must lie in [0,1]");
  }
};

// Per-iteration probe values. The a-priori-error fields require the true
// system and stay NaN otherwise.
struct StepDiagnostics {
  double y1 = 0.0;
  double y2 = 0.0;
  double y_global = 0.0;
  double e = 0.0;  // global error against w_global(i-1)
  double e1 = 0.0; // error against the a-priori coefficients of filter 1
  double e2 = 0.0;
  double eta = 0.0;
  double a = 0.0;
  double net_mu = 0.0; // eta*mu1 + (1-eta)*mu2
  double e_a = std::numeric_limits<double>::quiet_NaN();
  double e_a1 = std::numeric_limits<double>::quiet_NaN();
  double e_a2 = std::numeric_limits<double>::quiet_NaN();
};

// A realization aborts instead of propagating non-finite coefficients into
// ensemble averages.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

struct CombinationState {
  FilterState filter1;
  FilterState filter2;
  SupervisorState supervisor;
  Topology topology;
  Eigen::VectorXd w_global; // eta*w1 + (1-eta)*w2 of the previous iteration
  long iteration = 0;

  Eigen::VectorXd scratch; // leakage needs filter 1's pre-update coefficients
};

// Zero-initialized filters; w_global consistent with the supervisor's
// initial eta.
CombinationState make_combination(int filter_length, double mu1, double mu2,
                                  SupervisorState supervisor, Topology topology);

// eta*w1 + (1-eta)*w2.
Eigen::VectorXd combine_output(double eta, const Eigen::VectorXd& w1,
                               const Eigen::VectorXd& w2);

// eta*mu1 + (1-eta)*mu2, the effective step of an L=1 feedback combination.
double net_step_size(double eta, double mu1, double mu2);

// A-priori coefficients per topology. Feedback replaces both with the
// previous global vector when i mod L = 0; leakage and handover transfers
// act after the update and return the filters' own previous coefficients.
std::pair<Eigen::VectorXd, Eigen::VectorXd> apriori_coefficients(
    const Topology& topology, long i, double eta_prev,
    const Eigen::VectorXd& w1_prev, const Eigen::VectorXd& w2_prev,
    const Eigen::VectorXd& w_global_prev);

// One full pipeline step: component outputs, global error, a-priori
// selection, filter updates, topology post-transfer, supervisor update,
// and the new global coefficients.
StepDiagnostics combination_step(CombinationState& state,
                                 const Eigen::VectorXd& u, double d,
                                 const Eigen::VectorXd* w_true = nullptr);

}  // namespace afcomb
