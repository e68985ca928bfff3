#include "afcomb/combinations.hpp"

#include <cmath>
#include <string>

namespace afcomb {

CombinationState make_combination(int filter_length, double mu1, double mu2,
                                  SupervisorState supervisor, Topology topology) {
  if (filter_length < 1)
    throw std::invalid_argument("make_combination: filter_length must be >= 1");
  if (!(mu1 > 0.0) || !(mu2 > 0.0))
    throw std::invalid_argument("make_combination: step sizes must be positive");
  topology.validate();
  CombinationState s;
  s.filter1 = {Eigen::VectorXd::Zero(filter_length), mu1};
  s.filter2 = {Eigen::VectorXd::Zero(filter_length), mu2};
  s.supervisor = std::move(supervisor);
  s.topology = topology;
  s.w_global = combine_output(s.supervisor.eta, s.filter1.w, s.filter2.w);
  s.scratch = Eigen::VectorXd::Zero(filter_length);
  return s;
}

Eigen::VectorXd combine_output(double eta, const Eigen::VectorXd& w1,
                               const Eigen::VectorXd& w2) {
  if (w1.size() != w2.size())
    throw std::invalid_argument("combine_output: dimension mismatch");
  return eta * w1 + (1.0 - eta) * w2;
}

double net_step_size(double eta, double mu1, double mu2) {
  return eta * mu1 + (1.0 - eta) * mu2;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> apriori_coefficients(
    const Topology& topology, long i, double /*eta_prev*/,
    const Eigen::VectorXd& w1_prev, const Eigen::VectorXd& w2_prev,
    const Eigen::VectorXd& w_global_prev) {
  topology.validate();
  if (topology.kind == TopologyKind::kCyclicFeedback &&
      i % topology.cycle_period == 0)
    return {w_global_prev, w_global_prev};
  return {w1_prev, w2_prev};
}

StepDiagnostics combination_step(CombinationState& state,
                                 const Eigen::VectorXd& u, double d,
                                 const Eigen::VectorXd* w_true) {
  if (u.size() != state.filter1.w.size())
    throw std::invalid_argument("combination_step: regressor dimension mismatch");

  StepDiagnostics diag;
  diag.y1 = state.filter1.w.dot(u);
  diag.y2 = state.filter2.w.dot(u);
  diag.y_global = state.w_global.dot(u);
  diag.e = d - diag.y_global;
  if (!std::isfinite(diag.e) || !std::isfinite(diag.y1) ||
      !std::isfinite(diag.y2))
    throw DivergenceError(state.iteration,
                          "combination_step: non-finite error at iteration " +
                              std::to_string(state.iteration));

  if (w_true != nullptr) {
    const double uw_true = u.dot(*w_true);
    diag.e_a = uw_true - diag.y_global;
    diag.e_a1 = uw_true - diag.y1;
    diag.e_a2 = uw_true - diag.y2;
  }

  const Topology& topo = state.topology;
  const bool feedback_now = topo.kind == TopologyKind::kCyclicFeedback &&
                            state.iteration % topo.cycle_period == 0;
  const bool cycle_now = state.iteration % topo.cycle_period == 0;
  const double eta_prev = state.supervisor.eta;

  if (topo.kind == TopologyKind::kLeakage) state.scratch = state.filter1.w;

  if (feedback_now) {
    diag.e1 = diag.e;
    diag.e2 = diag.e;
    state.filter1.w = state.w_global + (state.filter1.mu * diag.e) * u;
    state.filter2.w = state.w_global + (state.filter2.mu * diag.e) * u;
  } else {
    diag.e1 = d - diag.y1;
    diag.e2 = d - diag.y2;
    state.filter1.w += (state.filter1.mu * diag.e1) * u;
    state.filter2.w += (state.filter2.mu * diag.e2) * u;
  }

  if (topo.kind == TopologyKind::kLeakage) {
    const double alpha =
        eta_prev >= topo.eta_threshold ? topo.alpha_bar : 0.0;
    if (alpha != 0.0)
      state.filter2.w = alpha * state.scratch + (1.0 - alpha) * state.filter2.w;
  } else if (topo.kind == TopologyKind::kHandover && cycle_now &&
             eta_prev >= topo.eta_threshold) {
    state.filter2.w = state.filter1.w;
  }

  try {
    supervisor_update(state.supervisor, diag.e, diag.y1, diag.y2);
  } catch (const std::runtime_error&) {
    // A non-finite supervisor intermediate inside the pipeline means the
    // realization is diverging (e.g. product overflow on finite inputs).
    throw DivergenceError(state.iteration,
                          "combination_step: supervisor overflow at iteration " +
                              std::to_string(state.iteration));
  }

  diag.eta = state.supervisor.eta;
  diag.a = state.supervisor.a;
  diag.net_mu = net_step_size(diag.eta, state.filter1.mu, state.filter2.mu);

  state.w_global = diag.eta * state.filter1.w + (1.0 - diag.eta) * state.filter2.w;
  if (!state.w_global.allFinite())
    throw DivergenceError(state.iteration,
                          "combination_step: non-finite coefficients at iteration " +
                              std::to_string(state.iteration));

  ++state.iteration;
  return diag;
}

}  // namespace afcomb
