#include "afcomb/supervisors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afcomb {

ActivationEval activation_eval(ActivationKind kind, double a) {
  ActivationEval out;
  switch (kind) {
    case ActivationKind::kAffine:
      out.f = a;
      out.df = 1.0;
      out.d2f = 0.0;
      break;
    case ActivationKind::kSigmoid: {
      // tanh form is stable for any a; derivatives follow from f' = f(1-f).
      out.f = 0.5 * (1.0 + std::tanh(0.5 * a));
      out.df = out.f * (1.0 - out.f);
      out.d2f = out.df * (1.0 - 2.0 * out.f);
      break;
    }
  }
  return out;
}

double normalized_power_update(double p, double e, double beta) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("normalized_power_update: beta must lie in (0,1]");
  if (!(p >= 0.0))
    throw std::invalid_argument("normalized_power_update: p must be nonnegative");
  return beta * e * e + (1.0 - beta) * p;
}

SupervisorState make_convex_supervisor(double mu_a, double a_min, double a_max) {
  SupervisorState s;
  s.activation = ActivationKind::kSigmoid;
  s.mu_a = mu_a;
  s.a_min = a_min;
  s.a_max = a_max;
  s.a = 0.0; // eta(-1) = 0.5
  s.eta = activation_eval(s.activation, s.a).f;
  return s;
}

SupervisorState make_affine_supervisor(double mu_eta, double eta_min,
                                       double eta_max) {
  SupervisorState s;
  s.activation = ActivationKind::kAffine;
  s.mu_a = mu_eta;
  s.a_min = eta_min;
  s.a_max = eta_max;
  s.a = 0.5; // eta(-1) = 0.5
  s.eta = s.a;
  return s;
}

namespace {

void check_finite(double value, const char* name) {
  if (!std::isfinite(value))
    throw std::runtime_error(std::string("supervisor_update: non-finite ") + name);
}

}  // namespace

void supervisor_update(SupervisorState& state, double e, double y1, double y2) {
  check_finite(e, "global error e");
  check_finite(y1, "component output y1");
  check_finite(y2, "component output y2");
  if (!(state.a_min < state.a_max))
    throw std::invalid_argument("supervisor_update: requires a_min < a_max");

  double step = state.mu_a;
  if (state.normalization) {
    auto& norm = *state.normalization;
    norm.power = normalized_power_update(norm.power, e, norm.beta);
    step = state.mu_a / (norm.power + norm.epsilon);
    check_finite(step, "normalized step");
  }

  const ActivationEval act = activation_eval(state.activation, state.a);
  const double increment = step * e * (y1 - y2) * act.df;
  check_finite(increment, "update increment");

  state.a = std::clamp(state.a + increment, state.a_min, state.a_max);
  state.eta = activation_eval(state.activation, state.a).f;
}

}  // namespace afcomb
