#pragma once

#include <optional>

namespace afcomb {

enum class ActivationKind {
  kAffine,  // f(a) = a
  kSigmoid, // f(a) = 1/(1+exp(-a))
};

// f and its first two derivatives at a.
struct ActivationEval {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

ActivationEval activation_eval(ActivationKind kind, double a);

// p(i) = beta*e^2 + (1-beta)*p(i-1).
double normalized_power_update(double p, double e, double beta);

// Normalized step-size variant: effective step mu_a/(p(i)+epsilon).
struct Normalization {
  double beta = 0.9;
  double epsilon = 1e-2;
  double power = 0.0; // p(i)
};

// Supervisor of the mixing parameter eta = f(a). The auxiliary variable a
// is saturated to [a_min, a_max] after every additive update.
struct SupervisorState {
  double a = 0.0;
  double eta = 0.5;
  double mu_a = 0.0;
  ActivationKind activation = ActivationKind::kSigmoid;
  double a_min = -4.0;
  double a_max = 4.0;
  std::optional<Normalization> normalization;
};

// Convex (sigmoid) supervisor with the conventional saturation range and
// neutral initial mixture eta = 0.5.
SupervisorState make_convex_supervisor(double mu_a, double a_min = -4.0,
                                       double a_max = 4.0);

// Affine supervisor; a carries eta directly.
SupervisorState make_affine_supervisor(double mu_eta, double eta_min = -0.25,
                                       double eta_max = 1.25);

// Stochastic-gradient step on a driven by the global error and the
// component output difference:
//   a <- clamp(a + step * e * (y1 - y2) * f'(a), a_min, a_max),  eta = f(a),
// where step is mu_a, or mu_a/(p+epsilon) for the normalized variant with
// p updated from the global error first.
void supervisor_update(SupervisorState& state, double e, double y1, double y2);

}  // namespace afcomb
