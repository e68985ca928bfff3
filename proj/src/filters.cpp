#include "afcomb/filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace afcomb {

double lms_predict(const Eigen::VectorXd& w, const Eigen::VectorXd& u) {
  if (w.size() != u.size())
    throw std::invalid_argument("lms_predict: dimension mismatch");
  return u.dot(w);
}

Eigen::VectorXd lms_update(const Eigen::VectorXd& w_a, const Eigen::VectorXd& u,
                           double d, double mu) {
  if (w_a.size() != u.size())
    throw std::invalid_argument("lms_update: dimension mismatch");
  if (!(mu >= 0.0))
    throw std::invalid_argument("lms_update: step size must be nonnegative");
  if (!std::isfinite(d))
    throw std::runtime_error("lms_update: non-finite desired sample");
  const double e = d - u.dot(w_a);
  return w_a + (mu * e) * u;
}

VssLmsOutput vss_lms_step(VssLmsState& state, const Eigen::VectorXd& u, double d) {
  if (state.w.size() != u.size())
    throw std::invalid_argument("vss_lms_step: dimension mismatch");
  VssLmsOutput out;
  out.y = u.dot(state.w);
  out.e = d - out.y;
  state.mu = std::clamp(state.alpha_vss * state.mu + state.g_vss * out.e * out.e,
                        state.mu_min, state.mu_max);
  state.w += (state.mu * out.e) * u;
  return out;
}

}  // namespace afcomb
