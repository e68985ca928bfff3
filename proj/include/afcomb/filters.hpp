#pragma once

#include <Eigen/Dense>

namespace afcomb {

// One component LMS filter: coefficients and step size.
struct FilterState {
  Eigen::VectorXd w;
  double mu = 0.0;
};

// Inner product u'w, the filter output.
double lms_predict(const Eigen::VectorXd& w, const Eigen::VectorXd& u);

// LMS recursion w_a + mu*u*(d - u'w_a). The caller supplies the a-priori
// coefficients chosen by the topology. mu = 0 is accepted as a degenerate
// test hook (no adaptation).
Eigen::VectorXd lms_update(const Eigen::VectorXd& w_a, const Eigen::VectorXd& u,
                           double d, double mu);

// Variable step size LMS with the recursion
//   mu(i) = clamp(alpha_vss*mu(i-1) + g_vss*e(i)^2, mu_min, mu_max),
// applied before the coefficient step, which then uses mu(i).
struct VssLmsState {
  Eigen::VectorXd w;
  double mu = 0.0;
  double alpha_vss = 0.95;
  double g_vss = 0.1;
  double mu_min = 0.0;
  double mu_max = 0.0;
};

struct VssLmsOutput {
  double y = 0.0;
  double e = 0.0;
};

VssLmsOutput vss_lms_step(VssLmsState& state, const Eigen::VectorXd& u, double d);

}  // namespace afcomb
