#pragma once

#include <Eigen/Dense>

#include "afcomb/supervisors.hpp"

namespace afcomb {

// Inputs of the closed-form steady-state model for the two-LMS feedback
// combination.
struct SteadyStateInputs {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double tr_Ru = 0.0;    // trace of the regressor covariance
  double sigma2_v = 0.0; // measurement noise variance
  double tr_Q = 0.0;     // trace of the random-walk covariance
  double f_min = 0.0;    // f(a_min), lower end of the activation range
  double f_max = 1.0;    // f(a_max)
};

// Steady-state global EMSE of an LMS combination with net step mu_bar:
//   zeta = [mu_bar tr(Ru) sigma2_v + tr(Q)/mu_bar] / [2 - mu_bar tr(Ru)].
// tr_Q = 0 reduces to the stationary expression (mu_bar = 0 allowed there).
double steady_state_emse(double mu_bar, double tr_Ru, double sigma2_v,
                         double tr_Q);

struct OptimalEta {
  double eta_opt = 0.0; // unconstrained minimizer
  double eta_bar = 0.0; // eta_opt restricted to [f_min, f_max]
  double mu_bar = 0.0;  // eta_bar*mu1 + (1-eta_bar)*mu2
};

// Mean steady-state supervising parameter: the EMSE-minimizing root with
// nonnegative net step size, then projected onto the activation range.
OptimalEta optimal_eta(const SteadyStateInputs& in);

// eta_opt from steady-state error statistics:
//   eta_opt = (zeta2 - zeta12) / [(zeta1 - zeta12) + (zeta2 - zeta12)],
// the minimizer of eta^2 z1 + 2 eta(1-eta) z12 + (1-eta)^2 z2 and the
// fixed point of the mean supervisor update.
double optimal_eta_from_emse(double zeta1, double zeta2, double zeta12);

// Independent route to the steady-state EMSE: fixed-point iteration of the
// variance relation
//   mu_bar^2 tr(Ru) [zeta + sigma2_v] + tr(Q) = 2 mu_bar zeta
// under the small-supervisor-variance approximation. Agrees with
// steady_state_emse to machine precision; kept as a cross-check path.
double feedback_variance_fixed_point(double mu1, double mu2, double eta_bar,
                                     double tr_Ru, double sigma2_v, double tr_Q,
                                     double tol = 1e-14, int max_iter = 100000);

struct TransientParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma2_v = 0.0;
  double mu_a = 0.0;
  long cycle_period = 1;
  ActivationKind activation = ActivationKind::kSigmoid;
  double a_min = -4.0;
  double a_max = 4.0;
  double a_init = 0.0;     // mean auxiliary variable at i = -1
  double var_a_init = 0.0; // its variance at i = -1
};

// Per-iteration model outputs. zeta* are the EMSE values at iteration i
// (errors measured against the previous coefficients); a_mean/a_var and the
// eta moments are the post-update supervisor statistics of iteration i.
struct TransientOutputs {
  double zeta = 0.0;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double zeta12 = 0.0;
  double mean_eta = 0.0;
  double mean_eta_sq = 0.0;
  double a_mean = 0.0;
  double a_var = 0.0;
};

// Recursive transient model for the stationary scenario: whitened error
// covariance recursions with a feedback branch every cycle_period
// iterations, plus mean/variance recursions for the supervisor state under
// a first-order linearization of the activation function.
class TransientModel {
 public:
  TransientModel(const Eigen::VectorXd& w_true, const Eigen::MatrixXd& R_u,
                 const TransientParams& params);

  TransientOutputs step();

  long iteration() const { return iteration_; }
  // Worst symmetry drift of the component covariances seen so far.
  double max_symmetry_drift() const { return max_symmetry_drift_; }

 private:
  TransientParams p_;
  Eigen::VectorXd lambda_; // eigenvalues of R_u
  Eigen::MatrixXd k1_, k2_, k12_;
  double a_mean_ = 0.0;
  double a_var_ = 0.0;
  long iteration_ = 0;
  double max_symmetry_drift_ = 0.0;
};

// Scalar specialization of the transient model for white input,
// R_u = sigma2_u I. Matches TransientModel on white scenarios.
class WhiteTransientModel {
 public:
  WhiteTransientModel(double sigma2_u, int filter_length, double w_true_norm_sq,
                      const TransientParams& params);

  TransientOutputs step();

  long iteration() const { return iteration_; }

 private:
  double sigma2_u_ = 0.0;
  int m_ = 0;
  TransientParams p_;
  double z1_ = 0.0, z2_ = 0.0, z12_ = 0.0;
  double a_mean_ = 0.0;
  double a_var_ = 0.0;
  long iteration_ = 0;
};

}  // namespace afcomb
