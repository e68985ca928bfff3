#include "afcomb/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afcomb {

double steady_state_emse(double mu_bar, double tr_Ru, double sigma2_v,
                         double tr_Q) {
  if (!(tr_Ru > 0.0))
    throw std::domain_error("steady_state_emse: tr_Ru must be positive");
  if (!(sigma2_v >= 0.0) || !(tr_Q >= 0.0))
    throw std::domain_error("steady_state_emse: variances must be nonnegative");
  if (mu_bar * tr_Ru >= 2.0)
    throw std::domain_error(
        "steady_state_emse: stability violated, mu_bar*tr_Ru >= 2");
  if (tr_Q == 0.0) return mu_bar * tr_Ru * sigma2_v / (2.0 - mu_bar * tr_Ru);
  if (!(mu_bar > 0.0))
    throw std::domain_error(
        "steady_state_emse: mu_bar must be positive when tr_Q > 0");
  return (mu_bar * tr_Ru * sigma2_v + tr_Q / mu_bar) / (2.0 - mu_bar * tr_Ru);
}

OptimalEta optimal_eta(const SteadyStateInputs& in) {
  if (in.mu1 == in.mu2)
    throw std::domain_error(
        "optimal_eta: degenerate pool, mu1 == mu2 (use steady_state_emse "
        "with mu_bar = mu1 directly)");
  if (!(in.tr_Ru > 0.0))
    throw std::domain_error("optimal_eta: tr_Ru must be positive");
  if (!(in.sigma2_v > 0.0))
    throw std::domain_error("optimal_eta: sigma2_v must be positive");
  if (!(in.tr_Q >= 0.0))
    throw std::domain_error("optimal_eta: tr_Q must be nonnegative");

  const double c = std::sqrt(in.tr_Ru * in.tr_Ru * in.tr_Q * in.tr_Q +
                             4.0 * in.sigma2_v * in.tr_Ru * in.tr_Q);
  OptimalEta out;
  out.eta_opt = (c - in.tr_Ru * (in.tr_Q + 2.0 * in.mu2 * in.sigma2_v)) /
                (2.0 * (in.mu1 - in.mu2) * in.tr_Ru * in.sigma2_v);
  out.eta_bar = std::clamp(out.eta_opt, in.f_min, in.f_max);
  out.mu_bar = out.eta_bar * in.mu1 + (1.0 - out.eta_bar) * in.mu2;
  return out;
}

double optimal_eta_from_emse(double zeta1, double zeta2, double zeta12) {
  const double dz1 = zeta1 - zeta12;
  const double dz2 = zeta2 - zeta12;
  if (dz1 + dz2 == 0.0)
    throw std::domain_error(
        "optimal_eta_from_emse: degenerate pool, the component filters are "
        "statistically identical");
  return dz2 / (dz1 + dz2);
}

double feedback_variance_fixed_point(double mu1, double mu2, double eta_bar,
                                     double tr_Ru, double sigma2_v, double tr_Q,
                                     double tol, int max_iter) {
  const double mu_bar = eta_bar * mu1 + (1.0 - eta_bar) * mu2;
  if (!(mu_bar > 0.0))
    throw std::domain_error("feedback_variance_fixed_point: mu_bar must be positive");
  if (mu_bar * tr_Ru >= 2.0)
    throw std::domain_error(
        "feedback_variance_fixed_point: stability violated, mu_bar*tr_Ru >= 2");

  // zeta <- [mu_bar^2 tr(Ru)(zeta + sigma2_v) + tr(Q)] / (2 mu_bar) is a
  // contraction with factor mu_bar*tr_Ru/2 < 1.
  double zeta = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    const double next =
        (mu_bar * mu_bar * tr_Ru * (zeta + sigma2_v) + tr_Q) / (2.0 * mu_bar);
    if (std::abs(next - zeta) <= tol * std::max(1.0, std::abs(next))) return next;
    zeta = next;
  }
  throw std::runtime_error(
      "feedback_variance_fixed_point: no convergence within max_iter");
}

namespace {

struct SupervisorMoments {
  double mean_eta = 0.0;
  double mean_eta_sq = 0.0;
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

SupervisorMoments eta_moments(ActivationKind kind, double a_mean, double a_var) {
  const ActivationEval act = activation_eval(kind, a_mean);
  SupervisorMoments m;
  m.f = act.f;
  m.df = act.df;
  m.d2f = act.d2f;
  m.mean_eta = act.f;
  m.mean_eta_sq = act.f * act.f + a_var * act.df * act.df;
  return m;
}

// Mean and variance recursions of the auxiliary supervisor variable, from
// the linearized activation and the jointly-Gaussian a-priori errors. The
// mean mirrors the saturation of the simulated supervisor; the variance is
// floored at zero and, for finite bounds, capped by the largest variance a
// variable supported on [a_min, a_max] can have. Without the cap the
// linearized recursion can run away during the initial transient at large
// mu_a, where the saturated simulation stays bounded.
void supervisor_model_update(const TransientParams& p, const SupervisorMoments& m,
                             double dz1, double dz2, double z2, double& a_mean,
                             double& a_var) {
  const double f = m.f;
  const double df = m.df;
  const double d2f = m.d2f;
  const double mu_a = p.mu_a;

  a_mean = std::clamp(a_mean + mu_a * ((1.0 - f) * dz2 - f * dz1) * df, p.a_min,
                      p.a_max);

  const double dzs = dz1 + dz2;
  const double g1 = ((1.0 - f) * dz2 - f * dz1) * d2f - dzs * df * df;
  const double g2 = 3.0 * df * df * df * df * dzs * dzs +
                    d2f * d2f * (z2 * dzs + 2.0 * dz2 * dz2) +
                    3.0 * f * d2f * d2f * dzs * (f * dz1 - (2.0 - f) * dz2) +
                    6.0 * df * df * d2f * dzs * (f * dz1 - (1.0 - f) * dz2) +
                    d2f * d2f * dzs * p.sigma2_v;
  const double gv =
      df * df *
      (dz2 * dz2 +
       dzs * (2.0 * f * f * dzs - 4.0 * f * dz2 + z2 + p.sigma2_v));

  a_var = std::max(0.0, (1.0 + 2.0 * mu_a * g1 + mu_a * mu_a * g2) * a_var +
                            mu_a * mu_a * gv);
  const double half_range = 0.5 * (p.a_max - p.a_min);
  if (std::isfinite(half_range))
    a_var = std::min(a_var, half_range * half_range);
}

void validate_transient_params(const TransientParams& p) {
  if (!(p.mu1 > 0.0) || !(p.mu2 > 0.0))
    throw std::invalid_argument("transient model: step sizes must be positive");
  if (!(p.mu_a >= 0.0))
    throw std::invalid_argument("transient model: mu_a must be nonnegative");
  if (p.cycle_period < 1)
    throw std::invalid_argument("transient model: cycle_period must be >= 1");
  if (!(p.sigma2_v >= 0.0))
    throw std::invalid_argument("transient model: sigma2_v must be nonnegative");
  if (!(p.a_min < p.a_max))
    throw std::invalid_argument("transient model: requires a_min < a_max");
  if (!(p.var_a_init >= 0.0))
    throw std::invalid_argument("transient model: var_a_init must be nonnegative");
}

}  // namespace

TransientModel::TransientModel(const Eigen::VectorXd& w_true,
                               const Eigen::MatrixXd& R_u,
                               const TransientParams& params)
    : p_(params) {
  validate_transient_params(p_);
  const Eigen::Index m = w_true.size();
  if (R_u.rows() != m || R_u.cols() != m)
    throw std::invalid_argument("TransientModel: R_u dimension mismatch");
  if (!R_u.isApprox(R_u.transpose(), 1e-12))
    throw std::domain_error("TransientModel: R_u must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R_u);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("TransientModel: eigendecomposition failed");
  lambda_ = eig.eigenvalues();
  const double lam_max = lambda_.maxCoeff();
  if (lam_max <= 0.0 || lambda_.minCoeff() < -1e-12 * lam_max)
    throw std::domain_error("TransientModel: R_u must be positive semidefinite");
  for (Eigen::Index k = 0; k < m; ++k)
    if (lambda_[k] < 1e-12 * lam_max) lambda_[k] = 0.0;

  // Zero-initialized filters: K_{n,-1} = U' w^o w^o' U for every covariance.
  const Eigen::VectorXd w_hat = eig.eigenvectors().transpose() * w_true;
  k1_ = w_hat * w_hat.transpose();
  k2_ = k1_;
  k12_ = k1_;
  a_mean_ = p_.a_init;
  a_var_ = p_.var_a_init;
}

TransientOutputs TransientModel::step() {
  const Eigen::Index m = lambda_.size();
  const SupervisorMoments moments =
      eta_moments(p_.activation, a_mean_, a_var_);
  const double e2 = moments.mean_eta_sq;
  const double e1 = moments.mean_eta;

  TransientOutputs out;
  out.zeta1 = lambda_.dot(k1_.diagonal());
  out.zeta2 = lambda_.dot(k2_.diagonal());
  out.zeta12 = lambda_.dot(k12_.diagonal());
  const double dz1 = out.zeta1 - out.zeta12;
  const double dz2 = out.zeta2 - out.zeta12;
  out.zeta = e2 * (dz1 + dz2) - 2.0 * e1 * dz2 + out.zeta2;

  const auto lam = lambda_.asDiagonal();
  const auto fourth_moment = [&](const Eigen::MatrixXd& k) -> Eigen::MatrixXd {
    // sigma2_v*Lambda + Lambda*tr(K Lambda) + 2 Lambda K Lambda
    Eigen::MatrixXd a = 2.0 * (lam * k * lam);
    a.diagonal() += (p_.sigma2_v + lambda_.dot(k.diagonal())) * lambda_;
    return a;
  };

  const bool feedback = iteration_ % p_.cycle_period == 0;
  if (feedback) {
    // Global covariance assembled from the component covariances with the
    // separated eta moments.
    Eigen::MatrixXd kg = e2 * k1_ + (e1 - e2) * (k12_ + k12_.transpose()) +
                         (1.0 - 2.0 * e1 + e2) * k2_;
    const Eigen::MatrixXd a = fourth_moment(kg);
    const Eigen::MatrixXd kg_lam = kg * lam;
    const Eigen::MatrixXd lam_kg = lam * kg;
    k1_ = kg - p_.mu1 * (kg_lam + lam_kg) + (p_.mu1 * p_.mu1) * a;
    k2_ = kg - p_.mu2 * (kg_lam + lam_kg) + (p_.mu2 * p_.mu2) * a;
    k12_ = kg - p_.mu2 * kg_lam - p_.mu1 * lam_kg + (p_.mu1 * p_.mu2) * a;
  } else {
    const Eigen::MatrixXd a1 = fourth_moment(k1_);
    const Eigen::MatrixXd a2 = fourth_moment(k2_);
    const Eigen::MatrixXd a12 = fourth_moment(k12_);
    k1_ = (k1_ - p_.mu1 * (k1_ * lam + lam * k1_) + (p_.mu1 * p_.mu1) * a1).eval();
    k2_ = (k2_ - p_.mu2 * (k2_ * lam + lam * k2_) + (p_.mu2 * p_.mu2) * a2).eval();
    k12_ = (k12_ - p_.mu1 * (lam * k12_) - p_.mu2 * (k12_ * lam) +
            (p_.mu1 * p_.mu2) * a12)
               .eval();
  }

  // Component covariances stay symmetric up to roundoff; re-symmetrize and
  // track the drift.
  for (Eigen::MatrixXd* k : {&k1_, &k2_}) {
    const double drift = (*k - k->transpose()).cwiseAbs().maxCoeff();
    max_symmetry_drift_ = std::max(max_symmetry_drift_, drift);
    *k = (0.5 * (*k + k->transpose())).eval();
  }

  supervisor_model_update(p_, moments, dz1, dz2, out.zeta2, a_mean_, a_var_);

  const SupervisorMoments post = eta_moments(p_.activation, a_mean_, a_var_);
  out.mean_eta = post.mean_eta;
  out.mean_eta_sq = post.mean_eta_sq;
  out.a_mean = a_mean_;
  out.a_var = a_var_;

  for (Eigen::Index r = 0; r < m; ++r)
    if (!std::isfinite(k1_(r, r)) || !std::isfinite(k2_(r, r)))
      throw std::runtime_error(
          "TransientModel: model diverged at iteration " +
          std::to_string(iteration_));

  ++iteration_;
  return out;
}

WhiteTransientModel::WhiteTransientModel(double sigma2_u, int filter_length,
                                         double w_true_norm_sq,
                                         const TransientParams& params)
    : sigma2_u_(sigma2_u), m_(filter_length), p_(params) {
  validate_transient_params(p_);
  if (!(sigma2_u > 0.0))
    throw std::invalid_argument("WhiteTransientModel: sigma2_u must be positive");
  if (filter_length < 1)
    throw std::invalid_argument("WhiteTransientModel: filter_length must be >= 1");
  if (!(w_true_norm_sq >= 0.0))
    throw std::invalid_argument(
        "WhiteTransientModel: w_true_norm_sq must be nonnegative");
  z1_ = z2_ = z12_ = sigma2_u * w_true_norm_sq;
  a_mean_ = p_.a_init;
  a_var_ = p_.var_a_init;
}

TransientOutputs WhiteTransientModel::step() {
  const SupervisorMoments moments =
      eta_moments(p_.activation, a_mean_, a_var_);
  const double e2 = moments.mean_eta_sq;
  const double e1 = moments.mean_eta;

  TransientOutputs out;
  out.zeta1 = z1_;
  out.zeta2 = z2_;
  out.zeta12 = z12_;
  const double dz1 = z1_ - z12_;
  const double dz2 = z2_ - z12_;
  out.zeta = e2 * (dz1 + dz2) - 2.0 * e1 * dz2 + z2_;

  const double su2 = sigma2_u_;
  const double su4 = su2 * su2;
  const double mu1 = p_.mu1;
  const double mu2 = p_.mu2;
  const double noise = static_cast<double>(m_) * su4 * p_.sigma2_v;
  const double a1 = 1.0 - 2.0 * mu1 * su2 + mu1 * mu1 * (m_ + 2) * su4;
  const double a2 = 1.0 - 2.0 * mu2 * su2 + mu2 * mu2 * (m_ + 2) * su4;
  const double b1 = 1.0 - mu1 * (m_ + 2) * su2;

  const bool feedback = iteration_ % p_.cycle_period == 0;
  if (feedback) {
    const double zg = out.zeta;
    const double nz1 = a1 * zg + mu1 * mu1 * noise;
    const double nz2 = a2 * zg + mu2 * mu2 * noise;
    const double nd1 = (mu2 - mu1) * su2 *
                       (b1 * zg - mu1 * static_cast<double>(m_) * su2 * p_.sigma2_v);
    z1_ = nz1;
    z2_ = nz2;
    z12_ = nz1 - nd1;
  } else {
    const double nz1 = a1 * z1_ + mu1 * mu1 * noise;
    const double nz2 = a2 * z2_ + mu2 * mu2 * noise;
    const double nd1 = (1.0 - mu1 * su2) * dz1 -
                       su2 * b1 * (mu1 * z1_ - mu2 * z12_) +
                       mu1 * (mu1 - mu2) * noise;
    z1_ = nz1;
    z2_ = nz2;
    z12_ = nz1 - nd1;
  }

  supervisor_model_update(p_, moments, dz1, dz2, out.zeta2, a_mean_, a_var_);

  const SupervisorMoments post = eta_moments(p_.activation, a_mean_, a_var_);
  out.mean_eta = post.mean_eta;
  out.mean_eta_sq = post.mean_eta_sq;
  out.a_mean = a_mean_;
  out.a_var = a_var_;

  if (!std::isfinite(z1_) || !std::isfinite(z2_) || !std::isfinite(z12_))
    throw std::runtime_error("WhiteTransientModel: model diverged at iteration " +
                             std::to_string(iteration_));

  ++iteration_;
  return out;
}

}  // namespace afcomb
