#include "afcomb/scenario.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace afcomb {

void ScenarioConfig::validate() const {
  if (filter_length < 1)
    throw std::invalid_argument("scenario: filter_length must satisfy M >= 1");
  if (!(input_variance > 0.0))
    throw std::invalid_argument("scenario: input_variance must be positive");
  if (!(ar_coefficient >= 0.0 && ar_coefficient < 1.0))
    throw std::invalid_argument("scenario: ar_coefficient must lie in [0,1)");
  if (!(noise_variance >= 0.0))
    throw std::invalid_argument("scenario: noise_variance must be nonnegative");
  if (process_noise_schedule.empty() ||
      process_noise_schedule.front().start_iteration != 0)
    throw std::invalid_argument(
        "scenario: process_noise_schedule must start at iteration 0");
  for (std::size_t k = 0; k < process_noise_schedule.size(); ++k) {
    if (!(process_noise_schedule[k].sigma2_q >= 0.0))
      throw std::invalid_argument(
          "scenario: process_noise_schedule sigma2_q must be nonnegative");
    if (k > 0 && process_noise_schedule[k].start_iteration <=
                     process_noise_schedule[k - 1].start_iteration)
      throw std::invalid_argument(
          "scenario: process_noise_schedule must be strictly increasing in "
          "start_iteration");
  }
  if (!true_system_init.empty() &&
      true_system_init.size() != static_cast<std::size_t>(filter_length))
    throw std::invalid_argument(
        "scenario: true_system_init must have length filter_length");
  if (horizon < 1)
    throw std::invalid_argument("scenario: horizon must satisfy horizon >= 1");
}

double ScenarioConfig::process_noise_at(long i) const {
  double value = process_noise_schedule.front().sigma2_q;
  for (const auto& phase : process_noise_schedule) {
    if (phase.start_iteration <= i)
      value = phase.sigma2_q;
    else
      break;
  }
  return value;
}

Eigen::VectorXd ScenarioConfig::initial_system() const {
  Eigen::VectorXd w(filter_length);
  if (!true_system_init.empty()) {
    for (int k = 0; k < filter_length; ++k) w[k] = true_system_init[k];
    return w;
  }
  // Seeded unit-norm draw, shared by all realizations of the same seed.
  GaussianStream rng(derive_stream_seed(seed, 0, StreamRole::kPlantInit));
  for (int k = 0; k < filter_length; ++k) w[k] = rng.next();
  double norm = w.norm();
  if (norm == 0.0) {
    w.setZero();
    w[0] = 1.0;
    return w;
  }
  return w / norm;
}

double ar1_step(double prev, double gamma, double innovation, double sigma2_u) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::domain_error("ar1_step: gamma must lie in [0,1)");
  const double x = std::sqrt(sigma2_u) * innovation;
  return gamma * prev + std::sqrt(1.0 - gamma * gamma) * x;
}

Eigen::VectorXd random_walk_step(const Eigen::VectorXd& w_prev, double sigma2_q,
                                 GaussianStream& rng) {
  if (!(sigma2_q >= 0.0))
    throw std::domain_error("random_walk_step: sigma2_q must be nonnegative");
  if (sigma2_q == 0.0) return w_prev;
  Eigen::VectorXd w = w_prev;
  const double sigma = std::sqrt(sigma2_q);
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] += sigma * rng.next();
  return w;
}

StreamGenerator::StreamGenerator(ScenarioConfig cfg,
                                 std::uint64_t realization_index)
    : cfg_(std::move(cfg)),
      input_rng_(derive_stream_seed(cfg_.seed, realization_index,
                                    StreamRole::kInput)),
      noise_rng_(derive_stream_seed(cfg_.seed, realization_index,
                                    StreamRole::kNoise)),
      walk_rng_(derive_stream_seed(cfg_.seed, realization_index,
                                   StreamRole::kProcessWalk)) {
  cfg_.validate();
  const int m = cfg_.filter_length;
  plant_ = cfg_.initial_system();
  delay_line_ = Eigen::VectorXd::Zero(m);

  // Start the input process from its stationary law, then pre-roll M-1
  // samples so the first regressor is fully populated. After shifting in
  // u(0), delay_line_[k] holds u(-k).
  prev_input_ = std::sqrt(cfg_.input_variance) * input_rng_.next();
  for (int k = m - 2; k >= 0; --k) {
    prev_input_ = ar1_step(prev_input_, cfg_.ar_coefficient, input_rng_.next(),
                           cfg_.input_variance);
    delay_line_[k] = prev_input_;
  }
}

SampleRecord StreamGenerator::next() {
  const int m = cfg_.filter_length;

  // Shift the delay line and take the new input sample.
  for (int k = m - 1; k >= 1; --k) delay_line_[k] = delay_line_[k - 1];
  prev_input_ = ar1_step(prev_input_, cfg_.ar_coefficient, input_rng_.next(),
                         cfg_.input_variance);
  delay_line_[0] = prev_input_;

  // Plant walks before the measurement: d(i) = u_i' w^o_i + v(i).
  plant_ = random_walk_step(plant_, cfg_.process_noise_at(iteration_), walk_rng_);

  SampleRecord rec;
  rec.iteration = iteration_;
  rec.regressor = delay_line_;
  rec.true_system = plant_;
  rec.desired = delay_line_.dot(plant_) +
                std::sqrt(cfg_.noise_variance) * noise_rng_.next();
  ++iteration_;
  return rec;
}

std::vector<SampleRecord> generate_stream(const ScenarioConfig& cfg,
                                          std::uint64_t realization_index) {
  StreamGenerator gen(cfg, realization_index);
  std::vector<SampleRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.horizon));
  for (long i = 0; i < cfg.horizon; ++i) out.push_back(gen.next());
  return out;
}

}  // namespace afcomb
