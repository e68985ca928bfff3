#include "afcomb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "afcomb/combinations.hpp"
#include "afcomb/filters.hpp"
#include "afcomb/scenario.hpp"

namespace afcomb {

namespace {

// Column layout of the per-chunk accumulators: the eight combination
// diagnostics, then one EMSE column per baseline.
enum CombColumn : int {
  kColEmse = 0,
  kColEmse1,
  kColEmse2,
  kColCross,
  kColEta,
  kColA,
  kColEtaSq,
  kColNetMu,
  kCombColumns,
};

struct BaselineSpec {
  std::string name;
  bool is_vss = false;
  double mu = 0.0; // LMS step size when !is_vss
};

std::vector<BaselineSpec> baseline_specs(const ExperimentConfig& cfg) {
  std::vector<BaselineSpec> specs;
  for (double mu : cfg.baselines.lms) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "lms_mu_%g", mu);
    specs.push_back({buf, false, mu});
  }
  if (cfg.baselines.vss) specs.push_back({"vss_lms", true, 0.0});
  return specs;
}

// Extended-precision accumulator for one fixed chunk of realizations.
struct ChunkAccumulator {
  std::vector<long double> sums; // [column * horizon + i]
  long realizations = 0;
  long divergent = 0;

  ChunkAccumulator(int columns, long horizon)
      : sums(static_cast<std::size_t>(columns) * horizon, 0.0L) {}
};

// One realization of the combination plus all baselines. The realization
// is staged into `scratch` and folded into the chunk sums only on success,
// so a divergent run contributes nothing. Divergence is reported via the
// return value to keep the chunk counts deterministic.
bool run_realization(const ExperimentConfig& cfg,
                     const std::vector<BaselineSpec>& specs,
                     std::uint64_t realization, ChunkAccumulator& acc,
                     std::vector<long double>& scratch) {
  const long horizon = cfg.scenario.horizon;
  const int columns = kCombColumns + static_cast<int>(specs.size());
  std::fill(scratch.begin(), scratch.end(), 0.0L);

  StreamGenerator stream(cfg.scenario, realization);
  CombinationState comb = make_combination_state(cfg);

  std::vector<FilterState> lms;
  VssLmsState vss;
  for (const auto& spec : specs) {
    if (spec.is_vss) {
      vss.w = Eigen::VectorXd::Zero(cfg.scenario.filter_length);
      vss.alpha_vss = cfg.baselines.alpha_vss;
      vss.g_vss = cfg.baselines.g_vss;
      vss.mu_min = cfg.baselines.mu_min.value_or(cfg.combination.mu2);
      vss.mu_max = cfg.baselines.mu_max.value_or(cfg.combination.mu1);
      vss.mu = cfg.baselines.mu_init.value_or(vss.mu_max);
    } else {
      lms.push_back({Eigen::VectorXd::Zero(cfg.scenario.filter_length), spec.mu});
    }
  }

  std::vector<double> row(static_cast<std::size_t>(columns));

  for (long i = 0; i < horizon; ++i) {
    const SampleRecord rec = stream.next();
    StepDiagnostics diag;
    try {
      diag = combination_step(comb, rec.regressor, rec.desired, &rec.true_system);
    } catch (const DivergenceError&) {
      return false;
    }
    row[kColEmse] = diag.e_a * diag.e_a;
    row[kColEmse1] = diag.e_a1 * diag.e_a1;
    row[kColEmse2] = diag.e_a2 * diag.e_a2;
    row[kColCross] = diag.e_a1 * diag.e_a2;
    row[kColEta] = diag.eta;
    row[kColA] = diag.a;
    row[kColEtaSq] = diag.eta * diag.eta;
    row[kColNetMu] = diag.net_mu;

    int col = kCombColumns;
    std::size_t lms_index = 0;
    for (const auto& spec : specs) {
      double e_a;
      if (spec.is_vss) {
        const double y = rec.regressor.dot(vss.w);
        e_a = rec.regressor.dot(rec.true_system) - y;
        vss_lms_step(vss, rec.regressor, rec.desired);
      } else {
        FilterState& f = lms[lms_index++];
        const double y = f.w.dot(rec.regressor);
        e_a = rec.regressor.dot(rec.true_system) - y;
        f.w += (f.mu * (rec.desired - y)) * rec.regressor;
      }
      if (!std::isfinite(e_a)) return false;
      row[static_cast<std::size_t>(col++)] = e_a * e_a;
    }

    for (int c = 0; c < columns; ++c)
      scratch[static_cast<std::size_t>(c) * horizon + i] +=
          static_cast<long double>(row[static_cast<std::size_t>(c)]);
  }

  for (std::size_t k = 0; k < scratch.size(); ++k) acc.sums[k] += scratch[k];
  ++acc.realizations;
  return true;
}

}  // namespace

EnsembleResult run_ensemble(const ExperimentConfig& cfg) {
  cfg.validate();
  const long horizon = cfg.scenario.horizon;
  const long ensemble = cfg.ensemble_size;
  const auto specs = baseline_specs(cfg);
  const int columns = kCombColumns + static_cast<int>(specs.size());

  // Fixed chunk partition, independent of the worker count, so the merge
  // order (and every floating-point sum) is reproducible.
  const long chunk_count = std::min<long>(ensemble, 16);
  std::vector<ChunkAccumulator> chunks;
  chunks.reserve(static_cast<std::size_t>(chunk_count));
  for (long c = 0; c < chunk_count; ++c) chunks.emplace_back(columns, horizon);

  const auto chunk_begin = [&](long c) { return ensemble * c / chunk_count; };

  int workers = cfg.workers > 0
                    ? cfg.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(chunk_count)));

  std::atomic<long> next_chunk{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto work = [&]() {
    try {
      std::vector<long double> scratch(
          static_cast<std::size_t>(columns) * horizon, 0.0L);
      for (;;) {
        const long c = next_chunk.fetch_add(1);
        if (c >= chunk_count) return;
        ChunkAccumulator& acc = chunks[static_cast<std::size_t>(c)];
        for (long r = chunk_begin(c); r < chunk_begin(c + 1); ++r) {
          if (!run_realization(cfg, specs, static_cast<std::uint64_t>(r), acc,
                               scratch))
            ++acc.divergent;
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (workers == 1) {
    work();
  } else {
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Deterministic reduction in chunk order.
  std::vector<long double> totals(static_cast<std::size_t>(columns) * horizon,
                                  0.0L);
  long ok = 0;
  long divergent = 0;
  for (const auto& chunk : chunks) {
    for (std::size_t k = 0; k < totals.size(); ++k) totals[k] += chunk.sums[k];
    ok += chunk.realizations;
    divergent += chunk.divergent;
  }

  if (divergent * 100 > ensemble)
    throw std::runtime_error("run_ensemble: " + std::to_string(divergent) +
                             " of " + std::to_string(ensemble) +
                             " realizations diverged (limit 1%)");
  if (ok == 0) throw std::runtime_error("run_ensemble: no usable realizations");

  const auto column_mean = [&](int col, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(horizon));
    for (long i = 0; i < horizon; ++i)
      out[static_cast<std::size_t>(i)] = static_cast<double>(
          totals[static_cast<std::size_t>(col) * horizon + i] /
          static_cast<long double>(ok));
  };

  EnsembleResult result;
  MetricsTable& table = result.combination;
  table.iterations.resize(static_cast<std::size_t>(horizon));
  for (long i = 0; i < horizon; ++i)
    table.iterations[static_cast<std::size_t>(i)] = i;
  column_mean(kColEmse, table.emse);
  column_mean(kColEmse1, table.emse1);
  column_mean(kColEmse2, table.emse2);
  column_mean(kColCross, table.cross_emse);
  column_mean(kColEta, table.eta_mean);
  column_mean(kColA, table.a_mean);
  column_mean(kColEtaSq, table.eta_sq_mean);
  column_mean(kColNetMu, table.net_mu);
  table.n_realizations = ok;
  table.divergent = divergent;

  for (std::size_t b = 0; b < specs.size(); ++b) {
    SeriesTable series;
    series.name = specs[b].name;
    series.iterations = table.iterations;
    column_mean(kCombColumns + static_cast<int>(b), series.emse);
    series.n_realizations = ok;
    result.baselines.push_back(std::move(series));
  }
  return result;
}

TheoryResult run_theory(const ExperimentConfig& cfg, TheoryPath path) {
  cfg.validate();
  const auto& comb = cfg.combination;
  if (comb.topology != TopologyKind::kCyclicFeedback &&
      comb.topology != TopologyKind::kIndependent)
    throw std::invalid_argument(
        "run_theory: the model covers cyclic_feedback and independent "
        "topologies");
  if (comb.supervisor.normalized)
    throw std::invalid_argument(
        "run_theory: the transient model covers the unnormalized supervisor");

  const ScenarioConfig& sc = cfg.scenario;
  const int m = sc.filter_length;
  const double gamma = sc.ar_coefficient;

  const SupervisorState sup = make_supervisor(comb.supervisor);

  TransientParams params;
  params.mu1 = comb.mu1;
  params.mu2 = comb.mu2;
  params.sigma2_v = sc.noise_variance;
  params.mu_a = sup.mu_a;
  // Parallel-independent is the never-fires limit of the feedback branch.
  params.cycle_period = comb.topology == TopologyKind::kCyclicFeedback
                            ? comb.L
                            : sc.horizon + 1;
  params.activation = sup.activation;
  params.a_min = sup.a_min;
  params.a_max = sup.a_max;
  params.a_init = sup.a;
  params.var_a_init = 0.0;

  const Eigen::VectorXd w_true = sc.initial_system();

  const bool white = gamma == 0.0;
  if (path == TheoryPath::kWhite && !white)
    throw std::invalid_argument("run_theory: white path requires gamma == 0");
  const bool use_white = path == TheoryPath::kWhite ||
                         (path == TheoryPath::kAuto && white);

  TheoryResult result;
  MetricsTable& table = result.table;
  const long horizon = sc.horizon;
  table.iterations.resize(static_cast<std::size_t>(horizon));
  table.emse.resize(static_cast<std::size_t>(horizon));
  table.emse1.resize(static_cast<std::size_t>(horizon));
  table.emse2.resize(static_cast<std::size_t>(horizon));
  table.cross_emse.resize(static_cast<std::size_t>(horizon));
  table.eta_mean.resize(static_cast<std::size_t>(horizon));
  table.a_mean.resize(static_cast<std::size_t>(horizon));
  table.eta_sq_mean.resize(static_cast<std::size_t>(horizon));
  table.net_mu.resize(static_cast<std::size_t>(horizon));
  table.n_realizations = 0;

  const auto record = [&](long i, const TransientOutputs& out) {
    const auto k = static_cast<std::size_t>(i);
    table.iterations[k] = i;
    table.emse[k] = out.zeta;
    table.emse1[k] = out.zeta1;
    table.emse2[k] = out.zeta2;
    table.cross_emse[k] = out.zeta12;
    table.eta_mean[k] = out.mean_eta;
    table.a_mean[k] = out.a_mean;
    table.eta_sq_mean[k] = out.mean_eta_sq;
    table.net_mu[k] = net_step_size(out.mean_eta, comb.mu1, comb.mu2);
  };

  if (use_white) {
    WhiteTransientModel model(sc.input_variance, m, w_true.squaredNorm(), params);
    for (long i = 0; i < horizon; ++i) record(i, model.step());
  } else {
    Eigen::MatrixXd r_u(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        r_u(r, c) = sc.input_variance * std::pow(gamma, std::abs(r - c));
    TransientModel model(w_true, r_u, params);
    for (long i = 0; i < horizon; ++i) record(i, model.step());
  }

  // Closed-form steady-state prediction.
  const double tr_ru = sc.input_variance * m;
  const double tr_q = sc.process_noise_at(sc.horizon - 1) * m;
  const ActivationEval lo = activation_eval(sup.activation, sup.a_min);
  const ActivationEval hi = activation_eval(sup.activation, sup.a_max);
  SteadyStatePrediction prediction;
  if (comb.mu1 == comb.mu2) {
    prediction.eta_bar = 0.5;
    prediction.mu_bar = comb.mu1;
    prediction.emse =
        steady_state_emse(prediction.mu_bar, tr_ru, sc.noise_variance, tr_q);
    result.steady_state = prediction;
  } else if (sc.noise_variance > 0.0) {
    SteadyStateInputs inputs;
    inputs.mu1 = comb.mu1;
    inputs.mu2 = comb.mu2;
    inputs.tr_Ru = tr_ru;
    inputs.sigma2_v = sc.noise_variance;
    inputs.tr_Q = tr_q;
    inputs.f_min = lo.f;
    inputs.f_max = hi.f;
    const OptimalEta opt = optimal_eta(inputs);
    prediction.eta_bar = opt.eta_bar;
    prediction.mu_bar = opt.mu_bar;
    prediction.emse =
        steady_state_emse(opt.mu_bar, tr_ru, sc.noise_variance, tr_q);
    result.steady_state = prediction;
  }
  // The fixed point drives the net step toward zero in stationary scenarios
  // when the activation range allows it; there the small-variance
  // approximation behind the steady-state model breaks down.
  const double mu_lo = net_step_size(lo.f, comb.mu1, comb.mu2);
  const double mu_hi = net_step_size(hi.f, comb.mu1, comb.mu2);
  result.steady_state_unreliable =
      tr_q == 0.0 && std::min(mu_lo, mu_hi) <= 0.0;

  return result;
}

std::string CompareReport::to_json() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"band_db\": %.17g, \"max_abs_db\": %.17g, "
                "\"mean_abs_db\": %.17g, \"fraction_within\": %.17g, "
                "\"n\": %ld}",
                band_db, max_abs_db, mean_abs_db, fraction_within, n);
  return buf;
}

CompareReport compare(const MetricsTable& sim, const MetricsTable& theory,
                      double band_db) {
  if (sim.size() != theory.size() || sim.size() == 0)
    throw std::domain_error("compare: iteration axes must match and be nonempty");
  for (std::size_t k = 0; k < sim.size(); ++k)
    if (sim.iterations[k] != theory.iterations[k])
      throw std::domain_error("compare: iteration axes must match");

  CompareReport report;
  report.band_db = band_db;
  report.n = static_cast<long>(sim.size());
  double sum = 0.0;
  long within = 0;
  for (std::size_t k = 0; k < sim.size(); ++k) {
    const double a = to_db(sim.emse[k]);
    const double b = to_db(theory.emse[k]);
    double diff = std::abs(a - b);
    if (std::isinf(a) && std::isinf(b)) diff = 0.0;
    report.max_abs_db = std::max(report.max_abs_db, diff);
    sum += diff;
    if (diff <= band_db) ++within;
  }
  report.mean_abs_db = sum / static_cast<double>(sim.size());
  report.fraction_within =
      static_cast<double>(within) / static_cast<double>(sim.size());
  return report;
}

}  // namespace afcomb
