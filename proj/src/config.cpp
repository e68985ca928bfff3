#include "afcomb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace afcomb {

void ExperimentConfig::validate() const {
  scenario.validate();
  make_topology(combination).validate();
  if (!(combination.mu1 > 0.0) || !(combination.mu2 > 0.0))
    throw std::invalid_argument("combination: mu1 and mu2 must be positive");
  if (ensemble_size < 1)
    throw std::invalid_argument("harness: ensemble_size must be >= 1");
  if (steady_state_window < 1 || steady_state_window > scenario.horizon)
    throw std::invalid_argument(
        "harness: steady_state_window must lie in [1, horizon]");
  for (double mu : baselines.lms)
    if (!(mu > 0.0))
      throw std::invalid_argument("baselines: lms step sizes must be positive");
}

SupervisorState make_supervisor(const SupervisorConfig& cfg) {
  SupervisorState s;
  s.activation = cfg.kind;
  s.mu_a = cfg.mu_a;
  if (cfg.kind == ActivationKind::kSigmoid) {
    s.a_min = cfg.a_min.value_or(-4.0);
    s.a_max = cfg.a_max.value_or(4.0);
    if (!(cfg.init_eta > 0.0 && cfg.init_eta < 1.0))
      throw std::invalid_argument(
          "supervisor: init_eta must lie in (0,1) for the convex supervisor");
    s.a = std::log(cfg.init_eta / (1.0 - cfg.init_eta));
  } else {
    s.a_min = cfg.a_min.value_or(-0.25);
    s.a_max = cfg.a_max.value_or(1.25);
    s.a = cfg.init_eta;
  }
  if (!(s.a_min < s.a_max))
    throw std::invalid_argument("supervisor: requires a_min < a_max");
  s.a = std::clamp(s.a, s.a_min, s.a_max);
  s.eta = activation_eval(s.activation, s.a).f;
  if (cfg.normalized) s.normalization = Normalization{cfg.beta, cfg.epsilon, 0.0};
  return s;
}

Topology make_topology(const CombinationConfig& cfg) {
  Topology t;
  t.kind = cfg.topology;
  t.cycle_period = cfg.L;
  t.alpha_bar = cfg.alpha_bar;
  t.eta_threshold = cfg.eta_th;
  return t;
}

CombinationState make_combination_state(const ExperimentConfig& cfg) {
  return make_combination(cfg.scenario.filter_length, cfg.combination.mu1,
                          cfg.combination.mu2,
                          make_supervisor(cfg.combination.supervisor),
                          make_topology(cfg.combination));
}

namespace {

using Section = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, Section> parse_sections(const std::string& text) {
  std::map<std::string, Section> sections;
  std::istringstream stream(text);
  std::string line;
  std::string current;
  long line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(line_no));
      current = trim(t.substr(1, t.size() - 2));
      sections[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos || current.empty())
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " +
                                  std::to_string(line_no));
    if (!sections[current].emplace(key, value).second)
      throw std::invalid_argument("config: duplicate key '" + key +
                                  "' in section [" + current + "]");
  }
  return sections;
}

// Pulls typed values out of a section and records consumption so leftover
// keys can be reported as errors.
class SectionReader {
 public:
  SectionReader(const std::string& name, const Section* section)
      : name_(name), section_(section) {}

  std::optional<std::string> raw(const std::string& key) {
    if (section_ == nullptr) return std::nullopt;
    const auto it = section_->find(key);
    if (it == section_->end()) return std::nullopt;
    consumed_.insert(key);
    return it->second;
  }

  double number(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? parse_number(key, *v) : fallback;
  }

  std::optional<double> number_opt(const std::string& key) {
    const auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_number(key, *v);
  }

  long integer(const std::string& key, long fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const long out = std::stol(*v, &used);
      if (used != v->size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw std::invalid_argument(fail(key, *v, "an integer"));
    }
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const std::uint64_t out = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw std::invalid_argument(fail(key, *v, "an unsigned integer"));
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw std::invalid_argument(fail(key, *v, "true or false"));
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto v = raw(key);
    return v ? *v : fallback;
  }

  std::vector<double> number_list(const std::string& key) {
    const auto v = raw(key);
    std::vector<double> out;
    if (!v || v->empty()) return out;
    std::istringstream stream(*v);
    std::string cell;
    while (std::getline(stream, cell, ','))
      out.push_back(parse_number(key, trim(cell)));
    return out;
  }

  void finish() const {
    if (section_ == nullptr) return;
    for (const auto& [key, value] : *section_)
      if (!consumed_.count(key))
        throw std::invalid_argument("config: unknown key '" + key +
                                    "' in section [" + name_ + "]");
  }

 private:
  double parse_number(const std::string& key, const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return out;
    } catch (...) {
      throw std::invalid_argument(fail(key, v, "a number"));
    }
  }

  std::string fail(const std::string& key, const std::string& v,
                   const std::string& expected) const {
    return "config: [" + name_ + "] " + key + " = '" + v + "' is not " +
           expected;
  }

  std::string name_;
  const Section* section_;
  std::set<std::string> consumed_;
};

const Section* find(const std::map<std::string, Section>& sections,
                    const std::string& name) {
  const auto it = sections.find(name);
  return it == sections.end() ? nullptr : &it->second;
}

std::vector<ProcessNoisePhase> parse_schedule(const std::string& value) {
  std::vector<ProcessNoisePhase> schedule;
  std::istringstream stream(value);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    const std::string entry = trim(cell);
    const auto colon = entry.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument(
          "config: process_noise_schedule entries must be start:sigma2_q");
    ProcessNoisePhase phase;
    phase.start_iteration = std::stol(trim(entry.substr(0, colon)));
    phase.sigma2_q = std::stod(trim(entry.substr(colon + 1)));
    schedule.push_back(phase);
  }
  if (schedule.empty())
    throw std::invalid_argument("config: process_noise_schedule is empty");
  return schedule;
}

TopologyKind parse_topology(const std::string& value) {
  if (value == "independent") return TopologyKind::kIndependent;
  if (value == "leakage") return TopologyKind::kLeakage;
  if (value == "handover") return TopologyKind::kHandover;
  if (value == "cyclic_feedback") return TopologyKind::kCyclicFeedback;
  throw std::invalid_argument("config: unknown topology '" + value + "'");
}

ActivationKind parse_activation(const std::string& value) {
  if (value == "affine") return ActivationKind::kAffine;
  if (value == "convex" || value == "sigmoid") return ActivationKind::kSigmoid;
  throw std::invalid_argument("config: unknown supervisor kind '" + value + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  const auto sections = parse_sections(text);
  for (const auto& [name, _] : sections)
    if (name != "scenario" && name != "combination" && name != "supervisor" &&
        name != "baselines" && name != "harness")
      throw std::invalid_argument("config: unknown section [" + name + "]");

  ExperimentConfig cfg;

  SectionReader scenario("scenario", find(sections, "scenario"));
  cfg.scenario.filter_length =
      static_cast<int>(scenario.integer("filter_length", 1));
  cfg.scenario.input_variance = scenario.number("input_variance", 1.0);
  cfg.scenario.ar_coefficient = scenario.number("ar_coefficient", 0.0);
  cfg.scenario.noise_variance = scenario.number("noise_variance", 0.0);
  if (const auto v = scenario.raw("process_noise_schedule"))
    cfg.scenario.process_noise_schedule = parse_schedule(*v);
  if (const auto v = scenario.raw("true_system_init")) {
    if (*v != "seeded-unit-norm") {
      std::istringstream stream(*v);
      std::string cell;
      while (std::getline(stream, cell, ','))
        cfg.scenario.true_system_init.push_back(std::stod(trim(cell)));
    }
  }
  cfg.scenario.horizon = scenario.integer("horizon", 1);
  cfg.scenario.seed = scenario.unsigned64("seed", 0);
  scenario.finish();

  SectionReader combination("combination", find(sections, "combination"));
  cfg.combination.topology =
      parse_topology(combination.text("topology", "independent"));
  cfg.combination.mu1 = combination.number("mu1", 0.0);
  cfg.combination.mu2 = combination.number("mu2", 0.0);
  cfg.combination.L = combination.integer("L", 1);
  cfg.combination.alpha_bar = combination.number("alpha_bar", 0.0);
  cfg.combination.eta_th = combination.number("eta_th", 0.98);
  combination.finish();

  SectionReader supervisor("supervisor", find(sections, "supervisor"));
  cfg.combination.supervisor.kind =
      parse_activation(supervisor.text("kind", "convex"));
  cfg.combination.supervisor.mu_a = supervisor.number("mu_a", 100.0);
  cfg.combination.supervisor.a_min = supervisor.number_opt("a_min");
  cfg.combination.supervisor.a_max = supervisor.number_opt("a_max");
  cfg.combination.supervisor.normalized = supervisor.boolean("normalized", false);
  cfg.combination.supervisor.beta = supervisor.number("beta", 0.9);
  cfg.combination.supervisor.epsilon = supervisor.number("epsilon", 1e-2);
  cfg.combination.supervisor.init_eta = supervisor.number("init_eta", 0.5);
  supervisor.finish();

  SectionReader baselines("baselines", find(sections, "baselines"));
  cfg.baselines.lms = baselines.number_list("lms");
  cfg.baselines.vss = baselines.boolean("vss", false);
  cfg.baselines.alpha_vss = baselines.number("alpha_vss", 0.95);
  cfg.baselines.g_vss = baselines.number("g_vss", 0.1);
  cfg.baselines.mu_min = baselines.number_opt("mu_min");
  cfg.baselines.mu_max = baselines.number_opt("mu_max");
  cfg.baselines.mu_init = baselines.number_opt("mu_init");
  baselines.finish();

  SectionReader harness("harness", find(sections, "harness"));
  cfg.ensemble_size = harness.integer("ensemble_size", 300);
  cfg.steady_state_window = harness.integer("steady_state_window", 1000);
  cfg.output_path = harness.text("output", "");
  cfg.workers = static_cast<int>(harness.integer("workers", 0));
  harness.finish();

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream)
    throw std::runtime_error("load_experiment_config: cannot open " + path);
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return parse_experiment_config(buffer.str());
}

namespace {

std::string format_number(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* topology_name(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::kIndependent: return "independent";
    case TopologyKind::kLeakage: return "leakage";
    case TopologyKind::kHandover: return "handover";
    case TopologyKind::kCyclicFeedback: return "cyclic_feedback";
  }
  return "independent";
}

}  // namespace

std::string experiment_config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[scenario]\n";
  out << "filter_length = " << cfg.scenario.filter_length << "\n";
  out << "input_variance = " << format_number(cfg.scenario.input_variance) << "\n";
  out << "ar_coefficient = " << format_number(cfg.scenario.ar_coefficient) << "\n";
  out << "noise_variance = " << format_number(cfg.scenario.noise_variance) << "\n";
  out << "process_noise_schedule = ";
  for (std::size_t k = 0; k < cfg.scenario.process_noise_schedule.size(); ++k) {
    if (k > 0) out << ",";
    out << cfg.scenario.process_noise_schedule[k].start_iteration << ":"
        << format_number(cfg.scenario.process_noise_schedule[k].sigma2_q);
  }
  out << "\n";
  out << "true_system_init = ";
  if (cfg.scenario.true_system_init.empty()) {
    out << "seeded-unit-norm";
  } else {
    for (std::size_t k = 0; k < cfg.scenario.true_system_init.size(); ++k) {
      if (k > 0) out << ",";
      out << format_number(cfg.scenario.true_system_init[k]);
    }
  }
  out << "\n";
  out << "horizon = " << cfg.scenario.horizon << "\n";
  out << "seed = " << cfg.scenario.seed << "\n";

  out << "\n[combination]\n";
  out << "topology = " << topology_name(cfg.combination.topology) << "\n";
  out << "mu1 = " << format_number(cfg.combination.mu1) << "\n";
  out << "mu2 = " << format_number(cfg.combination.mu2) << "\n";
  out << "L = " << cfg.combination.L << "\n";
  out << "alpha_bar = " << format_number(cfg.combination.alpha_bar) << "\n";
  out << "eta_th = " << format_number(cfg.combination.eta_th) << "\n";

  const SupervisorConfig& sup = cfg.combination.supervisor;
  out << "\n[supervisor]\n";
  out << "kind = "
      << (sup.kind == ActivationKind::kAffine ? "affine" : "convex") << "\n";
  out << "mu_a = " << format_number(sup.mu_a) << "\n";
  if (sup.a_min) out << "a_min = " << format_number(*sup.a_min) << "\n";
  if (sup.a_max) out << "a_max = " << format_number(*sup.a_max) << "\n";
  out << "normalized = " << (sup.normalized ? "true" : "false") << "\n";
  out << "beta = " << format_number(sup.beta) << "\n";
  out << "epsilon = " << format_number(sup.epsilon) << "\n";
  out << "init_eta = " << format_number(sup.init_eta) << "\n";

  out << "\n[baselines]\n";
  if (!cfg.baselines.lms.empty()) {
    out << "lms = ";
    for (std::size_t k = 0; k < cfg.baselines.lms.size(); ++k) {
      if (k > 0) out << ",";
      out << format_number(cfg.baselines.lms[k]);
    }
    out << "\n";
  }
  out << "vss = " << (cfg.baselines.vss ? "true" : "false") << "\n";
  out << "alpha_vss = " << format_number(cfg.baselines.alpha_vss) << "\n";
  out << "g_vss = " << format_number(cfg.baselines.g_vss) << "\n";
  if (cfg.baselines.mu_min)
    out << "mu_min = " << format_number(*cfg.baselines.mu_min) << "\n";
  if (cfg.baselines.mu_max)
    out << "mu_max = " << format_number(*cfg.baselines.mu_max) << "\n";
  if (cfg.baselines.mu_init)
    out << "mu_init = " << format_number(*cfg.baselines.mu_init) << "\n";

  out << "\n[harness]\n";
  out << "ensemble_size = " << cfg.ensemble_size << "\n";
  out << "steady_state_window = " << cfg.steady_state_window << "\n";
  if (!cfg.output_path.empty()) out << "output = " << cfg.output_path << "\n";
  out << "workers = " << cfg.workers << "\n";
  return out.str();
}

}  // namespace afcomb
