#pragma once

#include <string>
#include <vector>

namespace afcomb {

// Per-iteration ensemble means of the combination diagnostics. Column
// order is fixed and mirrored by the CSV layout.
struct MetricsTable {
  std::vector<long> iterations;
  std::vector<double> emse;        // mean e_a^2
  std::vector<double> emse1;       // mean e_{a,1}^2
  std::vector<double> emse2;       // mean e_{a,2}^2
  std::vector<double> cross_emse;  // mean e_{a,1} e_{a,2}
  std::vector<double> eta_mean;
  std::vector<double> a_mean;
  std::vector<double> eta_sq_mean;
  std::vector<double> net_mu;
  long n_realizations = 0;
  long divergent = 0;

  std::size_t size() const { return iterations.size(); }
};

// A single-series table for baseline filters.
struct SeriesTable {
  std::string name;
  std::vector<long> iterations;
  std::vector<double> emse;
  long n_realizations = 0;
};

// 10*log10(x); nonpositive x maps to -inf, never NaN.
double to_db(double x);

// Arithmetic mean of the last `window` entries.
double estimate_steady_state(const std::vector<double>& series, long window);

inline constexpr const char* kMetricsCsvHeader =
    "i,emse,emse1,emse2,cross_emse,eta_mean,a_mean,eta_sq_mean,net_mu,"
    "n_realizations";

std::string metrics_to_csv(const MetricsTable& table);
void write_metrics_csv(const MetricsTable& table, const std::string& path);
MetricsTable read_metrics_csv(const std::string& path);

std::string series_to_csv(const SeriesTable& table);
void write_series_csv(const SeriesTable& table, const std::string& path);

}  // namespace afcomb
