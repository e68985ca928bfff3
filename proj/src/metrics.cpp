#include "afcomb/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace afcomb {

double to_db(double x) {
  if (x > 0.0) return 10.0 * std::log10(x);
  return -std::numeric_limits<double>::infinity();
}

double estimate_steady_state(const std::vector<double>& series, long window) {
  if (window < 1 || static_cast<std::size_t>(window) > series.size())
    throw std::domain_error(
        "estimate_steady_state: window must lie in [1, series length]");
  double sum = 0.0;
  for (std::size_t k = series.size() - static_cast<std::size_t>(window);
       k < series.size(); ++k)
    sum += series[k];
  return sum / static_cast<double>(window);
}

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string metrics_to_csv(const MetricsTable& table) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  for (std::size_t k = 0; k < table.size(); ++k) {
    out += std::to_string(table.iterations[k]);
    for (const auto* col : {&table.emse, &table.emse1, &table.emse2,
                            &table.cross_emse, &table.eta_mean, &table.a_mean,
                            &table.eta_sq_mean, &table.net_mu}) {
      out += ',';
      append_double(out, (*col)[k]);
    }
    out += ',';
    out += std::to_string(table.n_realizations);
    out += '\n';
  }
  return out;
}

void write_metrics_csv(const MetricsTable& table, const std::string& path) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream)
    throw std::runtime_error("write_metrics_csv: cannot open " + path);
  stream << metrics_to_csv(table);
  if (!stream)
    throw std::runtime_error("write_metrics_csv: failed writing " + path);
}

MetricsTable read_metrics_csv(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream)
    throw std::runtime_error("read_metrics_csv: cannot open " + path);
  std::string line;
  if (!std::getline(stream, line) || line != kMetricsCsvHeader)
    throw std::runtime_error("read_metrics_csv: unexpected header in " + path);

  MetricsTable table;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10)
      throw std::runtime_error("read_metrics_csv: malformed row in " + path);
    table.iterations.push_back(std::stol(cells[0]));
    table.emse.push_back(std::stod(cells[1]));
    table.emse1.push_back(std::stod(cells[2]));
    table.emse2.push_back(std::stod(cells[3]));
    table.cross_emse.push_back(std::stod(cells[4]));
    table.eta_mean.push_back(std::stod(cells[5]));
    table.a_mean.push_back(std::stod(cells[6]));
    table.eta_sq_mean.push_back(std::stod(cells[7]));
    table.net_mu.push_back(std::stod(cells[8]));
    table.n_realizations = std::stol(cells[9]);
  }
  return table;
}

std::string series_to_csv(const SeriesTable& table) {
  std::string out = "i,emse,n_realizations\n";
  for (std::size_t k = 0; k < table.iterations.size(); ++k) {
    out += std::to_string(table.iterations[k]);
    out += ',';
    append_double(out, table.emse[k]);
    out += ',';
    out += std::to_string(table.n_realizations);
    out += '\n';
  }
  return out;
}

void write_series_csv(const SeriesTable& table, const std::string& path) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream)
    throw std::runtime_error("write_series_csv: cannot open " + path);
  stream << series_to_csv(table);
  if (!stream)
    throw std::runtime_error("write_series_csv: failed writing " + path);
}

}  // namespace afcomb
