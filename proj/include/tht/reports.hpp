#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tht {

// One sweep point of an experiment: the sweep coordinate (lambda, epsilon,
// grid side, shift...) with the median and max of the sampled statistic over
// the trials at that point.
struct SweepRow {
  double x = 0.0;
  double median = 0.0;
  double max = 0.0;
  int trials = 0;
};

// Least-squares power law y = constant * x^exponent through the medians,
// fitted in log-log coordinates. Rows with x <= 0 or median <= 0 carry no
// log-information and are skipped; with fewer than two usable rows the fit
// degenerates to exponent 0.
struct PowerFit {
  double exponent = 0.0;
  double constant = 0.0;
  double rms_log_residual = 0.0;
  int points_used = 0;
};

PowerFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);
PowerFit fit_power_law(const std::vector<SweepRow>& rows);

// Median of a sample (average of the central pair for even sizes).
double median_of(std::vector<double> v);

// Structured experiment outcome: sweep table, fitted exponents, and the
// provenance needed to reproduce the run (seed, grid side, quadrature
// density). Named scalars keep insertion order so serialization is stable.
struct ExperimentReport {
  std::string name;
  std::uint64_t seed = 0;
  int n = 0;
  int quad_density = 0;
  std::string sweep_label;
  std::vector<SweepRow> rows;
  PowerFit fit;
  std::vector<std::pair<std::string, double>> scalars;

  void set_scalar(const std::string& key, double value);
  // Throws if the key is absent; keeps consumers honest about field names.
  double scalar(const std::string& key) const;
  bool has_scalar(const std::string& key) const;
};

// JSON object with fixed key order; doubles in shortest round-trip form, so
// identical reports serialize byte-for-byte identically.
std::string report_to_json(const ExperimentReport& report);

// CSV of the sweep table: header "<sweep_label>,median,max,trials".
std::string report_to_csv(const ExperimentReport& report);

}  // namespace tht
