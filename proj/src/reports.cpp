#include "tht/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "json.hpp"
#include "tht/common.hpp"

namespace tht {

namespace {

std::string dtos(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

PowerFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size(), "fit_power_law: xs and ys must pair up");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  PowerFit fit;
  fit.points_used = static_cast<int>(lx.size());
  if (lx.size() < 2) {
    fit.constant = lx.size() == 1 ? std::exp(ly[0]) : 0.0;
    return fit;
  }
  const double m = static_cast<double>(lx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double det = m * sxx - sx * sx;
  // All xs equal: no slope information.
  if (std::abs(det) < 1e-12 * (m * sxx + sx * sx + 1.0)) {
    fit.constant = std::exp(sy / m);
    return fit;
  }
  fit.exponent = (m * sxy - sx * sy) / det;
  const double intercept = (sy - fit.exponent * sx) / m;
  fit.constant = std::exp(intercept);
  double rss = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + fit.exponent * lx[i]);
    rss += r * r;
  }
  fit.rms_log_residual = std::sqrt(rss / m);
  return fit;
}

PowerFit fit_power_law(const std::vector<SweepRow>& rows) {
  std::vector<double> xs, ys;
  xs.reserve(rows.size());
  ys.reserve(rows.size());
  for (const SweepRow& r : rows) {
    xs.push_back(r.x);
    ys.push_back(r.median);
  }
  return fit_power_law(xs, ys);
}

double median_of(std::vector<double> v) {
  require(!v.empty(), "median_of: empty sample");
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

void ExperimentReport::set_scalar(const std::string& key, double value) {
  for (auto& kv : scalars) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  scalars.emplace_back(key, value);
}

double ExperimentReport::scalar(const std::string& key) const {
  for (const auto& kv : scalars)
    if (kv.first == key) return kv.second;
  throw std::invalid_argument("ExperimentReport: no scalar named " + key);
}

bool ExperimentReport::has_scalar(const std::string& key) const {
  for (const auto& kv : scalars)
    if (kv.first == key) return true;
  return false;
}

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["seed"] = report.seed;
  j["n"] = report.n;
  j["quad_density"] = report.quad_density;
  j["sweep_label"] = report.sweep_label;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : report.rows) {
    nlohmann::ordered_json e;
    e["x"] = r.x;
    e["median"] = r.median;
    e["max"] = r.max;
    e["trials"] = r.trials;
    rows.push_back(e);
  }
  j["rows"] = rows;
  nlohmann::ordered_json fit;
  fit["exponent"] = report.fit.exponent;
  fit["constant"] = report.fit.constant;
  fit["rms_log_residual"] = report.fit.rms_log_residual;
  fit["points_used"] = report.fit.points_used;
  j["fit"] = fit;
  nlohmann::ordered_json scalars;
  for (const auto& kv : report.scalars) scalars[kv.first] = kv.second;
  j["scalars"] = scalars;
  return j.dump(2);
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = report.sweep_label.empty() ? "x" : report.sweep_label;
  out += ",median,max,trials\n";
  for (const SweepRow& r : report.rows) {
    out += dtos(r.x);
    out += ',';
    out += dtos(r.median);
    out += ',';
    out += dtos(r.max);
    out += ',';
    out += std::to_string(r.trials);
    out += '\n';
  }
  return out;
}

}  // namespace tht
