#include "tht/windows.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "json.hpp"

namespace tht {

namespace {

// Mollifier exp(-1/(u(1-u))) on (0,1).
double bump01(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(-1.0 / (u * (1.0 - u)));
}

// Smooth step 0 -> 1 across [0,1]: normalized cumulative integral of the
// mollifier, tabulated once by composite Simpson and evaluated with cubic
// Hermite using the analytic slope. Symmetric: ramp01(u) + ramp01(1-u) = 1.
class Ramp {
 public:
  Ramp() {
    table_.assign(kCells + 1, 0.0);
    double acc = 0.0;
    for (int k = 0; k < kCells; ++k) {
      const double a = static_cast<double>(k) / kCells;
      const double b = static_cast<double>(k + 1) / kCells;
      const double m = 0.5 * (a + b);
      acc += (b - a) / 6.0 * (bump01(a) + 4.0 * bump01(m) + bump01(b));
      table_[k + 1] = acc;
    }
    norm_ = acc;
    for (double& t : table_) t /= norm_;
  }

  double value(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double s = u * kCells;
    const int k = std::min(static_cast<int>(s), kCells - 1);
    const double h = 1.0 / kCells;
    const double x0 = static_cast<double>(k) / kCells;
    const double tt = (u - x0) / h;
    const double y0 = table_[k], y1 = table_[k + 1];
    const double d0 = bump01(x0) / norm_ * h;
    const double d1 = bump01(x0 + h) / norm_ * h;
    const double t2 = tt * tt, t3 = t2 * tt;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tt) * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
  }

 private:
  static constexpr int kCells = 4096;
  std::vector<double> table_;
  double norm_ = 1.0;
};

const Ramp& ramp() {
  static const Ramp r;
  return r;
}

double ramp01(double u) { return ramp().value(u); }

double plateau_eval(double x) {
  const double a = std::abs(x);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return 1.0 - ramp01(a - 1.0);
}

double psi_eval(double x) { return plateau_eval(x) - plateau_eval(2.0 * x); }

double gauss_eval(double x) { return std::exp(-kPi * x * x); }
double gauss_deriv_eval(double x) { return -kTwoPi * x * std::exp(-kPi * x * x); }

// Integrand of the cone profile in the radial variable w = t^alpha |xi|.
double cone_integrand(double w) {
  const double h = gauss_deriv_eval(w);
  return psi_eval(w) * h * h / w;
}

constexpr int kExportNodes = 1 << 14;

}  // namespace

SampledWindow plateau_phi() {
  SampledWindow w;
  w.kind = "plateau_phi";
  w.eval = plateau_eval;
  w.support_lo = -2.0;
  w.support_hi = 2.0;
  return w;
}

SampledWindow annulus_psi() {
  SampledWindow w;
  w.kind = "annulus_psi";
  w.eval = psi_eval;
  w.support_lo = -2.0;
  w.support_hi = 2.0;
  return w;
}

SampledWindow psi_tilde() {
  SampledWindow w;
  w.kind = "psi_tilde";
  w.params["margin"] = 0.01;
  w.eval = [](double x) {
    const double a = std::abs(x);
    if (a < 0.49 || a > 2.01) return 0.0;
    if (a < 0.5) return ramp01((a - 0.49) / 0.01);
    if (a <= 2.0) return 1.0;
    return 1.0 - ramp01((a - 2.0) / 0.01);
  };
  w.support_lo = -2.01;
  w.support_hi = 2.01;
  return w;
}

SampledWindow gauss_g() {
  SampledWindow w;
  w.kind = "gauss_g";
  w.eval = gauss_eval;
  // effectively compact: below 1e-300 past |x| ~ 15
  w.support_lo = -16.0;
  w.support_hi = 16.0;
  return w;
}

SampledWindow gauss_h() {
  SampledWindow w;
  w.kind = "gauss_h";
  w.eval = gauss_deriv_eval;
  w.support_lo = -16.0;
  w.support_hi = 16.0;
  return w;
}

SampledWindow decay_theta() {
  SampledWindow w;
  w.kind = "decay_theta";
  w.eval = [](double x) { return std::pow(1.0 + std::abs(x), -10.0); };
  w.support_lo = -64.0;  // truncation horizon used by callers
  w.support_hi = 64.0;
  return w;
}

SampledWindow vartheta_window() {
  SampledWindow w;
  w.kind = "vartheta";
  // Plateau shape has integral exactly 3 (ramp symmetry), so the constant
  // level is 1/3.
  w.params["level"] = 1.0 / 3.0;
  w.eval = [](double x) { return plateau_eval(x) / 3.0; };
  w.support_lo = -2.0;
  w.support_hi = 2.0;
  return w;
}

SampledWindow bump_tau() {
  SampledWindow w;
  w.kind = "bump_tau";
  // Trapezoidal plateau on [1/2,2] with ramps of width 1/4; shape integral
  // is exactly 5/4, normalized to 1. Peak value 4/5 keeps range in [0,1].
  w.params["peak"] = 0.8;
  w.eval = [](double x) {
    if (x <= 0.5 || x >= 2.0) return 0.0;
    double s;
    if (x < 0.75)
      s = ramp01((x - 0.5) * 4.0);
    else if (x <= 1.75)
      s = 1.0;
    else
      s = 1.0 - ramp01((x - 1.75) * 4.0);
    return 0.8 * s;
  };
  w.support_lo = 0.5;
  w.support_hi = 2.0;
  return w;
}

SampledWindow spatial_eta() {
  SampledWindow w;
  w.kind = "spatial_eta";
  // Difference of shifted smooth steps with transition half-width 1/4;
  // unit translates telescope to 1 exactly.
  w.eval = [](double z) {
    auto step = [](double u) { return ramp01((u + 0.25) * 2.0); };
    return step(z + 0.5) - step(z - 0.5);
  };
  w.support_lo = -0.75;
  w.support_hi = 0.75;
  return w;
}

ConeProfile cone_profile(double alpha, int nodes_per_shell) {
  require(alpha >= 1.0, "cone_profile: alpha must be >= 1");
  require(nodes_per_shell >= 16,
          "cone_profile: quadrature density too low (nodes_per_shell >= 16)");

  // Radial reduction: profile(z) = (1/alpha) * W(max(|z|, 1/2)) with
  // W(x) = integral_x^2 psi(w) h(w)^2 dw / w. Tabulate W by cumulative
  // Simpson from the right across [1/2, 2]; the integrand is flat-zero at
  // both ends, so the table converges superalgebraically in the density.
  const int cells = std::max(1024, 64 * nodes_per_shell);
  const double lo = 0.5, hi = 2.0;
  const double h = (hi - lo) / cells;
  auto table = std::make_shared<std::vector<double>>(cells + 1, 0.0);
  double acc = 0.0;
  for (int k = cells - 1; k >= 0; --k) {
    const double a = lo + k * h;
    const double b = a + h;
    acc += h / 6.0 * (cone_integrand(a) + 4.0 * cone_integrand(0.5 * (a + b)) +
                      cone_integrand(b));
    (*table)[k] = acc;
  }

  const double inv_alpha = 1.0 / alpha;
  auto W = [table, lo, h, cells](double x) {
    if (x >= 2.0) return 0.0;
    if (x <= lo) return (*table)[0];
    const double s = (x - lo) / h;
    const int k = std::min(static_cast<int>(s), cells - 1);
    const double x0 = lo + k * h;
    const double tt = (x - x0) / h;
    const double y0 = (*table)[k], y1 = (*table)[k + 1];
    // Hermite with the analytic slope W'(x) = -integrand(x).
    const double d0 = -cone_integrand(x0) * h;
    const double d1 = -cone_integrand(x0 + h) * h;
    const double t2 = tt * tt, t3 = t2 * tt;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tt) * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
  };

  ConeProfile out;
  out.profile.kind = "cone_profile";
  out.profile.params["alpha"] = alpha;
  out.profile.params["nodes_per_shell"] = nodes_per_shell;
  out.profile.eval = [W, inv_alpha](double z) {
    const double a = std::abs(z);
    if (a >= 2.0) return 0.0;
    return inv_alpha * W(std::max(a, 0.5));
  };
  out.profile.support_lo = -2.0;
  out.profile.support_hi = 2.0;
  out.constant = inv_alpha * (*table)[0];
  return out;
}

double cone_constant_at(double alpha, double xi, int nodes_per_shell) {
  require(alpha >= 1.0, "cone_constant_at: alpha must be >= 1");
  require(xi != 0.0, "cone_constant_at: xi must be nonzero");
  require(nodes_per_shell >= 16,
          "cone_constant_at: quadrature density too low (nodes_per_shell >= 16)");
  // Support in t: t^alpha |xi| in [1/2, 2]. Integrate in u = log2 t with
  // composite Simpson, nodes_per_shell cells per unit octave.
  const double axi = std::abs(xi);
  const double u_lo = std::log2(0.5 / axi) / alpha;
  const double u_hi = std::log2(2.0 / axi) / alpha;
  const int cells = std::max(2, static_cast<int>(std::ceil((u_hi - u_lo) * nodes_per_shell)));
  const double h = (u_hi - u_lo) / cells;
  auto f = [&](double u) {
    const double t = std::exp2(u);
    const double w = std::pow(t, alpha) * axi;
    const double hh = gauss_deriv_eval(w);
    return psi_eval(w) * hh * hh;
  };
  double acc = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double a = u_lo + k * h;
    acc += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
  }
  // dt/t = ln 2 du.
  return acc * std::log(2.0);
}

std::string window_to_json(const SampledWindow& w, double lo, double hi) {
  require(hi > lo, "window_to_json: need hi > lo");
  nlohmann::json j;
  j["kind"] = w.kind;
  j["params"] = w.params;
  j["lo"] = lo;
  j["hi"] = hi;
  j["nodes"] = kExportNodes;
  std::vector<double> vals(kExportNodes);
  for (int k = 0; k < kExportNodes; ++k) {
    const double x = lo + (hi - lo) * k / (kExportNodes - 1);
    vals[k] = w.eval(x);
  }
  j["values"] = vals;
  return j.dump();
}

}  // namespace tht
