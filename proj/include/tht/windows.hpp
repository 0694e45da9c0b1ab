#pragma once

#include <functional>
#include <map>
#include <string>

#include "tht/common.hpp"

namespace tht {

// A named 1D window profile. eval is total on R (zero off support);
// [support_lo, support_hi] is the closure of the support.
struct SampledWindow {
  std::string kind;
  std::map<std::string, double> params;
  std::function<double(double)> eval;
  double support_lo = 0.0;
  double support_hi = 0.0;

  double operator()(double x) const { return eval(x); }
};

// Smooth even plateau: 1 on [-1,1], 0 outside [-2,2], values in [0,1].
// Transition on [1,2] is the normalized integral of a compactly supported
// mollifier, so all derivatives vanish at the junctions.
SampledWindow plateau_phi();

// Annulus profile psi(z) = phi(z) - phi(2z); support {1/2 <= |z| <= 2},
// nonnegative, and sum_j psi(2^-j z) telescopes back to plateau differences.
SampledWindow annulus_psi();

// Wider annulus equal to 1 on supp psi and supported in its 1/100
// neighborhood {1/2 - 1/100 <= |z| <= 2 + 1/100}.
SampledWindow psi_tilde();

// Gaussian pair: g(x) = exp(-pi x^2) and its derivative h = g'.
SampledWindow gauss_g();
SampledWindow gauss_h();

// Polynomial-decay envelope theta(x) = (1 + |x|)^{-10}; integral 2/9.
SampledWindow decay_theta();

// Averaging profile: even, smooth, supported in [-2,2], constant on [-1,1],
// monotone on [1,2], total integral 1.
SampledWindow vartheta_window();

// One-sided bump: smooth, supported in [1/2,2], values in [0,1], integral 1.
SampledWindow bump_tau();

// Unit-translate partition factor: eta1 >= 0, supported in [-3/4, 3/4],
// sum_m eta1(z - m) = 1 for every z.
SampledWindow spatial_eta();

// Cone-decomposition profile for dilation exponent alpha >= 1:
//   profile(z) = integral_1^infty psi(s^alpha z) h(s^alpha z)^2 ds/s,
// supported in [-2,2] and constant near 0. The paired constant is the full
// integral over (0, infinity), which is independent of the evaluation point.
struct ConeProfile {
  SampledWindow profile;
  double constant = 0.0;
};

// nodes_per_shell is the quadrature density per dyadic shell (>= 16).
ConeProfile cone_profile(double alpha, int nodes_per_shell);

// Direct quadrature of integral_0^infty psi(t^alpha xi) h(t^alpha xi)^2 dt/t
// at a specific xi != 0; scale invariance makes this agree with
// cone_profile(alpha, ...).constant for every xi.
double cone_constant_at(double alpha, double xi, int nodes_per_shell);

// Tabulation export: {"kind", "params", "lo", "hi", "nodes", "values"} with
// 2^14 sample nodes across [lo, hi].
std::string window_to_json(const SampledWindow& w, double lo, double hi);

}  // namespace tht
