#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "tht/windows.hpp"

using namespace tht;

namespace {

// Composite Simpson on [lo, hi]; panels must be even.
double simpson(const SampledWindow& w, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = w(lo) + w(hi);
  for (int i = 1; i < panels; ++i) s += w(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("windows") {

TEST_CASE("plateau: flat core, compact support, monotone ramps") {
  const SampledWindow phi = plateau_phi();
  for (double x : {0.0, 0.5, 1.0, -1.0}) CHECK(phi(x) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : {2.0, 2.5, -2.0, -7.0}) CHECK(phi(x) == 0.0);
  CHECK(phi(1.5) > 0.0);
  CHECK(phi(1.5) < 1.0);
  for (double x : {1.1, 1.3, 1.7, 1.9})
    CHECK(phi(x) == doctest::Approx(phi(-x)).epsilon(1e-14));
  double prev = 1.0;
  for (double x = 1.0; x <= 2.0; x += 1.0 / 64) {
    CHECK(phi(x) <= prev + 1e-14);
    prev = phi(x);
  }
  CHECK(phi.support_lo == -2.0);
  CHECK(phi.support_hi == 2.0);
}

TEST_CASE("annulus equals the plateau difference and partitions dyadically") {
  const SampledWindow psi = annulus_psi();
  const SampledWindow phi = plateau_phi();
  for (double x : {-1.9, -0.8, 0.6, 1.0, 1.4, 1.99})
    CHECK(psi(x) == doctest::Approx(phi(x) - phi(2.0 * x)).epsilon(1e-14));
  CHECK(psi(0.49) == 0.0);
  CHECK(psi(2.01) == 0.0);
  CHECK(psi(1.0) == doctest::Approx(1.0));
  // sum_j psi(2^-j x) telescopes to 1 well inside the covered range
  for (double x : {0.3, 0.7, 1.0, 5.0, 37.0}) {
    double s = 0.0;
    for (int j = -8; j <= 12; ++j) s += psi(std::ldexp(x, -j));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("widened annulus is 1 on the annulus support") {
  const SampledWindow psi = annulus_psi();
  const SampledWindow wide = psi_tilde();
  for (double x = -2.0; x <= 2.0; x += 1.0 / 128)
    if (psi(x) > 1e-12) CHECK(wide(x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wide(2.0 + 1.0 / 100 + 1e-6) == 0.0);
  CHECK(wide(0.5 - 1.0 / 100 - 1e-6) == 0.0);
}

TEST_CASE("gaussian pair: h is the derivative of g") {
  const SampledWindow g = gauss_g();
  const SampledWindow h = gauss_h();
  CHECK(g(0.0) == doctest::Approx(1.0));
  CHECK(h(0.0) == doctest::Approx(0.0));
  const double step = 1e-5;
  for (double x : {-1.3, -0.4, 0.2, 0.9, 2.0}) {
    const double numeric = (g(x + step) - g(x - step)) / (2.0 * step);
    CHECK(h(x) == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("decay envelope integrates to 2/9") {
  const SampledWindow th = decay_theta();
  CHECK(th(0.0) == doctest::Approx(1.0));
  CHECK(th(1.0) == doctest::Approx(std::pow(2.0, -10.0)));
  // tail beyond |x| = 64 is below 2/(9*65^9)
  const double integral = simpson(th, -64.0, 64.0, 1 << 18);
  CHECK(integral == doctest::Approx(2.0 / 9.0).epsilon(1e-8));
}

TEST_CASE("averaging profile: level 1/3 core, unit mass") {
  const SampledWindow v = vartheta_window();
  for (double x : {0.0, 0.5, -1.0}) CHECK(v(x) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(v(2.01) == 0.0);
  CHECK(v(1.4) == doctest::Approx(v(-1.4)).epsilon(1e-14));
  CHECK(simpson(v, -2.0, 2.0, 1 << 15) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("one-sided bump: support, range, unit mass") {
  const SampledWindow tau = bump_tau();
  CHECK(tau(0.49) == 0.0);
  CHECK(tau(2.01) == 0.0);
  double peak = 0.0;
  for (double x = 0.5; x <= 2.0; x += 1.0 / 512) {
    CHECK(tau(x) >= 0.0);
    peak = std::max(peak, tau(x));
  }
  CHECK(peak == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(simpson(tau, 0.5, 2.0, 1 << 15) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unit-translate partition is exact") {
  const SampledWindow eta = spatial_eta();
  CHECK(eta(0.76) == 0.0);
  CHECK(eta(-0.76) == 0.0);
  for (double x : {0.0, 0.1, 0.25, 0.4999, 0.5, 0.73, 0.9}) {
    double s = 0.0;
    for (int m = -2; m <= 2; ++m) s += eta(x - m);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cone constant is scale invariant in xi") {
  const double a = cone_constant_at(1.0, 0.7, 64);
  const double b = cone_constant_at(1.0, 3.0, 64);
  const double c = cone_constant_at(1.0, 11.0, 64);
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
  CHECK(a == doctest::Approx(c).epsilon(1e-6));

  const ConeProfile cp = cone_profile(2.0, 64);
  CHECK(cp.constant == doctest::Approx(cone_constant_at(2.0, 1.3, 64)).epsilon(1e-6));
  // constant near zero, dominated by the full integral
  CHECK(cp.profile(1e-3) == doctest::Approx(cp.profile(5e-4)).epsilon(1e-9));
  CHECK(cp.profile(0.01) <= cp.constant + 1e-12);
  CHECK(cp.profile(2.01) == 0.0);
}

TEST_CASE("window export is parseable and labeled") {
  const SampledWindow phi = plateau_phi();
  const nlohmann::json j = nlohmann::json::parse(window_to_json(phi, -2.0, 2.0));
  CHECK(j.at("kind").get<std::string>() == phi.kind);
  CHECK(j.at("lo").get<double>() == -2.0);
  CHECK(j.at("hi").get<double>() == 2.0);
  CHECK(j.at("values").size() == j.at("nodes").get<size_t>());
}

}  // TEST_SUITE
