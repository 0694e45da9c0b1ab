#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tht/patterns.hpp"

using namespace tht;

namespace {

// Independent cell lookup: real-coordinate containment, recomputed locally.
int oracle_cell(double coord, int n) {
  long c = static_cast<long>(std::floor(coord * n));
  c %= n;
  if (c < 0) c += n;
  return static_cast<int>(c);
}

}  // namespace

TEST_SUITE("patterns") {

TEST_CASE("martingale averages: fixed points, idempotence, mass") {
  const int n = 16;
  Rng rng(11);
  GridFunction2D f(n);
  for (auto& z : f.v) z = cd(rng.uniform(), 0.0);

  GridFunction2D c(n);
  for (auto& z : c.v) z = cd(0.37, 0.0);
  for (int axis : {1, 2}) {
    GridFunction2D ec = martingale_avg(c, axis, 2);
    for (auto z : ec.v) CHECK(z == cd(0.37, 0.0));
    GridFunction2D id = martingale_avg(f, axis, 4);  // 2^4 = n
    CHECK(id.v == f.v);
    for (int k : {0, 1, 2, 3}) {
      GridFunction2D e1 = martingale_avg(f, axis, k);
      GridFunction2D e2 = martingale_avg(e1, axis, k);
      CHECK(e1.v == e2.v);  // bitwise idempotence
      // block-sum oracle: pairwise sums per fiber block, preserved bitwise
      const int w = n >> k;
      const size_t stride = axis == 1 ? 1 : static_cast<size_t>(n);
      bool mass = true;
      for (int fib = 0; fib < n; ++fib) {
        const size_t base =
            axis == 1 ? static_cast<size_t>(fib) * n : static_cast<size_t>(fib);
        for (int blk = 0; blk < n; blk += w) {
          std::vector<cd> buf0, buf1;
          for (int r = 0; r < w; ++r) {
            buf0.push_back(f.v[base + stride * (blk + r)]);
            buf1.push_back(e1.v[base + stride * (blk + r)]);
          }
          while (buf0.size() > 1) {
            std::vector<cd> nx0, nx1;
            for (size_t i = 0; i + 1 < buf0.size(); i += 2) {
              nx0.push_back(buf0[i] + buf0[i + 1]);
              nx1.push_back(buf1[i] + buf1[i + 1]);
            }
            buf0 = nx0;
            buf1 = nx1;
          }
          mass = mass && buf0[0] == buf1[0];
        }
      }
      CHECK(mass);
    }
  }
  // axis-1 full mass through cell_mean is bitwise (fiber-major reduction)
  CHECK(cell_mean(martingale_avg(f, 1, 2)) == cell_mean(f));
  CHECK(std::abs(cell_mean(martingale_avg(f, 2, 2)).real() -
                 cell_mean(f).real()) < 1e-14);
}

TEST_CASE("corner-count integral: constants and brute-force oracle") {
  const int n = 16;
  GridFunction2D one(n), cgrid(n);
  for (auto& z : one.v) z = 1.0;
  for (auto& z : cgrid.v) z = 0.6;
  CHECK(count_integral(one, 2 * n) == 1.0);
  CHECK(std::abs(count_integral(cgrid, 2 * n) - 0.216) < 1e-13);

  Rng rng(7);
  BitmapSet e = random_bitmap(n, 0.4, rng);
  GridFunction2D g = bitmap_to_grid(e);
  const int tn = 2 * n;
  const double lib = count_integral(g, tn);
  double orc = 0.0;
  for (int q = 0; q < tn; ++q) {
    const double t = static_cast<double>(q) / tn;
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / n;
        const double y = static_cast<double>(j) / n;
        const bool hit = e.at(i, j) && e.at(oracle_cell(x + t, n), j) &&
                         e.at(i, oracle_cell(y + t * t, n));
        acc += hit ? 1.0 : 0.0;
      }
    orc += acc / (static_cast<double>(n) * n);
  }
  orc /= tn;
  CHECK(std::abs(lib - orc) < 1e-14);
  CHECK(lib >= 0.0);
  CHECK(lib <= 1.0);
}

TEST_CASE("count lower bound: constants, equality, rejection, sweep") {
  const int n = 16;
  GridFunction2D cgrid(n), one(n);
  for (auto& z : cgrid.v) z = 0.55;
  for (auto& z : one.v) z = 1.0;
  const auto rc = lower_bound_check(cgrid, 2, 3);
  CHECK(std::abs(rc.lhs - 0.55 * 0.55 * 0.55) < 1e-15);
  CHECK(std::abs(rc.rhs - std::pow(0.55, 4.0)) < 1e-15);
  CHECK(rc.ok);
  const auto r1 = lower_bound_check(one, 1, 1);
  CHECK(r1.lhs == 1.0);
  CHECK(r1.rhs == 1.0);
  CHECK(r1.ok);
  GridFunction2D bad(n);
  for (auto& z : bad.v) z = 1.5;
  CHECK_THROWS_AS(lower_bound_check(bad, 1, 1), std::invalid_argument);

  Rng rng(13);
  double min_margin = 1e9;
  for (int trial = 0; trial < 200; ++trial) {
    GridFunction2D f(n);
    for (auto& z : f.v) z = cd(rng.uniform(), 0.0);
    for (int k = 0; k <= 4; ++k)
      for (int l = 0; l <= 4; ++l) {
        const auto r = lower_bound_check(f, k, l);
        CHECK(r.ok);
        min_margin = std::min(min_margin, r.lhs - r.rhs);
      }
  }
  CHECK(min_margin > 0.0);
}

TEST_CASE("pattern search: extremes and exhaustive enumeration") {
  const int n = 32;
  BitmapSet full(n);
  for (auto& cell : full.cells) cell = 1;
  const auto hit = pattern_search(full, 1.0 / n);
  REQUIRE(hit.has_value());
  CHECK(hit->t == static_cast<double>(n - 1) / n);
  CHECK(hit->x == 0.0);
  CHECK(hit->y == 0.0);

  BitmapSet lone(n);
  lone.set(5, 9, true);
  for (double tm : {1.0 / n, 0.25, 0.8}) CHECK(!pattern_search(lone, tm));

  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const double dens = trial % 2 ? 0.08 : 0.25;
    BitmapSet e = random_bitmap(n, dens, rng);
    const double t_min = trial % 3 ? 1.0 / n : 0.4;
    int best_m = -1, bx = -1, by = -1;
    for (int m = n - 1; m >= static_cast<int>(std::ceil(t_min * n)); --m) {
      const double t = static_cast<double>(m) / n;
      for (int j = 0; j < n && best_m < 0; ++j)
        for (int i = 0; i < n && best_m < 0; ++i) {
          const double x = static_cast<double>(i) / n;
          const double y = static_cast<double>(j) / n;
          if (e.at(i, j) && e.at(oracle_cell(x + t, n), j) &&
              e.at(i, oracle_cell(y + t * t, n))) {
            best_m = m;
            bx = i;
            by = j;
          }
        }
      if (best_m >= 0) break;
    }
    const auto got = pattern_search(e, t_min);
    if (best_m < 0) {
      CHECK(!got);
    } else {
      REQUIRE(got.has_value());
      CHECK(got->t == static_cast<double>(best_m) / n);
      CHECK(got->x == static_cast<double>(bx) / n);
      CHECK(got->y == static_cast<double>(by) / n);
    }
  }

  // consistency: restricted count positive at matching quadrature <-> found
  Rng rng2(23);
  for (int trial = 0; trial < 20; ++trial) {
    BitmapSet e = random_bitmap(n, 0.12, rng2);
    const double t_min = 0.3;
    double restricted = 0.0;
    for (int m = static_cast<int>(std::ceil(t_min * n)); m < n; ++m) {
      const double t = static_cast<double>(m) / n;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double x = static_cast<double>(i) / n;
          const double y = static_cast<double>(j) / n;
          if (e.at(i, j) && e.at(oracle_cell(x + t, n), j) &&
              e.at(i, oracle_cell(y + t * t, n)))
            restricted += 1.0;
        }
    }
    CHECK((restricted > 0.0) == static_cast<bool>(pattern_search(e, t_min)));
  }
}

TEST_CASE("bitmap round-trips and malformed rejects") {
  Rng rng(29);
  BitmapSet e = random_bitmap(8, 0.5, rng);
  BitmapSet t = bitmap_from_text(bitmap_to_text(e));
  BitmapSet j = bitmap_from_json(bitmap_to_json(e));
  CHECK(t.n == e.n);
  CHECK(t.cells == e.cells);
  CHECK(j.n == e.n);
  CHECK(j.cells == e.cells);
  for (const char* badtext :
       {"4\n0101\n0101\n0101\n", "4\n0101\n01015\n0101\n0101\n",
        "4\n0101\n0102\n0101\n0101\n", "x\n"})
    CHECK_THROWS_AS(bitmap_from_text(badtext), std::invalid_argument);
  CHECK_THROWS_AS(bitmap_from_json("{\"n\": 2, \"rows\": [\"01\"]}"),
                  std::invalid_argument);
}

TEST_CASE("averaged window transform values") {
  CHECK(std::abs(vartheta_hat(0.0) - 1.0) < 1e-8);
  CHECK(vartheta_hat(3.0) == vartheta_hat(-3.0));
  CHECK(std::abs(vartheta_hat(12.0)) < 1e-3);
}

TEST_CASE("dichotomy iteration: constants, stripe, energy budget, csv") {
  const int n = 64;
  GridFunction2D eps_const(n);
  for (auto& z : eps_const.v) z = 0.3;
  DichotomyThresholds th;
  th.eps = 0.3;
  th.c = 1.0;
  const auto run = dichotomy_run(eps_const, 1, 2, 5, th);
  REQUIRE(!run.records.empty());
  for (const auto& rec : run.records) {
    CHECK(rec.increment == 0.0);
    CHECK(rec.branch == DichotomyBranch::count_large);
    CHECK(std::abs(rec.count_I - 0.027) < 1e-13);  // eps^3
  }
  CHECK(run.truncated);
  const auto short_run = dichotomy_run(eps_const, 1, 2, 2, th);
  CHECK(!short_run.truncated);
  CHECK(short_run.records.size() == 2);

  // vertical stripe of width 1/8: increment peaks at the level whose
  // scale pair brackets the stripe width
  const int ns = 256;
  GridFunction2D stripe(ns);
  for (int j2 = 0; j2 < ns; ++j2)
    for (int i = 0; i < ns; ++i)
      stripe.at(i, j2) = cd(i < ns / 8 ? 1.0 : 0.0, 0.0);
  const auto srun = dichotomy_run(stripe, 1, 2, 3, th);
  REQUIRE(srun.records.size() == 3);
  size_t arg = 0;
  for (size_t l = 1; l < srun.records.size(); ++l)
    if (srun.records[l].increment > srun.records[arg].increment) arg = l;
  CHECK(arg == 1);

  const double cm = dichotomy_energy_constant(n, 1, 2, 3);
  CHECK(cm == doctest::Approx(3.932113).epsilon(1e-4));
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction2D f(n);
    for (auto& z : f.v) z = cd(rng.uniform(), 0.0);
    const auto r = dichotomy_run(f, 1, 2, 3, th);
    double ssq = 0.0;
    for (const auto& rec : r.records) ssq += rec.increment * rec.increment;
    const double l2 = norm_lp(f, 2.0);
    CHECK(ssq <= cm * l2 * l2 + 1e-12);
  }

  const auto csv = dichotomy_to_csv(srun);
  CHECK(csv.rfind("l,k_l,count,increment,branch\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  // stripe count ~ 1/128 dwarfs every 2^-(k+10) c eps^4 threshold
  CHECK(csv.find("count_large") != std::string::npos);
  CHECK(std::string(branch_name(DichotomyBranch::increment_large)) ==
        "increment_large");
}

}  // TEST_SUITE
