#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tht/experiments.hpp"
#include "tht/patterns.hpp"
#include "tht/reports.hpp"

using namespace tht;

TEST_SUITE("cli_io") {

TEST_CASE("power-law fit recovers exact exponents") {
  std::vector<double> xs, ys;
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    xs.push_back(x);
    ys.push_back(3.0 * std::pow(x, -2.0));
  }
  const PowerFit fit = fit_power_law(xs, ys);
  CHECK(fit.exponent == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.constant == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.rms_log_residual < 1e-12);
  CHECK(fit.points_used == 5);

  // non-positive samples are skipped; fewer than two points degenerates
  const PowerFit skip = fit_power_law({1.0, -2.0, 4.0}, {2.0, 5.0, 0.0});
  CHECK(skip.points_used == 1);
  CHECK(skip.exponent == 0.0);
  const PowerFit empty = fit_power_law(std::vector<double>{}, {});
  CHECK(empty.points_used == 0);
  CHECK(empty.exponent == 0.0);
}

TEST_CASE("median of odd and even samples") {
  CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median_of({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median_of({7.0}) == 7.0);
}

TEST_CASE("report scalars: set, read, missing-key throw") {
  ExperimentReport rep;
  rep.name = "demo";
  rep.set_scalar("alpha", 1.5);
  rep.set_scalar("beta", -2.0);
  rep.set_scalar("alpha", 2.5);  // overwrite keeps one entry
  CHECK(rep.scalar("alpha") == 2.5);
  CHECK(rep.has_scalar("beta"));
  CHECK(!rep.has_scalar("gamma"));
  CHECK_THROWS_AS(rep.scalar("gamma"), std::invalid_argument);
}

TEST_CASE("report json is byte-stable and carries fixed keys") {
  ExperimentReport rep;
  rep.name = "demo";
  rep.seed = 42;
  rep.n = 16;
  rep.quad_density = 128;
  rep.sweep_label = "lambda";
  rep.rows.push_back({4.0, 0.25, 0.5, 10});
  rep.rows.push_back({8.0, 0.125, 0.25, 10});
  rep.fit = fit_power_law(rep.rows);
  rep.set_scalar("fitted_sigma", 1.0);
  const std::string a = report_to_json(rep);
  const std::string b = report_to_json(rep);
  CHECK(a == b);

  const auto doc = nlohmann::json::parse(a);
  CHECK(doc.at("name") == "demo");
  CHECK(doc.at("seed") == 42);
  CHECK(doc.at("n") == 16);
  CHECK(doc.at("quad_density") == 128);
  CHECK(doc.at("sweep_label") == "lambda");
  CHECK(doc.at("rows").size() == 2);
  CHECK(doc.at("rows")[0].at("x") == 4.0);
  CHECK(doc.at("rows")[1].at("median") == 0.125);
  CHECK(doc.at("fit").at("exponent") == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(doc.at("scalars").at("fitted_sigma") == 1.0);

  const std::string csv = report_to_csv(rep);
  CHECK(csv.rfind("lambda,median,max,trials\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("identical driver configs reproduce byte-identical reports") {
  IdentityOptions opt;
  opt.n = 16;
  opt.seed = 9;
  const std::string a = report_to_json(run_identity_suite(opt));
  const std::string b = report_to_json(run_identity_suite(opt));
  CHECK(a == b);
  CHECK(!a.empty());

  PatternSearchOptions popt;
  popt.n = 16;
  popt.seed = 5;
  popt.density = 0.25;
  popt.t_min = 1.0 / 16;
  const std::string pa = report_to_json(run_pattern_search(popt));
  const std::string pb = report_to_json(run_pattern_search(popt));
  CHECK(pa == pb);
}

TEST_CASE("pattern driver honors an explicit bitmap") {
  BitmapSet e(8);
  for (int i = 0; i < 8; ++i) e.set(i, i, true);
  e.set(1, 0, true);
  PatternSearchOptions opt;
  opt.n = 32;  // overridden by the bitmap side
  opt.seed = 1;
  opt.t_min = 1.0 / 8;
  opt.bitmap = e;
  const ExperimentReport rep = run_pattern_search(opt);
  CHECK(rep.n == 8);
  CHECK(rep.scalar("density") == doctest::Approx(9.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("dichotomy driver mirrors the iteration records") {
  DichotomyOptions opt;
  opt.n = 32;
  opt.seed = 3;
  opt.density = 0.4;
  opt.max_iter = 3;
  const DichotomyExperiment ex = run_dichotomy(opt);
  CHECK(ex.report.rows.size() == ex.result.records.size());
  const std::string csv = dichotomy_to_csv(ex.result);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        static_cast<long>(ex.result.records.size()) + 1);
  for (size_t i = 0; i < ex.result.records.size(); ++i)
    CHECK(ex.report.rows[i].x == static_cast<double>(ex.result.records[i].l));
}

}  // TEST_SUITE
