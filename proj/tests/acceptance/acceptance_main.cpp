// Acceptance gate: nine criteria, one PASS/FAIL line each, every tolerance
// and runtime budget pinned in this file. Exit 0 only if all nine hold.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tht/experiments.hpp"
#include "tht/fft.hpp"
#include "tht/grid.hpp"
#include "tht/paraproduct.hpp"
#include "tht/patterns.hpp"
#include "tht/reports.hpp"
#include "tht/rng.hpp"
#include "tht/singular_ops.hpp"

using namespace tht;

namespace {

struct Gate {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& note) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += note;
    }
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

GridFunction2D random_complex(int n, uint64_t seed) {
  Rng rng(seed);
  GridFunction2D f(n);
  for (auto& z : f.v) z = rng.gaussian_complex();
  return f;
}

int oracle_cell(double coord, int n) {
  long c = static_cast<long>(std::floor(coord * n));
  c %= n;
  if (c < 0) c += n;
  return static_cast<int>(c);
}

// --- criterion 1: exact identities at n = 32 ------------------------------
Gate criterion_identity() {
  Gate g;
  const ExperimentReport rep = run_identity_suite({32, 1});
  g.require(rep.scalar("roundtrip_residual") <= 1e-12, "round-trip > 1e-12");
  g.require(rep.scalar("parseval_residual") <= 1e-12, "Parseval > 1e-12");
  g.require(rep.scalar("band_telescoping_residual") <= 1e-12,
            "band telescoping > 1e-12");
  g.require(rep.scalar("autocorr_residual") <= 1e-10, "autocorrelation > 1e-10");
  g.require(rep.scalar("sharpflat_recon_residual") <= 1e-12,
            "sharp/flat reconstruction > 1e-12");
  g.require(rep.scalar("sharpflat_count_violations") == 0.0,
            "sharp/flat window count exceeded 4/rho");
  g.require(rep.scalar("martingale_violations") == 0.0,
            "martingale identities not bitwise");
  g.note("worst residual " + num(std::max({rep.scalar("roundtrip_residual"),
                                           rep.scalar("parseval_residual"),
                                           rep.scalar("band_telescoping_residual"),
                                           rep.scalar("autocorr_residual"),
                                           rep.scalar("sharpflat_recon_residual")})));
  return g;
}

// --- criterion 2: product-averaging lower bound ----------------------------
Gate criterion_lower_bound() {
  Gate g;
  double min_margin = 1e9;
  for (int n : {16, 32, 64}) {
    LowerBoundOptions opt;
    opt.n = n;
    opt.trials = 1000;
    const ExperimentReport rep = run_lower_bound_sweep(opt);
    g.require(rep.scalar("violations") == 0.0,
              "violations at n=" + std::to_string(n));
    min_margin = std::min(min_margin, rep.scalar("min_margin"));
  }
  g.note("3000 trials, min margin " + num(min_margin));
  return g;
}

// --- criterion 3: telescoping residual with refinement ladder --------------
Gate criterion_telescoping() {
  Gate g;
  const ExperimentReport rep = run_telescope_check({});
  g.require(rep.scalar("max_rel") <= 1e-3,
            "max relative residual " + num(rep.scalar("max_rel")) + " > 1e-3");
  g.require(rep.scalar("monotone") == 1.0,
            "residual not monotone under 2x/4x refinement");
  g.note("max rel " + num(rep.scalar("max_rel")) + " over 10 trees");
  return g;
}

// --- criterion 4: brute-force equivalences ---------------------------------
double aniso_oracle_error(const SymbolSpec& spec, const GridFunction2D& f1,
                          const GridFunction2D& f2) {
  const int n = f1.n;
  const GridFunction2D lib = aniso_apply(spec, f1, f2, Exec::seq);
  // direct per-axis DFT sums, independent of the library transforms
  std::vector<cd> a(static_cast<size_t>(n) * n), b(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int bx = 0; bx < n; ++bx) {
      cd sa(0, 0), sb(0, 0);
      for (int i = 0; i < n; ++i) {
        const double ang = -kTwoPi * bin_to_freq(bx, n) * i / n;
        sa += f1.at(i, j) * std::polar(1.0, ang);
        sb += f2.at(j, i) * std::polar(1.0, ang);  // j indexes x, i indexes y
      }
      a[static_cast<size_t>(j) * n + bx] = sa / static_cast<double>(n);
      b[static_cast<size_t>(j) * n + bx] = sb / static_cast<double>(n);
    }
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cd acc(0, 0);
      for (int bx = 0; bx < n; ++bx)
        for (int by = 0; by < n; ++by) {
          const int xi = bin_to_freq(bx, n), eta = bin_to_freq(by, n);
          const cd m = spec.eval(-static_cast<double>(xi), -static_cast<double>(eta));
          const double ang = kTwoPi * (static_cast<double>(xi) * i +
                                       static_cast<double>(eta) * j) / n;
          acc += m * a[static_cast<size_t>(j) * n + bx] *
                 b[static_cast<size_t>(i) * n + by] * std::polar(1.0, ang);
        }
      worst = std::max(worst, std::abs(acc - lib.at(i, j)));
    }
  return worst;
}

Gate criterion_brute_force() {
  Gate g;
  // (a) bilinear multiplier vs the O(n^4) double sum at n = 8
  const GridFunction2D f1 = random_complex(8, 901);
  const GridFunction2D f2 = random_complex(8, 902);
  double worst_aniso = 0.0;
  for (const char* name : {"identity", "cone", "aniso-riesz"})
    worst_aniso =
        std::max(worst_aniso, aniso_oracle_error(builtin_symbol(name), f1, f2));
  g.require(worst_aniso <= 1e-10,
            "bilinear multiplier vs double sum " + num(worst_aniso) + " > 1e-10");

  // (b) count integral and pattern search vs exhaustive enumeration at n = 32
  const int n = 32;
  Rng rng(903);
  bool counts_exact = true, patterns_exact = true;
  for (int trial = 0; trial < 10; ++trial) {
    BitmapSet e = random_bitmap(n, trial % 2 ? 0.08 : 0.3, rng);
    const int tn = 2 * n;
    double orc = 0.0;
    for (int q = 0; q < tn; ++q) {
      const double t = static_cast<double>(q) / tn;
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          if (e.at(i, j) &&
              e.at(oracle_cell(static_cast<double>(i) / n + t, n), j) &&
              e.at(i, oracle_cell(static_cast<double>(j) / n + t * t, n)))
            acc += 1.0;
      orc += acc / (static_cast<double>(n) * n);
    }
    orc /= tn;
    // every summand is a dyadic rational: equality is exact, not approximate
    counts_exact = counts_exact && count_integral(bitmap_to_grid(e), tn) == orc;

    const double t_min = trial % 3 ? 1.0 / n : 0.4;
    std::optional<PatternTriple> brute;
    for (int m = n - 1; m >= static_cast<int>(std::ceil(t_min * n)) && !brute;
         --m) {
      const double t = static_cast<double>(m) / n;
      for (int j = 0; j < n && !brute; ++j)
        for (int i = 0; i < n && !brute; ++i)
          if (e.at(i, j) &&
              e.at(oracle_cell(static_cast<double>(i) / n + t, n), j) &&
              e.at(i, oracle_cell(static_cast<double>(j) / n + t * t, n)))
            brute = PatternTriple{static_cast<double>(i) / n,
                                  static_cast<double>(j) / n, t};
    }
    const auto got = pattern_search(e, t_min);
    patterns_exact = patterns_exact &&
                     (brute.has_value() == got.has_value()) &&
                     (!brute || (brute->x == got->x && brute->y == got->y &&
                                 brute->t == got->t));
  }
  g.require(counts_exact, "count integral differs from exhaustive enumeration");
  g.require(patterns_exact, "pattern search differs from exhaustive enumeration");

  // (c) factorized forms vs the direct O(n^4)-per-node sum at n = 8
  const DyadicGeometry geo;
  Rng trng(904);
  const Tree tree = random_convex_tree(geo, {0, 0, 0}, 5, 2, trng);
  FormParams prm;
  prm.lambda = 1.5;
  prm.r = 0.5;
  prm.u = 0.7;
  prm.v = -0.3;
  const FormQuad fq{8, 8};
  const GridFunction2D h1 = random_complex(8, 905), h2 = random_complex(8, 906),
                       h3 = random_complex(8, 907), h4 = random_complex(8, 908);
  double worst_form = 0.0;
  for (FormKind kind : {FormKind::lambda_uv, FormKind::theta1, FormKind::theta2,
                        FormKind::xi, FormKind::bark}) {
    const cd fast = quad_form(kind, tree, h1, h2, h3, h4, prm, fq, Exec::seq);
    const cd ref = quad_form_reference(kind, tree, h1, h2, h3, h4, prm, fq);
    worst_form = std::max(worst_form, std::abs(fast - ref));
  }
  g.require(worst_form <= 1e-10,
            "factorized form vs direct sum " + num(worst_form) + " > 1e-10");
  g.note("multiplier err " + num(worst_aniso) + ", form err " + num(worst_form));
  return g;
}

// --- criterion 5: smoothing decay trend -------------------------------------
Gate criterion_decay(double* sigma_out, double* control_out) {
  Gate g;
  const ExperimentReport conf = run_decay_fit({});
  DecayFitOptions copt;
  copt.control = true;
  const ExperimentReport ctrl = run_decay_fit(copt);
  *sigma_out = conf.scalar("fitted_sigma");
  *control_out = ctrl.scalar("fitted_sigma");
  g.require(*sigma_out > 0.0, "conforming sigma " + num(*sigma_out) + " <= 0");
  g.require(std::abs(*control_out) < 0.05,
            "control slope " + num(*control_out) + " >= 0.05");
  g.note("sigma " + num(*sigma_out) + ", control slope " + num(*control_out));
  return g;
}

// --- criterion 6: sublevel power-law trend ----------------------------------
Gate criterion_sublevel() {
  Gate g;
  const ExperimentReport adv = run_sublevel_fit(SublevelOptions{});
  g.require(adv.scalar("min_fitted_sigma") >= 0.05,
            "min sigma " + num(adv.scalar("min_fitted_sigma")) + " < 0.05");
  g.require(adv.scalar("monotone") == 1.0, "measures not monotone in epsilon");
  SublevelOptions copt;
  copt.control = true;
  const ExperimentReport ctrl = run_sublevel_fit(copt);
  g.require(ctrl.scalar("all_equal_K") == 1.0,
            "zero-field control != |K| at some epsilon");
  g.note("20 pairs, min sigma " + num(adv.scalar("min_fitted_sigma")));
  return g;
}

// --- criterion 7: empirical norm stability ----------------------------------
Gate criterion_norm_growth() {
  Gate g;
  const ExperimentReport rep = run_norm_estimate({});
  double worst = 0.0;
  for (const char* key : {"t_growth_32_64", "t_growth_64_128", "m_growth_32_64",
                          "m_growth_64_128"}) {
    worst = std::max(worst, rep.scalar(key));
    g.require(rep.scalar(key) <= 1.5,
              std::string(key) + " = " + num(rep.scalar(key)) + " > 1.5");
  }
  g.note("worst per-doubling growth " + num(worst));
  return g;
}

// --- criterion 8: shifted maximal log-growth --------------------------------
Gate criterion_shifted_maximal() {
  Gate g;
  // pinned after measurement: observed sup 1.454, bound with ~25% headroom
  const double kC = 1.8;
  const int n = 256;
  const auto s_set = full_s_range(n);
  Rng root(2026);
  double sup_ratio = 0.0;
  int arg_sigma = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng = root.split(trial);
    GridFunction1D f(n);
    for (auto& z : f.v) z = rng.gaussian_complex();
    const double fn = norm_lp(f, 2.0);
    for (int sigma = 0; sigma <= 256; ++sigma) {
      const GridFunction1D m = shifted_maximal(f, sigma, s_set);
      const double c =
          norm_lp(m, 2.0) / fn / std::sqrt(std::log(2.0 + sigma));
      if (c > sup_ratio) {
        sup_ratio = c;
        arg_sigma = sigma;
      }
    }
  }
  g.require(sup_ratio <= kC, "ratio/sqrt(log(2+sigma)) " + num(sup_ratio) +
                                 " > " + num(kC));
  g.note("sup " + num(sup_ratio) + " at sigma=" + std::to_string(arg_sigma) +
         ", bound C=" + num(kC));
  return g;
}

// --- criterion 9: byte-identical reports -------------------------------------
Gate criterion_determinism() {
  Gate g;
  int checked = 0;

  auto twice = [&](const std::string& label, auto&& run) {
    const std::string a = report_to_json(run());
    const std::string b = report_to_json(run());
    g.require(!a.empty() && a == b, label + " report not byte-identical");
    ++checked;
  };

  IdentityOptions io;
  io.n = 16;
  io.seed = 5;
  twice("identity-suite", [&] { return run_identity_suite(io); });

  LowerBoundOptions lo;
  lo.n = 16;
  lo.trials = 50;
  twice("lower-bound-sweep", [&] { return run_lower_bound_sweep(lo); });

  TelescopeOptions to;
  to.trees = 2;
  to.refine_trees = 0;
  to.quad = {32, 16};
  twice("telescope-check", [&] { return run_telescope_check(to); });

  DecayFitOptions dopt;
  dopt.quad.n = 64;
  dopt.quad.t_cells = 96;
  dopt.lambdas = {4, 8};
  dopt.trials = 10;
  twice("decay-fit", [&] { return run_decay_fit(dopt); });

  PatternSearchOptions po;
  po.n = 32;
  po.seed = 7;
  twice("pattern-search", [&] { return run_pattern_search(po); });

  DichotomyOptions dio;
  dio.n = 32;
  twice("dichotomy", [&] { return run_dichotomy(dio).report; });

  g.note(std::to_string(checked) + " drivers re-run byte-identically");
  return g;
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* name;
    Gate (*run)();
    double budget_s;  // 0 = no pinned runtime budget
  };

  // criterion 5 carries two outputs; adapt it to the common shape
  static double sigma5 = 0.0, control5 = 0.0;
  const auto run5 = [] { return criterion_decay(&sigma5, &control5); };

  const std::vector<Row> rows = {
      {1, "exact identity suite (n=32)", criterion_identity, 10.0},
      {2, "averaging lower bound, 3x1000 trials", criterion_lower_bound, 60.0},
      {3, "telescoping residual + refinement", criterion_telescoping, 300.0},
      {4, "brute-force equivalences", criterion_brute_force, 0.0},
      {5, "band decay trend + control", +run5, 900.0},
      {6, "sublevel power law + control", criterion_sublevel, 300.0},
      {7, "norm growth under doubling", criterion_norm_growth, 900.0},
      {8, "shifted maximal log bound", criterion_shifted_maximal, 0.0},
      {9, "byte-identical reports", criterion_determinism, 0.0},
  };

  int failures = 0;
  for (const auto& row : rows) {
    const auto t0 = std::chrono::steady_clock::now();
    Gate gate;
    try {
      gate = row.run();
    } catch (const std::exception& ex) {
      gate.pass = false;
      gate.detail = std::string("exception: ") + ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (row.budget_s > 0.0 && secs >= row.budget_s) {
      gate.pass = false;
      gate.detail += (gate.detail.empty() ? "" : "; ") + std::string("over budget");
    }
    std::printf("%s criterion %d: %s (%s; %.1f s%s)\n",
                gate.pass ? "PASS" : "FAIL", row.id, row.name,
                gate.detail.c_str(), secs,
                row.budget_s > 0.0
                    ? (" / " + num(row.budget_s) + " s budget").c_str()
                    : "");
    if (!gate.pass) ++failures;
  }
  if (failures) std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
