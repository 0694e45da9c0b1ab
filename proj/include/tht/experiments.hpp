#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tht/paraproduct.hpp"
#include "tht/patterns.hpp"
#include "tht/reports.hpp"
#include "tht/singular_ops.hpp"
#include "tht/smoothing.hpp"

namespace tht {

// Experiment drivers shared by the CLI and the acceptance binary. Every
// driver returns a report that is a pure function of its options (seeds
// included), with a "pass" scalar where the command defines a pass/fail
// contract; wall-clock metadata is the caller's business.

// Exact-identity residuals: transform round-trip and Parseval, band
// telescoping, the autocorrelation pair identity, sharp/flat reconstruction
// with its window-count bound, martingale idempotence and mass conservation.
// Scalars carry one residual (or 0/1 flag) per identity plus "violations"
// and "pass".
struct IdentityOptions {
  int n = 32;
  std::uint64_t seed = 1;
};
ExperimentReport run_identity_suite(const IdentityOptions& opt);

// Trilinear lower bound over random f in [0,1] and every admissible
// martingale scale pair (k, l). Scalars: "violations" (count of failures
// beyond the 1e-12 slack), "min_margin", "pass".
struct LowerBoundOptions {
  int n = 16;
  std::uint64_t seed = 1;
  int trials = 1000;
};
ExperimentReport run_lower_bound_sweep(const LowerBoundOptions& opt);

// Telescoping identity over random convex trees: per-tree relative residual
// at the given quadrature (rows), plus a 2x/4x refinement ladder on the
// first refine_trees trees (the 4x ladder step costs ~64x the base run, so
// it runs on a prefix, not the whole ensemble). Pass: every default
// residual <= 1e-3 and every ladder strictly decreasing.
struct TelescopeOptions {
  int n = 16;
  std::uint64_t seed = 1;
  int trees = 10;
  int max_rects = 6;
  int max_depth = 3;
  int refine_trees = 2;
  double lambda = 1.5;
  double r = 0.5;
  FormQuad quad;
};
ExperimentReport run_telescope_check(const TelescopeOptions& opt);

// Empirical L1/L2xL2 ratios of the truncated transform and its maximal
// analogue across grid sizes. Rows sweep n with the transform ratio; the
// maximal ratios and the per-doubling growth factors land in scalars.
// Pass: no growth factor exceeds growth_cap.
struct NormEstimateOptions {
  std::vector<int> sizes = {32, 64, 128};
  std::uint64_t seed = 1;
  int trials = 50;
  double growth_cap = 1.5;
  ShellQuadrature quad;
};
ExperimentReport run_norm_estimate(const NormEstimateOptions& opt);

// Band-limited decay sweep (wraps decay_fit with the default cutoff).
// control = true moves all first-input mass to the zero frequency, the
// flat-trend control configuration.
struct DecayFitOptions {
  DecayQuad quad;
  std::vector<double> lambdas = {4, 8, 16, 32, 64};
  int trials = 50;
  bool control = false;
};
ExperimentReport run_decay_fit(const DecayFitOptions& opt);

// Sublevel-measure power law on adversarial piecewise-constant pairs; the
// control swaps in alpha = beta = 0, whose measure must equal the full box
// volume at every epsilon. Rows sweep epsilon (median/max over trials).
// Pass (adversarial): every per-trial fitted sigma >= 0.05 and measures
// monotone. Pass (control): every measure equals the box volume.
struct SublevelOptions {
  int n = 64;
  std::uint64_t seed = 1;
  int trials = 20;
  int max_depth = 4;
  SublevelBox box;
  std::vector<double> epsilons;
  int t_cells = 4096;
  bool control = false;

  SublevelOptions();
};
ExperimentReport run_sublevel_fit(const SublevelOptions& opt);

// Pattern triple search on a provided or random bitmap. Scalars: "found",
// the triple (x, y, t) when found, the set density, and "verified" (the
// triple re-read from the bitmap through the real-coordinate convention).
struct PatternSearchOptions {
  int n = 32;
  std::uint64_t seed = 1;
  double density = 0.3;
  double t_min = 1.0 / 32.0;
  std::optional<BitmapSet> bitmap;
};
ExperimentReport run_pattern_search(const PatternSearchOptions& opt);

// Energy-increment dichotomy on a provided or random bitmap. The CSV-ready
// per-level records ride alongside the report; scalars summarize the energy
// budget against dichotomy_energy_constant.
struct DichotomyOptions {
  int n = 64;
  std::uint64_t seed = 1;
  double density = 0.3;
  std::optional<BitmapSet> bitmap;
  int k0 = 1;
  int m_factor = 2;
  int max_iter = 4;
  DichotomyThresholds thresholds;
};
struct DichotomyExperiment {
  ExperimentReport report;
  DichotomyResult result;
};
DichotomyExperiment run_dichotomy(const DichotomyOptions& opt);

}  // namespace tht
