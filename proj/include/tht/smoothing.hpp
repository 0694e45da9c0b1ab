#pragma once

#include <vector>

#include "tht/grid.hpp"
#include "tht/reports.hpp"
#include "tht/rng.hpp"
#include "tht/singular_ops.hpp"

namespace tht {

// Frequency-band hypothesis on one coordinate of a 2D input: an annulus
// lambda <= |xi_axis| <= 2 lambda, a low-pass ball |xi_axis| <= 2 lambda, or
// the degenerate control band xi_axis = 0 (violates the annulus hypothesis on
// purpose; used to show the decay trend is really driven by the band).
struct BandLimitSpec {
  int axis = 1;
  double lambda = 1.0;
  enum class Mode { annulus, lowpass, dc_control };
  Mode mode = Mode::annulus;
};

// axis in {1,2}, lambda >= 1, and 2*lambda <= n/2. Equality is allowed: the
// +n/2 frequency aliases onto the stored -n/2 bin, so the band stays
// grid-representable there.
void check_band(const BandLimitSpec& band, int n, const char* where);

// Random complex-Gaussian spectrum on the band (designated coordinate per
// band.mode, transverse coordinate low-passed to |xi| <= transverse_cap),
// returned in space and normalized to ||f||_inf = 1. Rejects empty bands.
// Low-pass draws are shaped by a fixed (1+|xi|)^-1 envelope: the band is a
// support hypothesis, so widening it must not by itself shift the function's
// frequency content to scale with lambda.
GridFunction2D random_band_function(const BandLimitSpec& band, int n, Rng& rng,
                                    int transverse_cap = 8);

struct SharpFlatParams {
  double R = 1.0;    // frequency window length, >= 1 and <= n/2
  double rho = 0.5;  // window mass threshold, in (0,1)
};

// Autocorrelation energy sum over frequency pairs at circular distance <= R
// (signed representative) of |f^(xi)|^2 |f^(xi')|^2. Equals the s-and-xi sum
// of |D_s f^|^2 for the difference functions D_s f = f(.+s) conj f.
double autocorr_energy(const GridFunction1D& f, double R);

// Orthogonal split f = g + h with g^ = f^ on the radius-R frequency window
// (2R+1 bins, circular) of maximal captured mass, found by exhaustive scan.
// captured = ||g||_2^2 always satisfies captured >= autocorr_energy(f,R) /
// ||f||_2^2; when autocorr_energy(f,R) >= rho ||f||_2^4 this yields the norm
// guarantee ||g||_2 >= (1/2) rho^{1/2} ||f||_2, reported in hypothesis_held.
struct StructureSplit {
  GridFunction1D g;
  GridFunction1D h;
  int ball_center = 0;  // signed frequency of the window center
  double captured = 0.0;
  bool hypothesis_held = false;
};
StructureSplit structure_split(const GridFunction1D& f, double R, double rho);

// Flat-energy constant of sharp_flat_split: autocorr_energy(f_flat, R) <=
// kFlatEnergyConstant * rho * ||f||_2^4. The factor 8 = 2 (stride-R/4 scan
// detects any qualifying interval only up to a neighbor pair) * 2 (a
// diameter-2R window splits into two length-R intervals) * 2 (a circular
// window may cross the +-n/2 seam and split into two line arcs).
constexpr double kFlatEnergyConstant = 8.0;

// Split against the unit-partition windows eta(xi/R + m): selected windows m
// are those admitting a length-R interval, scanned at stride R/4, that meets
// the window support and carries spectral mass >= rho ||f||_2^2. sharp takes
// the selected window multipliers, flat = f - sharp exactly. The number of
// selected windows is always <= 4/rho.
struct SharpFlatSplit {
  GridFunction1D sharp;
  GridFunction1D flat;
  std::vector<int> selected;  // window indices m, ascending
};
SharpFlatSplit sharp_flat_split(const GridFunction1D& f, const SharpFlatParams& params);

// Axis-aligned box K in (x, y, t) with positive t (so the t^2 shift keeps a
// definite sign). The (x, y) footprint lies in the unit square; lookups wrap.
struct SublevelBox {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  double t0 = 1.0, t1 = 2.0;
  double volume() const { return (x1 - x0) * (y1 - y0) * (t1 - t0); }
};

// Cell-counting measure of {(x,y,t) in K : |alpha(x+t, y) - 2 t beta(x, y+t^2)|
// <= eps}. alpha, beta are read by nearest-cell lookup (they stand for
// measurable, not smooth, functions); real parts are used. The (x, y) cell
// grid follows the functions' side n; t uses t_cells midpoint cells
// (t_cells = 0 picks n). Monotone non-decreasing in eps, bounded by |K|.
double sublevel_measure(const GridFunction2D& alpha, const GridFunction2D& beta,
                        const SublevelBox& box, double eps, int t_cells = 0);

struct SublevelReport {
  std::vector<double> epsilons;
  std::vector<double> measures;
  double fitted_sigma = 0.0;  // slope of log measure against log eps
  double fitted_C = 0.0;      // measure ~ C eps^sigma
};

// Sweep sublevel_measure over the epsilons (single pass: the expression is
// evaluated once per cell and compared against every threshold) and fit the
// power law through the nonzero measures.
SublevelReport sublevel_fit(const GridFunction2D& alpha, const GridFunction2D& beta,
                            const SublevelBox& box, const std::vector<double>& epsilons,
                            int t_cells = 0);

// Adversarial sublevel input: piecewise constant on a random dyadic partition
// of the unit square (splits are forced down to depth min(max_depth, 3), then
// continue with probability 1/2 until max_depth), cell values drawn from
// {-1,+1} * [1/2, 2] so |value| is comparable to 1 everywhere. The forced
// depth guarantees genuine sign/value mixing; a constant field admits no
// near-cancellation set at all.
GridFunction2D adversarial_piecewise(int n, int max_depth, Rng& rng);

// Quadrature/provenance knobs for decay_fit. t_cells sizes the phase table
// backing the local operator; the seed feeds per-trial streams derived from
// (seed, lambda, trial index).
struct DecayQuad {
  int n = 256;
  int t_cells = 384;
  std::uint64_t seed = 1;
  Exec exec = Exec::par;
};

// Decay-trend experiment: for each lambda, draw `trials` random pairs in the
// prescribed bands (band lambda fields are overridden by the sweep value),
// normalize ||f_j||_inf = 1, and record ||local_t(f1, f2)||_1 computed
// through the shared phase table. Reports per-lambda median/max and the
// fitted exponent of the median power law; fitted sigma (= -exponent) is
// stored in the scalar "fitted_sigma". trials >= 10 required.
ExperimentReport decay_fit(const BandLimitSpec& band1, const BandLimitSpec& band2,
                           const std::vector<double>& lambdas, int trials,
                           const CutoffSpec& zeta, const DecayQuad& quad);

}  // namespace tht
