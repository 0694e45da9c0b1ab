#include "tht/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "tht/fft.hpp"
#include "tht/windows.hpp"

namespace tht {

namespace {

// Nearest-cell index of coordinate u on an n-cell periodic grid.
int mod_cell(double u, int n) {
  int c = static_cast<int>(std::floor(u * n)) % n;
  if (c < 0) c += n;
  return c;
}

bool band_admits(BandLimitSpec::Mode mode, double lambda, int s) {
  const double a = std::abs(static_cast<double>(s));
  switch (mode) {
    case BandLimitSpec::Mode::annulus:
      return a >= lambda && a <= 2.0 * lambda;
    case BandLimitSpec::Mode::lowpass:
      return a <= 2.0 * lambda;
    case BandLimitSpec::Mode::dc_control:
      return s == 0;
  }
  return false;
}

// Shared by the generator and the reassembly in decay_fit, so the gathered
// mode set is exactly the generated one.
bool mode_allowed(const BandLimitSpec& band, int cap, int s1, int s2) {
  const int designated = band.axis == 1 ? s1 : s2;
  const int transverse = band.axis == 1 ? s2 : s1;
  return std::abs(transverse) <= cap && band_admits(band.mode, band.lambda, designated);
}

}  // namespace

void check_band(const BandLimitSpec& band, int n, const char* where) {
  require(band.axis == 1 || band.axis == 2,
          std::string(where) + ": band axis must be 1 or 2");
  require(band.lambda >= 1.0, std::string(where) + ": band lambda must be >= 1");
  // Equality 2 lambda = n/2 is allowed: +n/2 aliases onto the stored -n/2 bin.
  require(2.0 * band.lambda <= 0.5 * n,
          std::string(where) + ": band not grid-representable (need 2 lambda <= n/2)");
}

GridFunction2D random_band_function(const BandLimitSpec& band, int n, Rng& rng,
                                    int transverse_cap) {
  check_band(band, n, "random_band_function");
  require(transverse_cap >= 0, "random_band_function: transverse_cap must be >= 0");
  Spectrum2D s(n);
  int filled = 0;
  for (int b2 = 0; b2 < n; ++b2) {
    const int s2 = bin_to_freq(b2, n);
    for (int b1 = 0; b1 < n; ++b1) {
      const int s1 = bin_to_freq(b1, n);
      if (!mode_allowed(band, transverse_cap, s1, s2)) continue;
      cd z = rng.gaussian_complex();
      // Low-pass draws carry a fixed (1+|xi|)^-1 envelope: the band is a
      // support hypothesis, so the function's effective frequency content
      // must not grow with lambda. Without this, widening the low-pass band
      // alone produces a decay trend (mass migrates to frequencies where the
      // oscillatory t-integral is small) and the annulus-removed control
      // could not be flat.
      if (band.mode == BandLimitSpec::Mode::lowpass) {
        const int designated = band.axis == 1 ? s1 : s2;
        z /= 1.0 + std::abs(static_cast<double>(designated));
      }
      s.at_bin(b1, b2) = z;
      ++filled;
    }
  }
  require(filled > 0, "random_band_function: degenerate band (no representable modes)");
  GridFunction2D f = inverse(s);
  const double sup = norm_lp(f, std::numeric_limits<double>::infinity());
  require(sup > 0.0, "random_band_function: degenerate draw");
  for (cd& z : f.v) z /= sup;
  return f;
}

double autocorr_energy(const GridFunction1D& f, double R) {
  require(R >= 0.0, "autocorr_energy: R must be >= 0");
  const int n = f.n;
  require(is_pow2(n), "autocorr_energy: n must be a power of two");
  const Spectrum1D s = forward(f);
  std::vector<double> p(n);
  for (int b = 0; b < n; ++b) p[b] = std::norm(s.c[b]);
  double acc = 0.0;
  for (int zb = 0; zb < n; ++zb) {
    if (std::abs(bin_to_freq(zb, n)) > R) continue;
    double inner = 0.0;
    for (int b = 0; b < n; ++b) inner += p[(b + zb) & (n - 1)] * p[b];
    acc += inner;
  }
  return acc;
}

StructureSplit structure_split(const GridFunction1D& f, double R, double rho) {
  require(R >= 0.0, "structure_split: R must be >= 0");
  require(rho > 0.0 && rho < 1.0, "structure_split: rho must lie in (0,1)");
  const int n = f.n;
  require(is_pow2(n), "structure_split: n must be a power of two");
  const Spectrum1D s = forward(f);
  std::vector<double> p(n);
  double total = 0.0;
  for (int b = 0; b < n; ++b) {
    p[b] = std::norm(s.c[b]);
    total += p[b];
  }
  std::vector<int> offsets;  // bins at circular frequency distance <= R
  for (int zb = 0; zb < n; ++zb)
    if (std::abs(bin_to_freq(zb, n)) <= R) offsets.push_back(zb);

  // Exhaustive window scan; ties resolve to the lowest bin so the split is a
  // function of f alone.
  int best_cb = 0;
  double best = -1.0;
  double autocorr = 0.0;
  for (int cb = 0; cb < n; ++cb) {
    double w = 0.0;
    for (int zb : offsets) w += p[(cb + zb) & (n - 1)];
    autocorr += w * p[cb];
    if (w > best) {
      best = w;
      best_cb = cb;
    }
  }

  StructureSplit out;
  Spectrum1D gs(n), hs(n);
  std::vector<char> in_window(n, 0);
  for (int zb : offsets) in_window[(best_cb + zb) & (n - 1)] = 1;
  for (int b = 0; b < n; ++b) {
    if (in_window[b])
      gs.c[b] = s.c[b];
    else
      hs.c[b] = s.c[b];
  }
  out.g = inverse(gs);
  out.h = inverse(hs);
  out.ball_center = bin_to_freq(best_cb, n);
  out.captured = best;
  out.hypothesis_held = autocorr >= rho * total * total;
  return out;
}

SharpFlatSplit sharp_flat_split(const GridFunction1D& f, const SharpFlatParams& params) {
  const int n = f.n;
  require(is_pow2(n), "sharp_flat_split: n must be a power of two");
  require(params.R >= 1.0 && params.R <= 0.5 * n,
          "sharp_flat_split: R must lie in [1, n/2]");
  require(params.rho > 0.0 && params.rho < 1.0,
          "sharp_flat_split: rho must lie in (0,1)");
  const double R = params.R;
  const Spectrum1D s = forward(f);

  // Spectral mass laid out on the signed frequency line [-n/2, n/2); the
  // windows and the interval scan live on this line (the -n/2 bin is read at
  // its negative representative).
  const int lo = -n / 2, hi = n / 2 - 1;
  std::vector<double> prefix(n + 1, 0.0);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double pw = std::norm(s.c[freq_to_bin(lo + k, n)]);
    prefix[k + 1] = prefix[k] + pw;
    total += pw;
  }

  SharpFlatSplit out;
  out.sharp = GridFunction1D(n);
  out.flat = f;
  if (total == 0.0) return out;  // nothing to select; sharp = 0, flat = f

  const double threshold = params.rho * total;
  auto interval_mass = [&](double a, double b) {
    const int s0 = std::max(lo, static_cast<int>(std::ceil(a)));
    const int s1 = std::min(hi, static_cast<int>(std::floor(b)));
    if (s0 > s1) return 0.0;
    return prefix[s1 - lo + 1] - prefix[s0 - lo];
  };

  // Candidate intervals [a, a+R] on a stride-R/4 lattice covering the line.
  // A window m is selected when some candidate of mass >= threshold meets its
  // open support ((-m - 3/4) R, (-m + 3/4) R).
  const SampledWindow eta = spatial_eta();
  const double stride = 0.25 * R;
  const long j_lo = static_cast<long>(std::floor((lo - R) / stride));
  const long j_hi = static_cast<long>(std::ceil(static_cast<double>(hi) / stride));
  std::set<int> selected;
  for (long j = j_lo; j <= j_hi; ++j) {
    const double a = j * stride;
    if (interval_mass(a, a + R) < threshold) continue;
    const double q = a / R;
    const long m_from = static_cast<long>(std::floor(-q - 1.75));
    const long m_to = static_cast<long>(std::ceil(0.75 - q));
    for (long m = m_from; m <= m_to; ++m) {
      const double md = static_cast<double>(m);
      if (a < (-md + 0.75) * R && a + R > (-md - 0.75) * R)
        selected.insert(static_cast<int>(m));
    }
  }

  Spectrum1D sh(n);
  for (int k = 0; k < n; ++k) {
    const int sf = lo + k;
    double w = 0.0;
    for (int m : selected) w += eta(sf / R + m);
    const int b = freq_to_bin(sf, n);
    sh.c[b] = s.c[b] * w;
  }
  out.sharp = inverse(sh);
  // flat = f - sharp in space: reconstruction is exact by construction.
  for (int i = 0; i < n; ++i) out.flat.v[i] = f.v[i] - out.sharp.v[i];
  out.selected.assign(selected.begin(), selected.end());
  return out;
}

namespace {

void check_box(const SublevelBox& box, const char* who) {
  require(box.x1 > box.x0 && box.y1 > box.y0,
          std::string(who) + ": box must have positive (x, y) extent");
  require(box.t0 > 0.0 && box.t1 > box.t0,
          std::string(who) + ": t-range must satisfy 0 < t0 < t1");
}

// Shared cell sweep: calls visit(|alpha(x+t,y) - 2 t beta(x,y+t^2)|) once per
// cell of the box grid and returns the cell count.
long sublevel_sweep(const GridFunction2D& alpha, const GridFunction2D& beta,
                    const SublevelBox& box, int t_cells,
                    const std::function<void(double)>& visit) {
  const int n = alpha.n;
  const int nx = std::max(1, static_cast<int>(std::lround((box.x1 - box.x0) * n)));
  const int ny = std::max(1, static_cast<int>(std::lround((box.y1 - box.y0) * n)));
  const int nt = t_cells > 0 ? t_cells : n;
  const double hx = (box.x1 - box.x0) / nx;
  const double hy = (box.y1 - box.y0) / ny;
  const double ht = (box.t1 - box.t0) / nt;
  for (int kt = 0; kt < nt; ++kt) {
    const double t = box.t0 + (kt + 0.5) * ht;
    const double tt = t * t;
    for (int jy = 0; jy < ny; ++jy) {
      const double y = box.y0 + (jy + 0.5) * hy;
      const int iy = mod_cell(y, n);
      const int iy2 = mod_cell(y + tt, n);
      for (int ix = 0; ix < nx; ++ix) {
        const double x = box.x0 + (ix + 0.5) * hx;
        const double a = alpha.at(mod_cell(x + t, n), iy).real();
        const double b = beta.at(mod_cell(x, n), iy2).real();
        visit(std::abs(a - 2.0 * t * b));
      }
    }
  }
  return static_cast<long>(nx) * ny * nt;
}

}  // namespace

double sublevel_measure(const GridFunction2D& alpha, const GridFunction2D& beta,
                        const SublevelBox& box, double eps, int t_cells) {
  require(eps > 0.0, "sublevel_measure: eps must be > 0");
  require(alpha.n == beta.n, "sublevel_measure: alpha and beta must share n");
  require(t_cells >= 0, "sublevel_measure: t_cells must be >= 0");
  check_box(box, "sublevel_measure");
  long count = 0;
  const long cells = sublevel_sweep(alpha, beta, box, t_cells, [&](double v) {
    if (v <= eps) ++count;
  });
  return box.volume() * static_cast<double>(count) / static_cast<double>(cells);
}

SublevelReport sublevel_fit(const GridFunction2D& alpha, const GridFunction2D& beta,
                            const SublevelBox& box, const std::vector<double>& epsilons,
                            int t_cells) {
  require(!epsilons.empty(), "sublevel_fit: epsilon sweep must be non-empty");
  for (double e : epsilons) require(e > 0.0, "sublevel_fit: eps must be > 0");
  require(alpha.n == beta.n, "sublevel_fit: alpha and beta must share n");
  require(t_cells >= 0, "sublevel_fit: t_cells must be >= 0");
  check_box(box, "sublevel_fit");

  std::vector<long> counts(epsilons.size(), 0);
  const long cells = sublevel_sweep(alpha, beta, box, t_cells, [&](double v) {
    for (size_t e = 0; e < epsilons.size(); ++e)
      if (v <= epsilons[e]) ++counts[e];
  });

  SublevelReport report;
  report.epsilons = epsilons;
  report.measures.resize(epsilons.size());
  for (size_t e = 0; e < epsilons.size(); ++e)
    report.measures[e] =
        box.volume() * static_cast<double>(counts[e]) / static_cast<double>(cells);
  const PowerFit fit = fit_power_law(report.epsilons, report.measures);
  report.fitted_sigma = fit.exponent;
  report.fitted_C = fit.constant;
  return report;
}

GridFunction2D adversarial_piecewise(int n, int max_depth, Rng& rng) {
  require(is_pow2(n) && n >= 4, "adversarial_piecewise: n must be a power of two >= 4");
  require(max_depth >= 0 && (1 << max_depth) <= n,
          "adversarial_piecewise: depth exceeds the grid");
  GridFunction2D f(n);
  // Splitting is forced down to depth 3 (at least an 8x8 cell mix) and coin-
  // flipped below that: a field that degenerates to a near-constant has no
  // zero crossings, which makes the sublevel trend vacuous instead of
  // adversarial.
  const int forced = std::min(max_depth, 3);
  // Depth-first with fixed quadrant order, so one rng stream always yields
  // the same field.
  std::function<void(int, int, int, int)> fill = [&](int i0, int j0, int size,
                                                     int depth) {
    if (size > 1 && (depth < forced || (depth < max_depth && rng.uniform() < 0.5))) {
      const int h = size / 2;
      fill(i0, j0, h, depth + 1);
      fill(i0 + h, j0, h, depth + 1);
      fill(i0, j0 + h, h, depth + 1);
      fill(i0 + h, j0 + h, h, depth + 1);
      return;
    }
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double val = sign * rng.uniform(0.5, 2.0);
    for (int j = j0; j < j0 + size; ++j)
      for (int i = i0; i < i0 + size; ++i) f.at(i, j) = val;
  };
  fill(0, 0, n, 0);
  return f;
}

namespace {

struct BandMode {
  int b1, b2;
  cd c;
};

std::vector<BandMode> gather_band(const Spectrum2D& s, const BandLimitSpec& band,
                                  int cap) {
  std::vector<BandMode> modes;
  const int n = s.n;
  for (int b2 = 0; b2 < n; ++b2) {
    const int s2 = bin_to_freq(b2, n);
    for (int b1 = 0; b1 < n; ++b1) {
      if (!mode_allowed(band, cap, bin_to_freq(b1, n), s2)) continue;
      modes.push_back({b1, b2, s.at_bin(b1, b2)});
    }
  }
  return modes;
}

// local_t through the phase table, assembled from the inputs' known band
// modes only: out^ = sum over (u in band1, v in band2) of
//   c1(u) c2(v) W(u1, v2) at bin (u1+v1, u2+v2),
// then one inverse transform and the spatial cutoff. Identical to the
// generic spectral route on band-limited inputs (off-band transform roundoff
// is dropped), but costs |band1| * |band2| instead of n^2 transforms.
GridFunction2D banded_local_t(const GridFunction2D& f1, const GridFunction2D& f2,
                              const BandLimitSpec& band1, const BandLimitSpec& band2,
                              int cap, const PhaseTable& table,
                              const GridFunction2D& spatial) {
  const int n = f1.n;
  const std::vector<BandMode> m1 = gather_band(forward(f1), band1, cap);
  const std::vector<BandMode> m2 = gather_band(forward(f2), band2, cap);
  Spectrum2D acc(n);
  for (const BandMode& u : m1) {
    for (const BandMode& v : m2) {
      const cd w = table.w[static_cast<size_t>(v.b2) * n + u.b1];
      const size_t bin =
          static_cast<size_t>((u.b2 + v.b2) & (n - 1)) * n + ((u.b1 + v.b1) & (n - 1));
      acc.c[bin] += u.c * v.c * w;
    }
  }
  GridFunction2D out = inverse(acc);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] *= spatial.v[k];
  return out;
}

}  // namespace

ExperimentReport decay_fit(const BandLimitSpec& band1, const BandLimitSpec& band2,
                           const std::vector<double>& lambdas, int trials,
                           const CutoffSpec& zeta, const DecayQuad& quad) {
  require(trials >= 10, "decay_fit: trials must be >= 10");
  require(!lambdas.empty(), "decay_fit: lambda sweep must be non-empty");
  require(is_pow2(quad.n) && quad.n >= 16,
          "decay_fit: n must be a power of two >= 16");
  for (double lam : lambdas) {
    BandLimitSpec b1 = band1, b2 = band2;
    b1.lambda = b2.lambda = lam;
    check_band(b1, quad.n, "decay_fit");
    check_band(b2, quad.n, "decay_fit");
  }
  const int cap = 8;  // transverse low-pass on both inputs
  const PhaseTable table = build_phase_table(zeta, quad.n, quad.t_cells);
  const GridFunction2D spatial = GridFunction2D::sample(
      quad.n, [&](double x, double y) { return cd(zeta.spatial(x, y), 0.0); });

  ExperimentReport report;
  report.name = "decay-fit";
  report.seed = quad.seed;
  report.n = quad.n;
  report.quad_density = quad.t_cells;
  report.sweep_label = "lambda";

  const Rng root(quad.seed);
  for (size_t li = 0; li < lambdas.size(); ++li) {
    const double lam = lambdas[li];
    BandLimitSpec b1 = band1, b2 = band2;
    b1.lambda = b2.lambda = lam;
    // Stream id ties to the lambda value (quantized), not its sweep slot, so
    // reordering the sweep does not change any trial.
    const Rng lam_stream =
        root.split(static_cast<std::uint64_t>(std::llround(lam * 4096.0)));
    // Trials write disjoint slots and own their rng streams, so the parallel
    // schedule cannot change the result.
    std::vector<double> vals(trials);
    parallel_for(trials, quad.exec, [&](int trial) {
      Rng tr = lam_stream.split(static_cast<std::uint64_t>(trial));
      const GridFunction2D f1 = random_band_function(b1, quad.n, tr, cap);
      const GridFunction2D f2 = random_band_function(b2, quad.n, tr, cap);
      vals[trial] =
          norm_lp(banded_local_t(f1, f2, b1, b2, cap, table, spatial), 1.0);
    });
    SweepRow row;
    row.x = lam;
    row.median = median_of(vals);
    row.max = *std::max_element(vals.begin(), vals.end());
    row.trials = trials;
    report.rows.push_back(row);
  }
  report.fit = fit_power_law(report.rows);
  report.set_scalar("fitted_sigma", -report.fit.exponent);
  return report;
}

}  // namespace tht
