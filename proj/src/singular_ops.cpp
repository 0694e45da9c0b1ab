#include "tht/singular_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <utility>

#include "tht/fft.hpp"
#include "tht/windows.hpp"

namespace tht {

namespace {

const SampledWindow& annulus() {
  static const SampledWindow w = annulus_psi();
  return w;
}

void check_pair(const GridFunction2D& f1, const GridFunction2D& f2, const char* who) {
  require(f1.n == f2.n, std::string(who) + ": grids must share n");
  require(is_pow2(f1.n), std::string(who) + ": n must be a power of two");
}

void check_scale(int j, const char* who) {
  // Shell reaches |t| = 2^{1-j}; it must stay below the torus half-width.
  require(std::ldexp(1.0, 1 - j) < 0.5,
          std::string(who) + ": scale too coarse for the torus (need 2^(1-j) < 1/2)");
}

// Accumulate out += kern * a * b over all cells.
void fma_grid(GridFunction2D& out, double kern, const GridFunction2D& a,
              const GridFunction2D& b, Exec exec) {
  const int n = out.n;
  parallel_for(n, exec, [&](int j) {
    const size_t off = static_cast<size_t>(j) * n;
    for (int i = 0; i < n; ++i)
      out.v[off + i] += kern * (a.v[off + i] * b.v[off + i]);
  });
}

GridFunction2D abs_grid(const GridFunction2D& f) {
  GridFunction2D g(f.n);
  for (size_t k = 0; k < f.v.size(); ++k) g.v[k] = std::abs(f.v[k]);
  return g;
}

int max_band_index(int n) { return ilog2(n) - 1; }

}  // namespace

ShellNodes shell_nodes(int j, int nodes_per_shell) {
  require(nodes_per_shell >= 4, "shell_nodes: nodes_per_shell must be >= 4");
  ShellNodes nodes;
  const double a = std::ldexp(0.5, -j);  // 2^-j / 2
  const double b = std::ldexp(2.0, -j);  // 2^-j * 2
  const double h = (b - a) / nodes_per_shell;
  nodes.t.reserve(2 * nodes_per_shell);
  nodes.w.reserve(2 * nodes_per_shell);
  for (int k = 0; k < nodes_per_shell; ++k) {
    const double t = a + (k + 0.5) * h;
    nodes.t.push_back(t);
    nodes.w.push_back(h);
    nodes.t.push_back(-t);  // mirrored so odd kernels cancel exactly
    nodes.w.push_back(h);
  }
  return nodes;
}

namespace {

// Shared t-loop: out += sum_nodes kern(t) * shift1(f1, t) * shift2(f2, t^2).
// The node loop is serial (fixed accumulation order); parallelism lives in
// the per-node row transforms and the cellwise multiply.
void accumulate_scale(GridFunction2D& out, const AxisSpectrum& sp1,
                      const AxisSpectrum& sp2, const ShellNodes& nodes,
                      const std::function<double(double)>& kern, Exec exec) {
  GridFunction2D sh1(out.n), sh2(out.n);
  for (size_t k = 0; k < nodes.t.size(); ++k) {
    const double t = nodes.t[k];
    const double kv = kern(t) * nodes.w[k];
    if (kv == 0.0) continue;
    shift_from_axis_spectrum(sp1, t, sh1, exec);
    shift_from_axis_spectrum(sp2, t * t, sh2, exec);
    fma_grid(out, kv, sh1, sh2, exec);
  }
}

}  // namespace

GridFunction2D single_scale(const GridFunction2D& f1, const GridFunction2D& f2,
                            int j, int nodes_per_shell, Exec exec) {
  check_pair(f1, f2, "single_scale");
  check_scale(j, "single_scale");
  const AxisSpectrum sp1 = axis_spectrum(f1, 1);
  const AxisSpectrum sp2 = axis_spectrum(f2, 2);
  GridFunction2D out(f1.n);
  const ShellNodes nodes = shell_nodes(j, nodes_per_shell);
  const double scale = std::ldexp(1.0, j);
  accumulate_scale(out, sp1, sp2, nodes,
                   [&](double t) { return annulus()(scale * t) / t; }, exec);
  return out;
}

GridFunction2D truncated_t(const GridFunction2D& f1, const GridFunction2D& f2,
                           const ShellQuadrature& quad, Exec exec) {
  check_pair(f1, f2, "truncated_t");
  require(quad.j_min <= quad.j_max, "truncated_t: empty scale range");
  check_scale(quad.j_min, "truncated_t");
  const AxisSpectrum sp1 = axis_spectrum(f1, 1);
  const AxisSpectrum sp2 = axis_spectrum(f2, 2);
  GridFunction2D out(f1.n);
  for (int j = quad.j_min; j <= quad.j_max; ++j) {
    const ShellNodes nodes = shell_nodes(j, quad.nodes_per_shell);
    const double scale = std::ldexp(1.0, j);
    accumulate_scale(out, sp1, sp2, nodes,
                     [&](double t) { return annulus()(scale * t) / t; }, exec);
  }
  return out;
}

PairedResult paired_component(const GridFunction2D& f1, const GridFunction2D& f2,
                              int k1, int k2, const ShellQuadrature& quad, Exec exec) {
  check_pair(f1, f2, "paired_component");
  const int bmax = max_band_index(f1.n);
  PairedResult res;
  res.out = GridFunction2D(f1.n);
  res.empty_sum = true;
  for (int j = quad.j_min; j <= quad.j_max; ++j) {
    const int b1 = j + k1;
    const int b2 = 2 * j + k2;
    if (b1 < 0 || b1 > bmax || b2 < 0 || b2 > bmax) continue;
    res.empty_sum = false;
    const GridFunction2D d1 = apply_band(f1, {BandKind::delta, b1, 1}, exec);
    const GridFunction2D d2 = apply_band(f2, {BandKind::delta, b2, 2}, exec);
    const GridFunction2D piece = single_scale(d1, d2, j, quad.nodes_per_shell, exec);
    for (size_t k = 0; k < res.out.v.size(); ++k) res.out.v[k] += piece.v[k];
  }
  return res;
}

GridFunction2D frequency_component(const GridFunction2D& f1, const GridFunction2D& f2,
                                   FreqClass omega, int k_window,
                                   const ShellQuadrature& quad, Exec exec) {
  check_pair(f1, f2, "frequency_component");
  require(k_window >= 0, "frequency_component: k_window must be >= 0");
  const int bmax = max_band_index(f1.n);

  // Band projections are shared across (j, k) pairs.
  std::map<int, GridFunction2D> bands1, bands2;
  auto band1 = [&](int b) -> const GridFunction2D& {
    auto it = bands1.find(b);
    if (it == bands1.end())
      it = bands1.emplace(b, apply_band(f1, {BandKind::delta, b, 1}, exec)).first;
    return it->second;
  };
  auto band2 = [&](int b) -> const GridFunction2D& {
    auto it = bands2.find(b);
    if (it == bands2.end())
      it = bands2.emplace(b, apply_band(f2, {BandKind::delta, b, 2}, exec)).first;
    return it->second;
  };

  GridFunction2D out(f1.n);
  for (int j = quad.j_min; j <= quad.j_max; ++j) {
    for (int b1 = std::max(0, j - k_window); b1 <= std::min(bmax, j + k_window); ++b1) {
      for (int b2 = std::max(0, 2 * j - k_window);
           b2 <= std::min(bmax, 2 * j + k_window); ++b2) {
        if (classify_pair(b1 - j, b2 - 2 * j) != omega) continue;
        const GridFunction2D piece =
            single_scale(band1(b1), band2(b2), j, quad.nodes_per_shell, exec);
        for (size_t k = 0; k < out.v.size(); ++k) out.v[k] += piece.v[k];
      }
    }
  }
  return out;
}

CutoffSpec default_cutoff() {
  CutoffSpec cut;
  const SampledWindow eta = spatial_eta();
  const SampledWindow tau = bump_tau();
  cut.spatial = [eta](double x, double y) {
    return eta(2.0 * (x - 0.5)) * eta(2.0 * (y - 0.5));
  };
  cut.t_lo = 0.1;
  cut.t_hi = 0.5;
  // Map the [1/2, 2] bump onto [t_lo, t_hi].
  cut.temporal = [tau](double t) { return tau(0.5 + (t - 0.1) * (1.5 / 0.4)); };
  return cut;
}

namespace {

void check_cutoff(const CutoffSpec& cut, const char* who) {
  require(cut.t_lo > 0.0 && cut.t_lo < cut.t_hi && cut.t_hi <= 0.5,
          std::string(who) + ": temporal support must sit inside (0, 1/2]");
  require(static_cast<bool>(cut.spatial) && static_cast<bool>(cut.temporal),
          std::string(who) + ": cutoff must provide spatial and temporal factors");
}

GridFunction2D sample_spatial(const CutoffSpec& cut, int n) {
  GridFunction2D s(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      s.at(i, j) = cut.spatial(static_cast<double>(i) / n, static_cast<double>(j) / n);
  return s;
}

}  // namespace

GridFunction2D local_t(const GridFunction2D& f1, const GridFunction2D& f2,
                       const CutoffSpec& cut, int t_nodes, Exec exec) {
  check_pair(f1, f2, "local_t");
  check_cutoff(cut, "local_t");
  require(t_nodes >= 16, "local_t: t_nodes must be >= 16");
  const AxisSpectrum sp1 = axis_spectrum(f1, 1);
  const AxisSpectrum sp2 = axis_spectrum(f2, 2);
  GridFunction2D out(f1.n), sh1(f1.n), sh2(f1.n);
  const double h = (cut.t_hi - cut.t_lo) / t_nodes;
  for (int k = 0; k < t_nodes; ++k) {
    const double t = cut.t_lo + (k + 0.5) * h;
    const double kv = cut.temporal(t) * h;
    if (kv == 0.0) continue;
    shift_from_axis_spectrum(sp1, t, sh1, exec);
    shift_from_axis_spectrum(sp2, t * t, sh2, exec);
    fma_grid(out, kv, sh1, sh2, exec);
  }
  const GridFunction2D spatial = sample_spatial(cut, f1.n);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] *= spatial.v[k];
  return out;
}

PhaseTable build_phase_table(const CutoffSpec& cut, int n, int t_cells) {
  check_cutoff(cut, "build_phase_table");
  require(is_pow2(n), "build_phase_table: n must be a power of two");
  require(t_cells >= 64, "build_phase_table: t_cells must be >= 64");
  PhaseTable table;
  table.n = n;
  table.w.assign(static_cast<size_t>(n) * n, cd(0.0, 0.0));

  // Composite Simpson nodes across [t_lo, t_hi].
  const int m = 2 * t_cells + 1;
  const double h = (cut.t_hi - cut.t_lo) / t_cells;
  std::vector<double> tk(m), qk(m);
  for (int k = 0; k < m; ++k) {
    tk[k] = cut.t_lo + 0.5 * h * k;
    double w = (k == 0 || k == m - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    qk[k] = cut.temporal(tk[k]) * w * h / 6.0;
  }

  std::vector<cd> p1(n), p2(n);
  for (int k = 0; k < m; ++k) {
    if (qk[k] == 0.0) continue;
    for (int b = 0; b < n; ++b) {
      const double a1 = kTwoPi * bin_to_freq(b, n) * tk[k];
      const double a2 = kTwoPi * bin_to_freq(b, n) * tk[k] * tk[k];
      p1[b] = cd(std::cos(a1), std::sin(a1));
      p2[b] = cd(std::cos(a2), std::sin(a2));
    }
    for (int b2 = 0; b2 < n; ++b2) {
      const cd z2 = qk[k] * p2[b2];
      cd* row = table.w.data() + static_cast<size_t>(b2) * n;
      for (int b1 = 0; b1 < n; ++b1) row[b1] += z2 * p1[b1];
    }
  }
  return table;
}

namespace {

// Bilinear spectral assembly shared by local_t_spectral and aniso_apply:
//   out(x,y) = sum_{b1,b2} W(b2*n+b1) a(b1,y) b(x,b2) e^{2 pi i (b1 x + b2 y)/n}
// with a, b the axis spectra of the two inputs. Row y fixed: the b1 sum is
// one inverse FFT of W(.,b2) a(.,y); the b2 sum then attaches b(x,b2) and the
// inverse phase w_y(b2) = exp(2 pi i b2 y / n). Zero rows of W are skipped,
// which matters when W is band-limited.
GridFunction2D spectral_bilinear(const std::vector<cd>& w, const AxisSpectrum& sp1,
                                 const AxisSpectrum& sp2, int n, Exec exec) {
  GridFunction2D out(n);
  parallel_for(n, exec, [&](int jrow) {
    std::vector<cd> buf(n);
    std::vector<cd> acc(n, cd(0.0, 0.0));
    const cd* a_row = sp1.a.data() + static_cast<size_t>(jrow) * n;
    for (int b2 = 0; b2 < n; ++b2) {
      const cd* wrow = w.data() + static_cast<size_t>(b2) * n;
      bool nonzero = false;
      for (int b1 = 0; b1 < n; ++b1) {
        buf[b1] = wrow[b1] * a_row[b1];
        nonzero = nonzero || (buf[b1] != cd(0.0, 0.0));
      }
      if (!nonzero) continue;
      fft_pow2(buf.data(), n, true);
      const double ang = kTwoPi * b2 * jrow / n;
      const cd wy(std::cos(ang), std::sin(ang));
      for (int i = 0; i < n; ++i)
        acc[i] += buf[i] * sp2.a[static_cast<size_t>(i) * n + b2] * wy;
    }
    cd* dst = out.v.data() + static_cast<size_t>(jrow) * n;
    std::copy(acc.begin(), acc.end(), dst);
  });
  return out;
}

}  // namespace

GridFunction2D local_t_spectral(const GridFunction2D& f1, const GridFunction2D& f2,
                                const CutoffSpec& cut, const PhaseTable& table,
                                Exec exec) {
  check_pair(f1, f2, "local_t_spectral");
  require(table.n == f1.n, "local_t_spectral: phase table built for different n");
  const int n = f1.n;
  const AxisSpectrum sp1 = axis_spectrum(f1, 1);  // a(xi, y): index y*n + b1
  const AxisSpectrum sp2 = axis_spectrum(f2, 2);  // b(x, eta): index x*n + b2
  GridFunction2D out = spectral_bilinear(table.w, sp1, sp2, n, exec);
  const GridFunction2D spatial = sample_spatial(cut, n);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] *= spatial.v[k];
  return out;
}

cd local_form(const GridFunction2D& f1, const GridFunction2D& f2,
              const GridFunction2D& f3, const CutoffSpec& cut, int t_nodes,
              Exec exec) {
  require(f1.n == f3.n, "local_form: grids must share n");
  const GridFunction2D field = local_t(f1, f2, cut, t_nodes, exec);
  cd acc(0.0, 0.0);
  for (size_t k = 0; k < field.v.size(); ++k) acc += field.v[k] * f3.v[k];
  return acc / (static_cast<double>(f1.n) * f1.n);
}

GridFunction2D maximal_op(const GridFunction2D& f1, const GridFunction2D& f2,
                          const ShellQuadrature& quad, Exec exec) {
  check_pair(f1, f2, "maximal_op");
  require(quad.j_min <= quad.j_max, "maximal_op: empty scale range");
  check_scale(quad.j_min, "maximal_op");
  const GridFunction2D a1 = abs_grid(f1);
  const GridFunction2D a2 = abs_grid(f2);
  const AxisSpectrum sp1 = axis_spectrum(a1, 1);
  const AxisSpectrum sp2 = axis_spectrum(a2, 2);
  GridFunction2D out(f1.n);
  for (int j = quad.j_min; j <= quad.j_max; ++j) {
    GridFunction2D mj(f1.n);
    const ShellNodes nodes = shell_nodes(j, quad.nodes_per_shell);
    const double scale = std::ldexp(1.0, j);
    accumulate_scale(mj, sp1, sp2, nodes,
                     [&](double t) { return annulus()(scale * t) * scale; }, exec);
    for (size_t k = 0; k < out.v.size(); ++k)
      out.v[k] = std::max(out.v[k].real(), std::abs(mj.v[k]));
  }
  return out;
}

std::vector<int> full_s_range(int n) {
  std::vector<int> s;
  for (int k = -ilog2(n); k <= 0; ++k) s.push_back(k);
  return s;
}

namespace {

// Cumulative cell integral of |g|: prefix(i) = (1/n) sum_{k<i} |g_k|,
// extended to all real u by periodicity.
struct CellIntegral {
  int n = 0;
  double total = 0.0;
  std::vector<double> prefix;

  explicit CellIntegral(const std::vector<double>& cells) {
    n = static_cast<int>(cells.size());
    prefix.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + cells[i] / n;
    total = prefix[n];
  }

  double at(double u) const {
    const double q = std::floor(u);
    const double r = u - q;  // in [0,1)
    const double s = r * n;
    int c = static_cast<int>(s);
    if (c >= n) c = n - 1;
    const double frac = prefix[c] + (s - c) * (prefix[c + 1] - prefix[c]);
    return q * total + frac;
  }
};

std::vector<double> maximal_1d(const std::vector<double>& cells, double sigma,
                               const std::vector<int>& s_set) {
  const int n = static_cast<int>(cells.size());
  const CellIntegral F(cells);
  std::vector<double> out(n, 0.0);
  for (int s : s_set) {
    const double w = std::ldexp(1.0, s);
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double a = x + sigma * w;
      const double avg = (F.at(a + w) - F.at(a)) / w;
      out[i] = std::max(out[i], avg);
    }
  }
  return out;
}

}  // namespace

GridFunction1D shifted_maximal(const GridFunction1D& g, double sigma,
                               const std::vector<int>& s_set) {
  require(!s_set.empty(), "shifted_maximal: empty scale set");
  std::vector<double> cells(g.n);
  for (int i = 0; i < g.n; ++i) cells[i] = std::abs(g.v[i]);
  GridFunction1D out(g.n);
  const std::vector<double> vals = maximal_1d(cells, sigma, s_set);
  for (int i = 0; i < g.n; ++i) out.v[i] = vals[i];
  return out;
}

GridFunction2D shifted_maximal_axis(const GridFunction2D& f, double sigma, int axis,
                                    const std::vector<int>& s_set) {
  require(axis == 1 || axis == 2, "shifted_maximal_axis: axis must be 1 or 2");
  require(!s_set.empty(), "shifted_maximal_axis: empty scale set");
  const int n = f.n;
  GridFunction2D out(n);
  std::vector<double> cells(n);
  if (axis == 1) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) cells[i] = std::abs(f.at(i, j));
      const std::vector<double> vals = maximal_1d(cells, sigma, s_set);
      for (int i = 0; i < n; ++i) out.at(i, j) = vals[i];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) cells[j] = std::abs(f.at(i, j));
      const std::vector<double> vals = maximal_1d(cells, sigma, s_set);
      for (int j = 0; j < n; ++j) out.at(i, j) = vals[j];
    }
  }
  return out;
}

GridFunction2D domination_rhs(const GridFunction2D& f1, const GridFunction2D& f2,
                              int kappa, int N, int l_window, int n_window) {
  check_pair(f1, f2, "domination_rhs");
  require(kappa >= 1, "domination_rhs: kappa must be >= 1");
  require(N >= 2, "domination_rhs: decay power N must be >= 2");
  require(n_window >= 1, "domination_rhs: n_window must be >= 1");
  require(l_window >= 1, "domination_rhs: l_window must be >= 1");
  const int n = f1.n;
  const std::vector<int> s_set = full_s_range(n);
  const int lmax = std::min(l_window, 1 << (kappa + 1));
  const double wkappa = std::ldexp(1.0, -kappa);

  // First-axis averages depend only on l.
  std::vector<GridFunction2D> m1;
  m1.reserve(2 * lmax + 1);
  for (int l = -lmax; l <= lmax; ++l)
    m1.push_back(shifted_maximal_axis(f1, l, 1, s_set));

  GridFunction2D out(n);
  for (int nn = -n_window; nn <= n_window; ++nn) {
    const double decay = std::pow(1.0 + std::abs(nn), -static_cast<double>(N));
    for (int l = -lmax; l <= lmax; ++l) {
      const double sigma =
          0.125 * nn + static_cast<double>(l) * l * std::ldexp(1.0, -kappa - 3);
      const GridFunction2D m2 = shifted_maximal_axis(f2, sigma, 2, s_set);
      const GridFunction2D& a = m1[l + lmax];
      const double coeff = decay * wkappa;
      for (size_t k = 0; k < out.v.size(); ++k)
        out.v[k] += coeff * a.v[k].real() * m2.v[k].real();
    }
  }
  return out;
}

double domination_coefficient_sum(int kappa, int N, int l_window, int n_window,
                                  int a, int b) {
  require(kappa >= 1, "domination_coefficient_sum: kappa must be >= 1");
  require(l_window >= 1, "domination_coefficient_sum: l_window must be >= 1");
  const int lmax = std::min(l_window, 1 << (kappa + 1));
  double acc = 0.0;
  for (int nn = -n_window; nn <= n_window; ++nn) {
    const double decay = std::pow(1.0 + std::abs(nn), -static_cast<double>(N));
    for (int l = -lmax; l <= lmax; ++l) {
      const double sigma =
          0.125 * nn + static_cast<double>(l) * l * std::ldexp(1.0, -kappa - 3);
      acc += decay * std::ldexp(1.0, -kappa) *
             std::pow(std::log(2.0 + std::abs(static_cast<double>(l))), a) *
             std::pow(std::log(2.0 + std::abs(sigma)), b);
    }
  }
  return acc;
}

SymbolSpec builtin_symbol(const std::string& name, int alpha, int beta) {
  require(alpha >= 1 && beta >= 1, "builtin_symbol: exponents must be >= 1");
  SymbolSpec spec;
  spec.alpha = alpha;
  spec.beta = beta;
  if (name == "identity") {
    spec.eval = [](double, double) { return cd(1.0, 0.0); };
    return spec;
  }
  if (name == "cone") {
    const double a = alpha, b = beta;
    auto cone = std::make_shared<ConeProfile>(cone_profile(a, 32));
    auto psi = std::make_shared<SampledWindow>(annulus_psi());
    auto hh = std::make_shared<SampledWindow>(gauss_h());
    spec.eval = [cone, psi, hh, a, b](double xi, double eta) -> cd {
      if (eta == 0.0) return cd(0.0, 0.0);
      // psi restricts to t^b |eta| in [1/2, 2]; integrate in u = log2 t.
      const double aeta = std::abs(eta);
      const double u_lo = std::log2(0.5 / aeta) / b;
      const double u_hi = std::log2(2.0 / aeta) / b;
      const int cells = 64;
      const double h = (u_hi - u_lo) / cells;
      auto f = [&](double u) {
        const double t = std::exp2(u);
        const double w = std::pow(t, b) * eta;  // psi and h^2 are even
        const double hv = (*hh)(w);
        return cone->profile(std::pow(t, a) * xi) * (*psi)(w) * hv * hv;
      };
      double acc = 0.0;
      for (int kk = 0; kk < cells; ++kk) {
        const double lo = u_lo + kk * h;
        acc += h / 6.0 * (f(lo) + 4.0 * f(lo + 0.5 * h) + f(lo + h));
      }
      return cd(acc * std::log(2.0), 0.0);  // dt/t = ln 2 du
    };
    return spec;
  }
  if (name == "aniso-riesz") {
    const double px = 2.0 * beta, py = 2.0 * alpha;
    spec.eval = [px, py](double xi, double eta) -> cd {
      const double num = std::pow(std::abs(xi), px);
      const double den = num + std::pow(std::abs(eta), py);
      if (den == 0.0) return cd(0.0, 0.0);
      return cd(num / den, 0.0);
    };
    return spec;
  }
  require(false, "builtin_symbol: unknown name '" + name + "'");
  return spec;  // unreachable
}

double symbol_derivative_sup(const SymbolSpec& spec, int k, int l) {
  require(static_cast<bool>(spec.eval), "symbol_derivative_sup: symbol has no eval");
  require(k >= 0 && l >= 0 && k <= 2 && l <= 2,
          "symbol_derivative_sup: central stencils cover orders 0..2");
  // {offset, weight} pairs; divide by h^order afterwards.
  auto stencil = [](int ord) -> std::vector<std::pair<double, double>> {
    switch (ord) {
      case 0: return {{0.0, 1.0}};
      case 1: return {{1.0, 0.5}, {-1.0, -0.5}};
      default: return {{1.0, 1.0}, {0.0, -2.0}, {-1.0, 1.0}};
    }
  };
  const auto sx = stencil(k);
  const auto sy = stencil(l);
  const double eps = 1e-2;
  std::vector<double> sample{0.0};
  for (int e = -4; e <= 8; ++e) {
    sample.push_back(std::ldexp(1.0, e));
    sample.push_back(-std::ldexp(1.0, e));
  }
  double sup = 0.0;
  for (double xi : sample) {
    for (double eta : sample) {
      const double rho = std::pow(std::abs(xi), 1.0 / spec.alpha) +
                         std::pow(std::abs(eta), 1.0 / spec.beta);
      if (rho == 0.0) continue;  // normalization degenerates at the origin
      // Steps follow the anisotropic dilation so the normalized quantity is
      // dilation-invariant for homogeneous symbols.
      const double hx = eps * std::pow(rho, spec.alpha);
      const double hy = eps * std::pow(rho, spec.beta);
      cd acc(0.0, 0.0);
      for (const auto& [ox, wx] : sx)
        for (const auto& [oy, wy] : sy)
          acc += wx * wy * spec.eval(xi + ox * hx, eta + oy * hy);
      const double d = std::abs(acc) / (std::pow(hx, k) * std::pow(hy, l));
      sup = std::max(sup, d * std::pow(rho, spec.alpha * k + spec.beta * l));
    }
  }
  return sup;
}

GridFunction2D aniso_apply(const SymbolSpec& spec, const GridFunction2D& f1,
                           const GridFunction2D& f2, Exec exec) {
  check_pair(f1, f2, "aniso_apply");
  require(static_cast<bool>(spec.eval), "aniso_apply: symbol has no eval");
  const int n = f1.n;
  std::vector<cd> w(static_cast<size_t>(n) * n);
  for (int b2 = 0; b2 < n; ++b2) {
    const double eta = bin_to_freq(b2, n);
    for (int b1 = 0; b1 < n; ++b1) {
      const double xi = bin_to_freq(b1, n);
      const cd m = spec.eval(-xi, -eta);
      require(std::isfinite(m.real()) && std::isfinite(m.imag()),
              "aniso_apply: symbol not finite on the frequency lattice");
      w[static_cast<size_t>(b2) * n + b1] = m;
    }
  }
  const AxisSpectrum sp1 = axis_spectrum(f1, 1);
  const AxisSpectrum sp2 = axis_spectrum(f2, 2);
  return spectral_bilinear(w, sp1, sp2, n, exec);
}

GridFunction1D bht_curvature(const GridFunction1D& g1, const GridFunction1D& g2,
                             const ShellQuadrature& quad) {
  require(g1.n == g2.n, "bht_curvature: grids must share n");
  require(quad.j_min <= quad.j_max, "bht_curvature: empty scale range");
  check_scale(quad.j_min, "bht_curvature");
  const Spectrum1D s1 = forward(g1);
  const Spectrum1D s2 = forward(g2);
  const int n = g1.n;
  GridFunction1D out(n);
  std::vector<cd> b1(n), b2(n);
  auto shift1d = [n](const Spectrum1D& s, double t, std::vector<cd>& buf) {
    for (int b = 0; b < n; ++b) {
      const double ang = kTwoPi * bin_to_freq(b, n) * t;
      buf[b] = s.c[b] * cd(std::cos(ang), std::sin(ang));
    }
    fft_pow2(buf.data(), n, true);
  };
  for (int j = quad.j_min; j <= quad.j_max; ++j) {
    const ShellNodes nodes = shell_nodes(j, quad.nodes_per_shell);
    const double scale = std::ldexp(1.0, j);
    for (size_t k = 0; k < nodes.t.size(); ++k) {
      const double t = nodes.t[k];
      const double kv = annulus()(scale * t) / t * nodes.w[k];
      if (kv == 0.0) continue;
      shift1d(s1, t, b1);
      shift1d(s2, t * t, b2);
      for (int i = 0; i < n; ++i) out.v[i] += kv * b1[i] * b2[i];
    }
  }
  return out;
}

GridFunction1D sw_maximal(const GridFunction1D& g, const std::vector<double>& n_set,
                          const ShellQuadrature& quad) {
  require(!n_set.empty(), "sw_maximal: empty modulation set");
  require(quad.j_min <= quad.j_max, "sw_maximal: empty scale range");
  check_scale(quad.j_min, "sw_maximal");
  const Spectrum1D s = forward(g);
  const int n = g.n;
  const size_t nmods = n_set.size();
  std::vector<std::vector<cd>> acc(nmods, std::vector<cd>(n, cd(0.0, 0.0)));
  std::vector<cd> buf(n);
  for (int j = quad.j_min; j <= quad.j_max; ++j) {
    const ShellNodes nodes = shell_nodes(j, quad.nodes_per_shell);
    const double scale = std::ldexp(1.0, j);
    for (size_t k = 0; k < nodes.t.size(); ++k) {
      const double t = nodes.t[k];
      const double kv = annulus()(scale * t) / t * nodes.w[k];
      if (kv == 0.0) continue;
      // g(x - t): negative shift.
      for (int b = 0; b < n; ++b) {
        const double ang = -kTwoPi * bin_to_freq(b, n) * t;
        buf[b] = s.c[b] * cd(std::cos(ang), std::sin(ang));
      }
      fft_pow2(buf.data(), n, true);
      for (size_t m = 0; m < nmods; ++m) {
        const double phase = n_set[m] * t * t;  // e^{i N t^2}, N unscaled
        const cd zw = kv * cd(std::cos(phase), std::sin(phase));
        for (int i = 0; i < n; ++i) acc[m][i] += zw * buf[i];
      }
    }
  }
  GridFunction1D out(n);
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (size_t m = 0; m < nmods; ++m) best = std::max(best, std::abs(acc[m][i]));
    out.v[i] = best;
  }
  return out;
}

}  // namespace tht
