#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tht/grid.hpp"
#include "tht/littlewood_paley.hpp"

namespace tht {

// Dyadic-shell quadrature for the t-integrals. Every shell j covers
// |t| in 2^-j [1/2, 2] with nodes_per_shell midpoint nodes per sign,
// mirrored exactly so odd kernels cancel structurally. j >= 3 keeps the
// shell inside the torus half-width (2^{1-j} < 1/2).
struct ShellQuadrature {
  int nodes_per_shell = 32;
  int j_min = 3;
  int j_max = 5;
};

// Midpoint nodes and weights of shell j, both signs.
struct ShellNodes {
  std::vector<double> t;
  std::vector<double> w;
};
ShellNodes shell_nodes(int j, int nodes_per_shell);

// Single-scale bilinear piece
//   T_j(f1, f2)(x, y) = int f1(x + t, y) f2(x, y + t^2) psi(2^j t) t^-1 dt.
GridFunction2D single_scale(const GridFunction2D& f1, const GridFunction2D& f2,
                            int j, int nodes_per_shell, Exec exec = Exec::par);

// Truncated model operator: sum of T_j over quad's scale range.
GridFunction2D truncated_t(const GridFunction2D& f1, const GridFunction2D& f2,
                           const ShellQuadrature& quad, Exec exec = Exec::par);

// Paired frequency piece with the anisotropic index law
//   T^(k)(f1, f2) = sum_j T_j(Delta^(1)_{j+k1} f1, Delta^(2)_{2j+k2} f2).
// empty_sum reports that no scale j in the quad range produced a band
// inside the grid's frequency window.
struct PairedResult {
  GridFunction2D out;
  bool empty_sum = false;
};
PairedResult paired_component(const GridFunction2D& f1, const GridFunction2D& f2,
                              int k1, int k2, const ShellQuadrature& quad,
                              Exec exec = Exec::par);

// Class aggregate T^omega = sum over k in the class with |k|_inf <= k_window.
GridFunction2D frequency_component(const GridFunction2D& f1, const GridFunction2D& f2,
                                   FreqClass omega, int k_window,
                                   const ShellQuadrature& quad, Exec exec = Exec::par);

// Compactly supported cutoff zeta(x, y, t) = spatial(x, y) temporal(t) with
// temporal support [t_lo, t_hi] inside (0, 1/2] so t^2 stays within one
// period.
struct CutoffSpec {
  std::function<double(double, double)> spatial;
  std::function<double(double)> temporal;
  double t_lo = 0.1;
  double t_hi = 0.5;
};

// Default cutoff: tensor unit-partition bump scaled to the centered
// sub-square [1/8, 7/8]^2 times the normalized one-sided bump mapped onto
// [1/10, 1/2] in t.
CutoffSpec default_cutoff();

// Localized operator before pairing:
//   local_t(f1, f2)(x, y) = spatial(x, y) *
//       int f1(x + t, y) f2(x, y + t^2) temporal(t) dt,
// by direct midpoint quadrature with t_nodes nodes.
GridFunction2D local_t(const GridFunction2D& f1, const GridFunction2D& f2,
                       const CutoffSpec& cut, int t_nodes, Exec exec = Exec::par);

// Oscillatory phase table W(xi, eta) = int temporal(t) e^{2 pi i (xi t + eta t^2)} dt
// (composite Simpson with t_cells cells). Amortizes the t-integral across
// local_t evaluations: the spectral route below is exact in t up to the
// table's quadrature error and costs O(n^3 log n) per call.
struct PhaseTable {
  int n = 0;
  std::vector<cd> w;  // index b2*n + b1 -> W(freq(b1), freq(b2))
};
PhaseTable build_phase_table(const CutoffSpec& cut, int n, int t_cells);

GridFunction2D local_t_spectral(const GridFunction2D& f1, const GridFunction2D& f2,
                                const CutoffSpec& cut, const PhaseTable& table,
                                Exec exec = Exec::par);

// Trilinear localized form: (1/n^2) sum local_t(f1, f2) . f3.
cd local_form(const GridFunction2D& f1, const GridFunction2D& f2,
              const GridFunction2D& f3, const CutoffSpec& cut, int t_nodes,
              Exec exec = Exec::par);

// Positive maximal analogue: sup over shells of
//   M_j(|f1|, |f2|)(x, y) = int |f1|(x + t, y) |f2|(x, y + t^2) psi(2^j t) 2^j dt.
GridFunction2D maximal_op(const GridFunction2D& f1, const GridFunction2D& f2,
                          const ShellQuadrature& quad, Exec exec = Exec::par);

// Shifted dyadic maximal average along one axis:
//   M_sigma g(x) = sup_{s in s_set} 2^-s int_{[sigma 2^s, (sigma+1) 2^s]} |g(x+t)| dt
// computed against the piecewise-constant cell extension of g (exact cell
// integrals, periodic wrap). sigma may be any real number.
GridFunction1D shifted_maximal(const GridFunction1D& g, double sigma,
                               const std::vector<int>& s_set);
GridFunction2D shifted_maximal_axis(const GridFunction2D& f, double sigma, int axis,
                                    const std::vector<int>& s_set);

// All window scales resolvable on an n-cell grid: s = -log2(n) .. 0.
std::vector<int> full_s_range(int n);

// Right-hand side of the single-scale domination bound:
//   sum_n (1+|n|)^-N 2^-kappa sum_{|l| <= l_window}
//       M^(1)_l |f1| . M^(2)_{sigma(l,n)} |f2|,
// with sigma(l,n) = 2^-3 n + l^2 2^{-kappa-3} from the stopping-interval
// computation (both signs of l symmetric). n runs over [-n_window, n_window];
// the full l range of the bound is l_window = 2^{kappa+1}.
GridFunction2D domination_rhs(const GridFunction2D& f1, const GridFunction2D& f2,
                              int kappa, int N, int l_window, int n_window);

// Weighted coefficient mass sum_{n,l} (1+|n|)^-N 2^-kappa
//   log(2+|l|)^a log(2+|sigma(l,n)|)^b; grows like kappa^{a+b}.
double domination_coefficient_sum(int kappa, int N, int l_window, int n_window,
                                  int a, int b);

// A bilinear Fourier symbol m(xi, eta) together with the anisotropy (alpha,
// beta) it is adapted to. eval must be finite on the integer lattice.
struct SymbolSpec {
  int alpha = 1;
  int beta = 2;
  std::function<cd(double, double)> eval;
  int derivative_budget = 2;  // orders k+l for which bounds are claimed
};

// Named symbols:
//   "identity"    m == 1, so the transform reduces to the product f1*f2.
//   "cone"        int phi_a(t^alpha xi) psi(t^beta eta) h(t^beta eta)^2 dt/t
//                 with phi_a the cone profile; supported where the t-band
//                 {t^beta |eta| in [1/2,2]} is nonempty, vanishes on eta = 0.
//   "aniso-riesz" xi^{2 beta} / (xi^{2 beta} + eta^{2 alpha}), zero at the
//                 origin; homogeneous of degree 0 under the anisotropic
//                 dilation (xi, eta) -> (s^alpha xi, s^beta eta).
SymbolSpec builtin_symbol(const std::string& name, int alpha = 1, int beta = 2);

// sup over a log-spaced frequency sample of
//   |d^k_xi d^l_eta m| * rho(xi,eta)^{alpha k + beta l},
// rho = |xi|^{1/alpha} + |eta|^{1/beta}; central differences with steps
// scaled anisotropically (h_xi ~ rho^alpha, h_eta ~ rho^beta). Finite for
// symbols smooth away from the origin with Marcinkiewicz-type decay.
double symbol_derivative_sup(const SymbolSpec& spec, int k, int l);

// Bilinear multiplier: out(x,y) = sum_{xi,eta} m(-xi,-eta) a(xi,y) b(x,eta)
//   e^{2 pi i (xi x + eta y)} / normalization,
// where a = axis-1 spectrum of f1, b = axis-2 spectrum of f2. With m == 1
// this is exactly the pointwise product f1 f2.
GridFunction2D aniso_apply(const SymbolSpec& spec, const GridFunction2D& f1,
                           const GridFunction2D& f2, Exec exec = Exec::par);

// 1D curved bilinear transform sum_j int g1(x+t) g2(x+t^2) psi(2^j t) t^-1 dt.
GridFunction1D bht_curvature(const GridFunction1D& g1, const GridFunction1D& g2,
                             const ShellQuadrature& quad);

// Polynomial-modulation maximal transform
//   sup_{N in n_set} | int g(x - t) e^{i N t^2} sum_j psi(2^j t) t^-1 dt |.
GridFunction1D sw_maximal(const GridFunction1D& g, const std::vector<double>& n_set,
                          const ShellQuadrature& quad);

}  // namespace tht
