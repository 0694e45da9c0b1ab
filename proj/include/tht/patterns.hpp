#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tht/grid.hpp"
#include "tht/rng.hpp"

namespace tht {

// Cell indicator set on the unit square: cells[j*n + i] covers
// [i/n, (i+1)/n) x [j/n, (j+1)/n). density() = (#true)/n^2.
struct BitmapSet {
  int n = 0;
  std::vector<std::uint8_t> cells;

  BitmapSet() = default;
  explicit BitmapSet(int n_);

  bool at(int i, int j) const {
    return cells[static_cast<size_t>(j) * n + i] != 0;
  }
  void set(int i, int j, bool val) {
    cells[static_cast<size_t>(j) * n + i] = val ? 1 : 0;
  }
  double density() const;
};

BitmapSet random_bitmap(int n, double density, Rng& rng);

// 0/1-valued grid function of the set (real parts carry the indicator).
GridFunction2D bitmap_to_grid(const BitmapSet& e);

// Text form: first line n, then n lines of n '0'/'1' characters, row j on
// line j+1. JSON form: {"n": n, "rows": [...]} with the same row strings.
// Both parsers reject malformed sizes or characters by name.
std::string bitmap_to_text(const BitmapSet& e);
BitmapSet bitmap_from_text(const std::string& text);
std::string bitmap_to_json(const BitmapSet& e);
BitmapSet bitmap_from_json(const std::string& text);

// Martingale average along one axis: per fiber, values are replaced by the
// mean of their dyadic block of width 2^-k cells. Means are computed by
// halving recursion (mean of two half-means), so applying the operator to
// its own output reproduces identical doubles and block sums recombine to
// the full-grid sum bit for bit. Requires 2^k <= n.
GridFunction2D martingale_avg(const GridFunction2D& f, int axis, int k);

// Cell mean (1/n^2) sum f via the same halving recursion; companion to
// martingale_avg so that mass-conservation comparisons are exact.
cd cell_mean(const GridFunction2D& f);

// Quadrature over t in [0,1] (t_nodes uniform left endpoints, t_nodes >= n)
// of the cell mean of f(x,y) f(x+t,y) f(x,y+t^2), with periodic wrap and
// cell-lookup evaluation (a shifted point reads the cell containing it).
// Real parts only; values outside [0,1] are accepted but make the result
// uninterpretable as a pattern count. t_nodes = 2n hits every representable
// shift plus the midpoints between them.
double count_integral(const GridFunction2D& f, int t_nodes);

// Discrete form of the trilinear lower bound: lhs is the cell mean of
// f * (E_k f along axis 1) * (E_l f along axis 2), rhs = (cell mean of f)^4,
// ok = (lhs >= rhs - 1e-12). Requires 0 <= f <= 1 (real valued) and
// 2^k, 2^l <= n; the inequality is exact at the discrete level, so ok is
// expected to hold for every admissible input.
struct LowerBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};
LowerBoundResult lower_bound_check(const GridFunction2D& f, int k, int l);

// Corner coordinates of a found pattern: cells of (x, y), (x + t, y),
// (x, y + t^2) are all set. x, y, t are exact cell multiples of 1/n.
struct PatternTriple {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

// Scan cell-representable t = m/n >= t_min in decreasing order (per t: rows
// then columns) and return the first triple whose three cells are set, or
// nullopt. The returned triple is re-verified against the bitmap through
// real-coordinate cell lookup, the same convention count_integral uses.
// Requires t_min >= 1/n.
std::optional<PatternTriple> pattern_search(const BitmapSet& e, double t_min);

// Continuous transform of the averaging profile at real argument u,
// integral vartheta(x) cos(2 pi u x) dx over [-2,2], by composite Simpson
// with node count scaled to the oscillation. Even in u; value at 0 is the
// profile's total mass (1 up to quadrature error).
double vartheta_hat(double u);

// Both threshold shapes share the constant c and the density scale eps:
// count is compared against 2^-(k_{l+1}+10) * c * eps^4 and the increment
// against c * eps^4.
struct DichotomyThresholds {
  double eps = 0.1;
  double c = 1.0;
};

enum class DichotomyBranch { count_large, increment_large, neither };
const char* branch_name(DichotomyBranch b);

struct DichotomyRecord {
  int l = 0;
  int k_l = 0;
  double count_I = 0.0;
  double increment = 0.0;
  DichotomyBranch branch = DichotomyBranch::neither;
};

struct DichotomyResult {
  std::vector<DichotomyRecord> records;
  bool truncated = false;  // scale ladder left the grid before max_iter levels
};

// Scale ladder k_{l+1} = m_factor * k_l from k0. Per level: count_I is the
// unweighted count_integral proxy (computed once; the level dependence sits
// in its shrinking threshold), increment is
// ||f *_2 theta_{k_{l+1}} - f *_2 theta_{k_l}||_2 +
// ||f *_1 theta_{k_{l+1}} - f *_1 theta_{k_l}||_2 with the averaging-profile
// mollifier applied as the axis multiplier vartheta_hat(2^-k zeta). Branch:
// count_large wins over increment_large; otherwise neither. The run stops
// with truncated = true once 2^{k_{l+1}} > n.
DichotomyResult dichotomy_run(const GridFunction2D& f, int k0, int m_factor,
                              int max_iter, const DichotomyThresholds& th);

// Constant C for the energy budget sum_l increment_l^2 <= C * ||f||_2^2 over
// the same scale ladder: 4 * sup_zeta sum_l |vartheta_hat(2^-k_{l+1} zeta) -
// vartheta_hat(2^-k_l zeta)|^2 over the n representable frequencies. The 4
// covers the two axes and the cross term in (a + b)^2 <= 2a^2 + 2b^2; the
// sup alone bounds each axis sum by Parseval.
double dichotomy_energy_constant(int n, int k0, int m_factor, int max_iter);

// CSV rows "l,k_l,count,increment,branch".
std::string dichotomy_to_csv(const DichotomyResult& run);

}  // namespace tht
