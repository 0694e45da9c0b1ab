#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tht/grid.hpp"
#include "tht/rng.hpp"
#include "tht/singular_ops.hpp"

namespace tht {

// Anisotropy exponents. A rectangle at scale k has extent 2^{alpha k} along
// axis 1 and 2^{beta k} along axis 2, so the two axes refine at different
// rates under k -> k-1.
struct DyadicGeometry {
  int alpha = 1;
  int beta = 2;
};

// Dyadic rectangle [i1, i1+1) 2^{alpha k} x [i2, i2+1) 2^{beta k} with scale
// length 2^k. Scales k <= 0 tile the unit torus.
struct DyadicRectangle {
  int k = 0;
  long long i1 = 0;
  long long i2 = 0;

  friend bool operator==(const DyadicRectangle& a, const DyadicRectangle& b) {
    return a.k == b.k && a.i1 == b.i1 && a.i2 == b.i2;
  }
  friend bool operator<(const DyadicRectangle& a, const DyadicRectangle& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.i1 != b.i1) return a.i1 < b.i1;
    return a.i2 < b.i2;
  }
};

double rect_width(const DyadicGeometry& geo, const DyadicRectangle& q, int axis);
std::array<double, 2> rect_center(const DyadicGeometry& geo, const DyadicRectangle& q);
double rect_area(const DyadicGeometry& geo, const DyadicRectangle& q);
// Closed-under-nesting containment: inner lies inside outer (equality counts).
bool rect_contains(const DyadicGeometry& geo, const DyadicRectangle& outer,
                   const DyadicRectangle& inner);
DyadicRectangle rect_parent(const DyadicGeometry& geo, const DyadicRectangle& q);
// The 2^{alpha+beta} scale-(k-1) rectangles partitioning q, in row-major order.
std::vector<DyadicRectangle> rect_children(const DyadicGeometry& geo,
                                           const DyadicRectangle& q);

// Finite rectangle collection with a root containing every member, closed
// under taking ancestors up to the root (equivalent to convexity, since the
// dyadic rectangles containing a given one form its ancestor chain). The
// constructor validates both properties and throws on violation.
class Tree {
 public:
  Tree(const DyadicGeometry& geo, const DyadicRectangle& root,
       std::vector<DyadicRectangle> members);

  const DyadicGeometry& geometry() const { return geo_; }
  const DyadicRectangle& root() const { return root_; }
  const std::vector<DyadicRectangle>& rects() const { return rects_; }
  bool contains(const DyadicRectangle& q) const;

 private:
  DyadicGeometry geo_;
  DyadicRectangle root_;
  std::vector<DyadicRectangle> rects_;  // sorted canonically
};

// Children of members that are not members themselves; they partition the
// root exactly (checked by the area identity in tests).
std::vector<DyadicRectangle> tree_leaves(const Tree& t);

// Grow a convex tree from the root by repeatedly adding a uniformly chosen
// missing child of a current member, staying above scale root.k - max_depth.
// Adding children preserves ancestor-closure, so the result needs no repair.
Tree random_convex_tree(const DyadicGeometry& geo, const DyadicRectangle& root,
                        int max_rects, int max_depth, Rng& rng);

// Modulation pair with its polynomial loss factor (1+|u|+|v|)^100.
struct ConeModulation {
  double u = 0.0;
  double v = 0.0;
  double c_bound = 1.0;
};
ConeModulation cone_modulation(double u, double v);

// ---- decay-envelope averages ----------------------------------------------
//
// theta(x) = (1+|x|)^{-10} has an explicit antiderivative, so the mollified
// averages below integrate theta exactly against the piecewise-constant grid
// function (cell masses, periodized). The kink at the kernel peak would
// otherwise dominate the quadrature error.

// |f|^2 * (theta_{s1} x theta_{s2}) evaluated at (p, q).
double theta_average(const GridFunction2D& f, double p, double q, double s1,
                     double s2);

// Four-function envelope integral at (p, q):
//   int f1(x',y) f2(x,y') f3(x,y) f4(x',y')
//       theta_{s1,p}(x) theta_{s1,p}(x') theta_{s2,q}(y) theta_{s2,q}(y').
// For non-negative inputs it is bounded by prod_j theta_average(f_j)^{1/2}
// with the same cell masses (Cauchy-Schwarz on the discrete sum).
cd theta_quadruple(const GridFunction2D& f1, const GridFunction2D& f2,
                   const GridFunction2D& f3, const GridFunction2D& f4, double p,
                   double q, double s1, double s2);

// sup over Q of the envelope-mollified quadratic average at the center of Q,
// with axis scales ell(Q)^alpha and ell(Q)^beta.
double local_max(const GridFunction2D& f, const DyadicGeometry& geo,
                 const std::vector<DyadicRectangle>& q);

// ---- localized four-function forms -----------------------------------------

// Periodized 1D kernel amp * s^{-1} profile(s^{-1}(x - c + m)), m over integer
// wraps within the profile cutoff. If an antiderivative is attached, cell
// sampling uses exact per-cell averages instead of midpoint values.
struct Kernel1D {
  std::function<double(double)> profile;
  std::function<double(double)> antiderivative;  // optional, of the profile
  double cutoff = 0.0;                           // profile vanishes beyond |z| > cutoff
  double scale = 1.0;
  double center = 0.0;
  double amp = 1.0;

  double eval(double x) const;
};

Kernel1D kernel_gauss(double scale, double center);
Kernel1D kernel_dgauss(double scale, double center);  // derivative of gauss
Kernel1D kernel_theta(double scale, double center);   // exact-cell sampling
// Spatial kernel whose spectrum is the cone plateau profile for the given
// exponent (tabulated inverse cosine transform, cached per alpha).
Kernel1D kernel_plateau_space(int alpha, double scale, double center);
// Spatial kernel whose spectrum is psi(w) times the Gaussian-derivative
// spectrum; odd, tabulated once (exponent-independent).
Kernel1D kernel_band_space(double scale, double center);

// Cell values k(i/n), i = 0..n-1 (periodized; cell averages for kernels
// carrying an antiderivative).
std::vector<double> kernel_cells(const Kernel1D& k, int n);

enum class FormKind { lambda_uv, theta1, theta2, xi, bark };

struct FormParams {
  double u = 0.0;
  double v = 0.0;
  double lambda = 1.0;
  double r = 0.0;
  // Scale weight |c(t)| <= 1 for the lambda_uv form; identically 1 if unset.
  std::function<double(double)> c_profile;
};

// Midpoint node counts: pq_nodes per rectangle side for the (p, q) integrals,
// t_nodes per scale slab [ell/2, ell]. Midpoint (order 2) on purpose, so
// refinement studies see a clean error decrease instead of a rounding floor.
// Defaults sized so depth-3 anisotropic trees at n = 16 keep the telescoping
// residual near 3e-4 relative: the (p, q) sum dominates the error and needs
// ~128 nodes per side; t contributes ~7e-4 at 32 nodes and is quiet at 64.
struct FormQuad {
  int pq_nodes = 128;
  int t_nodes = 64;

  FormQuad refined(int factor) const { return {pq_nodes * factor, t_nodes * factor}; }
};

// Four-function forms over the scale slabs Q x [ell(Q)/2, ell(Q)] of a tree
// (theta1, theta2, bark) or over a plain collection (xi: no t-integral;
// lambda_uv: slabs of every member). All use the factorized summation: the
// y and y' sums are contracted first (O(n^3) per node), then the x, x' sum.
cd quad_form(FormKind kind, const Tree& tree, const GridFunction2D& f1,
             const GridFunction2D& f2, const GridFunction2D& f3,
             const GridFunction2D& f4, const FormParams& params,
             const FormQuad& quad, Exec exec = Exec::par);
cd quad_form(FormKind kind, const DyadicGeometry& geo,
             const std::vector<DyadicRectangle>& rects, const GridFunction2D& f1,
             const GridFunction2D& f2, const GridFunction2D& f3,
             const GridFunction2D& f4, const FormParams& params,
             const FormQuad& quad, Exec exec = Exec::par);

// Same forms evaluated by the direct O(n^4)-per-node sum; agreement with
// quad_form is exercised for n <= 8.
cd quad_form_reference(FormKind kind, const Tree& tree, const GridFunction2D& f1,
                       const GridFunction2D& f2, const GridFunction2D& f3,
                       const GridFunction2D& f4, const FormParams& params,
                       const FormQuad& quad);
cd quad_form_reference(FormKind kind, const DyadicGeometry& geo,
                       const std::vector<DyadicRectangle>& rects,
                       const GridFunction2D& f1, const GridFunction2D& f2,
                       const GridFunction2D& f3, const GridFunction2D& f4,
                       const FormParams& params, const FormQuad& quad);

// Residual of the scale-telescoping identity
//   alpha Theta1 + beta Theta2 = Xi_leaves - Xi_root + B
// over a convex tree, all five terms sharing one quadrature. B sums the
// per-rectangle boundary form. residual is the absolute defect; scale is the
// largest term magnitude, for relative scaling. The defect comes only from
// the (p, q, t) quadrature, never from the grid resolution, because the
// identity holds pointwise in the four sample coordinates.
struct TelescopeResult {
  double residual = 0.0;
  double scale = 0.0;
};
TelescopeResult telescoping_residual(const Tree& tree, const GridFunction2D& f1,
                                     const GridFunction2D& f2,
                                     const GridFunction2D& f3,
                                     const GridFunction2D& f4, double lambda,
                                     double r, const FormQuad& quad,
                                     Exec exec = Exec::par);

// ---- tree selection and fiber decomposition --------------------------------

// One selected tree together with its dyadic level triple n = (n1, n2, n3),
// where 2^{n_j - 1} < sup_{q0 ∋ Q' ⊇ Q} M_{Q'}(f_j) <= 2^{n_j} for every
// member Q.
struct SelectedTree {
  Tree tree;
  std::array<int, 3> levels;
};

// Partition q0 by the level triples of the running envelope maxima, then
// split each class into trees rooted at its maximal rectangles. Every member
// of q0 lands in exactly one returned tree; trees within one class are
// disjoint. Rejects identically-zero inputs (their levels are -infinity) and
// throws if a class fails convexity (possible when q0 has scale gaps).
std::vector<SelectedTree> tree_select(const DyadicGeometry& geo,
                                      const std::vector<DyadicRectangle>& q0,
                                      const GridFunction2D& f1,
                                      const GridFunction2D& f2,
                                      const GridFunction2D& f3);

// Half-open run of cells [begin, begin + len) within a row.
struct CellInterval {
  int begin = 0;
  int len = 0;
};

// Row-by-row stopping-time split f = g + b at the given level. Per row, the
// maximal dyadic cell intervals whose L^p average exceeds the level are
// selected top-down; g equals f off them and the constant L^p average on
// them, b = f - g. Off the intervals |f| <= level holds exactly on the grid
// (single cells are themselves dyadic). A selected interval with a parent
// obeys avg <= 2^{1/p} level; the whole row, having no parent, may not.
struct FiberDecomposition {
  GridFunction2D g;
  GridFunction2D b;
  std::vector<std::vector<CellInterval>> rows;  // indexed by y
};
FiberDecomposition fiber_cz(const GridFunction2D& f, double level, double p);

// ---- scale-integrated model operator ---------------------------------------

struct ModelParams {
  double u = 0.0;
  double v = 0.0;
  std::function<double(double)> c_profile;  // |c(t)| <= 1; 1 if unset
  int t_cells = 128;                        // Simpson cells in log2 t
};

// T(f1, f2) = int c(t) (f1 *_1 A_t)(f2 *_2 B_t) dt/t where A_t has spectrum
// gauss * plateau (modulated by u) at scale t^alpha and B_t has the squared
// Gaussian-derivative spectrum cut to the band psi (modulated by v) at scale
// t^beta. The t-range covers every band the lattice can see.
GridFunction2D model_apply(const GridFunction2D& f1, const GridFunction2D& f2,
                           const ModelParams& params, const DyadicGeometry& geo,
                           Exec exec = Exec::par);

// The exact bilinear symbol of model_apply, integrated per frequency pair
// over the within-band t-interval. aniso_apply of this spec reproduces
// model_apply up to the difference of the two t-quadratures.
SymbolSpec model_symbol(const ModelParams& params, const DyadicGeometry& geo);

// ---- serialization ----------------------------------------------------------

// {"alpha": a, "beta": b, "rects": [{"k": k, "i1": i1, "i2": i2}, ...]};
// the root is recovered as the unique member containing all others.
std::string tree_to_json(const Tree& t);
Tree tree_from_json(const std::string& text);

// {"kind", "params": {u, v, lambda, r}, "value_re", "value_im",
//  "quad": {pq_nodes, t_nodes}}
std::string form_report_json(const std::string& kind, const FormParams& params,
                             cd value, const FormQuad& quad);

}  // namespace tht
