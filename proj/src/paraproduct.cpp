#include "tht/paraproduct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "tht/fft.hpp"
#include "tht/windows.hpp"
#include "json.hpp"

namespace tht {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// Arithmetic shift with the count clamped below the width of long long, so
// deep scale gaps degrade to sign-fill instead of undefined behavior.
long long shr(long long x, int s) { return x >> std::min(s, 62); }

void check_geo(const DyadicGeometry& geo, const char* who) {
  require(geo.alpha >= 1 && geo.beta >= 1,
          std::string(who) + ": exponents must be >= 1");
  require(geo.alpha + geo.beta <= 24, std::string(who) + ": exponents too large");
}

void check_same_n(const GridFunction2D& a, const GridFunction2D& b, const char* who) {
  require(a.n == b.n && a.n > 0, std::string(who) + ": grids must share one n");
}

}  // namespace

// ---- dyadic geometry --------------------------------------------------------

double rect_width(const DyadicGeometry& geo, const DyadicRectangle& q, int axis) {
  require(axis == 1 || axis == 2, "rect_width: axis must be 1 or 2");
  return std::ldexp(1.0, (axis == 1 ? geo.alpha : geo.beta) * q.k);
}

std::array<double, 2> rect_center(const DyadicGeometry& geo, const DyadicRectangle& q) {
  const double w1 = rect_width(geo, q, 1);
  const double w2 = rect_width(geo, q, 2);
  return {(static_cast<double>(q.i1) + 0.5) * w1,
          (static_cast<double>(q.i2) + 0.5) * w2};
}

double rect_area(const DyadicGeometry& geo, const DyadicRectangle& q) {
  return rect_width(geo, q, 1) * rect_width(geo, q, 2);
}

bool rect_contains(const DyadicGeometry& geo, const DyadicRectangle& outer,
                   const DyadicRectangle& inner) {
  if (inner.k > outer.k) return false;
  const int dk = outer.k - inner.k;
  return shr(inner.i1, geo.alpha * dk) == outer.i1 &&
         shr(inner.i2, geo.beta * dk) == outer.i2;
}

DyadicRectangle rect_parent(const DyadicGeometry& geo, const DyadicRectangle& q) {
  return {q.k + 1, shr(q.i1, geo.alpha), shr(q.i2, geo.beta)};
}

std::vector<DyadicRectangle> rect_children(const DyadicGeometry& geo,
                                           const DyadicRectangle& q) {
  const long long m1 = 1LL << geo.alpha;
  const long long m2 = 1LL << geo.beta;
  std::vector<DyadicRectangle> out;
  out.reserve(static_cast<size_t>(m1 * m2));
  for (long long b2 = 0; b2 < m2; ++b2)
    for (long long b1 = 0; b1 < m1; ++b1)
      out.push_back({q.k - 1, q.i1 * m1 + b1, q.i2 * m2 + b2});
  return out;
}

// ---- trees ------------------------------------------------------------------

Tree::Tree(const DyadicGeometry& geo, const DyadicRectangle& root,
           std::vector<DyadicRectangle> members)
    : geo_(geo), root_(root), rects_(std::move(members)) {
  check_geo(geo_, "Tree");
  std::sort(rects_.begin(), rects_.end());
  require(std::adjacent_find(rects_.begin(), rects_.end()) == rects_.end(),
          "Tree: duplicate member");
  require(std::binary_search(rects_.begin(), rects_.end(), root_),
          "Tree: root must be a member");
  for (const DyadicRectangle& q : rects_) {
    if (q == root_) continue;
    require(rect_contains(geo_, root_, q), "Tree: member outside the root");
    require(contains(rect_parent(geo_, q)),
            "Tree: not convex (a member's parent is missing)");
  }
}

bool Tree::contains(const DyadicRectangle& q) const {
  return std::binary_search(rects_.begin(), rects_.end(), q);
}

std::vector<DyadicRectangle> tree_leaves(const Tree& t) {
  std::vector<DyadicRectangle> out;
  for (const DyadicRectangle& q : t.rects())
    for (const DyadicRectangle& c : rect_children(t.geometry(), q))
      if (!t.contains(c)) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

Tree random_convex_tree(const DyadicGeometry& geo, const DyadicRectangle& root,
                        int max_rects, int max_depth, Rng& rng) {
  check_geo(geo, "random_convex_tree");
  require(max_rects >= 1, "random_convex_tree: max_rects must be >= 1");
  std::vector<DyadicRectangle> members{root};
  std::vector<DyadicRectangle> candidates;
  auto offer_children = [&](const DyadicRectangle& q) {
    if (q.k - 1 < root.k - max_depth) return;
    for (const DyadicRectangle& c : rect_children(geo, q)) candidates.push_back(c);
  };
  offer_children(root);
  while (static_cast<int>(members.size()) < max_rects && !candidates.empty()) {
    const size_t pick = static_cast<size_t>(rng.below(candidates.size()));
    const DyadicRectangle q = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<ptrdiff_t>(pick));
    members.push_back(q);
    offer_children(q);
  }
  return Tree(geo, root, std::move(members));
}

ConeModulation cone_modulation(double u, double v) {
  ConeModulation m;
  m.u = u;
  m.v = v;
  m.c_bound = std::pow(1.0 + std::abs(u) + std::abs(v), 100.0);
  return m;
}

// ---- 1D kernels -------------------------------------------------------------

namespace {

// exp(-pi x^2) drops below 1e-31 past 12 standard deviations (sigma^2 = 1/(2 pi)).
const double kGaussCut = 12.0 / std::sqrt(kTwoPi);
constexpr double kThetaCut = 12.0;
constexpr double kSpaceCut = 64.0;

double gauss_profile(double z) { return std::exp(-kPi * z * z); }
double dgauss_profile(double z) { return -kTwoPi * z * std::exp(-kPi * z * z); }
double theta_profile(double z) { return std::pow(1.0 + std::abs(z), -10.0); }
// int_0^z (1+|w|)^{-10} dw, odd.
double theta_anti(double z) {
  const double s = z < 0.0 ? -1.0 : 1.0;
  return s * (1.0 - std::pow(1.0 + std::abs(z), -9.0)) / 9.0;
}

// Dense tabulation of a profile on [0, 64] with step 1/64, evaluated by
// Catmull-Rom interpolation; the parity flag mirrors across 0 and anything
// beyond the table is treated as zero (the tabulated transforms of smooth
// compactly supported spectra decay faster than any polynomial).
struct ProfileTable {
  double step = 1.0 / 64.0;
  bool odd = false;
  std::vector<double> v;  // 4097 samples

  double at(int m) const {
    if (m < 0) return odd ? -v[static_cast<size_t>(-m)] : v[static_cast<size_t>(-m)];
    if (m >= static_cast<int>(v.size())) return 0.0;
    return v[static_cast<size_t>(m)];
  }

  double operator()(double z) const {
    const double a = std::abs(z);
    const double u = a / step;
    const int last = static_cast<int>(v.size()) - 1;
    if (u >= static_cast<double>(last)) return 0.0;
    const int i = static_cast<int>(u);
    const double fr = u - i;
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    const double val =
        0.5 * (2.0 * p1 + (-p0 + p2) * fr + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * fr * fr +
               (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * fr * fr * fr);
    return (odd && z < 0.0) ? -val : val;
  }
};

// Cosine/sine transform of a tabulated spectrum profile on [lo, hi]:
//   even: 2 int f(w) cos(2 pi z w) dw,   odd: 2 int f(w) sin(2 pi z w) dw.
// Composite Simpson with 4096 cells; the integrand values are shared across
// all output nodes.
std::shared_ptr<const ProfileTable> transform_table(
    const std::function<double(double)>& f, double lo, double hi, bool odd) {
  constexpr int kCells = 4096;
  constexpr int kOut = 4097;
  const int m = 2 * kCells + 1;
  const double h = (hi - lo) / kCells;
  std::vector<double> w(m), fv(m), sw(m);
  for (int i = 0; i < m; ++i) {
    w[i] = lo + 0.5 * h * i;
    fv[i] = f(w[i]);
    const bool end = (i == 0 || i == m - 1);
    sw[i] = (h / 6.0) * (end ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
  }
  auto table = std::make_shared<ProfileTable>();
  table->odd = odd;
  table->v.assign(kOut, 0.0);
  parallel_for(kOut, Exec::par, [&](int iz) {
    const double z = static_cast<double>(iz) * table->step;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double ang = kTwoPi * z * w[i];
      acc += sw[i] * fv[i] * (odd ? std::sin(ang) : std::cos(ang));
    }
    table->v[static_cast<size_t>(iz)] = 2.0 * acc;
  });
  return table;
}

std::shared_ptr<const ProfileTable> plateau_space_table(int alpha) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const ProfileTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(alpha);
  if (it != cache.end()) return it->second;
  const ConeProfile cone = cone_profile(static_cast<double>(alpha), 64);
  auto fn = cone.profile.eval;
  auto table = transform_table(fn, 0.0, 2.0, false);
  cache.emplace(alpha, table);
  return table;
}

std::shared_ptr<const ProfileTable> band_space_table() {
  static std::mutex mu;
  static std::shared_ptr<const ProfileTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (cache) return cache;
  const SampledWindow h = gauss_h();
  const SampledWindow psi = annulus_psi();
  cache = transform_table([h, psi](double w) { return h(w) * psi(w); }, 0.5, 2.0, true);
  return cache;
}

}  // namespace

double Kernel1D::eval(double x) const {
  const double w = cutoff * scale;
  const double lo = x - center;
  const long long m0 = static_cast<long long>(std::ceil(-lo - w));
  const long long m1 = static_cast<long long>(std::floor(-lo + w));
  double acc = 0.0;
  for (long long m = m0; m <= m1; ++m)
    acc += profile((lo + static_cast<double>(m)) / scale);
  return amp * acc / scale;
}

Kernel1D kernel_gauss(double scale, double center) {
  require(scale > 0.0, "kernel_gauss: scale must be positive");
  Kernel1D k;
  k.profile = gauss_profile;
  k.cutoff = kGaussCut;
  k.scale = scale;
  k.center = center;
  return k;
}

Kernel1D kernel_dgauss(double scale, double center) {
  require(scale > 0.0, "kernel_dgauss: scale must be positive");
  Kernel1D k;
  k.profile = dgauss_profile;
  k.cutoff = kGaussCut;
  k.scale = scale;
  k.center = center;
  return k;
}

Kernel1D kernel_theta(double scale, double center) {
  require(scale > 0.0, "kernel_theta: scale must be positive");
  Kernel1D k;
  k.profile = theta_profile;
  k.antiderivative = theta_anti;
  k.cutoff = kThetaCut;
  k.scale = scale;
  k.center = center;
  return k;
}

Kernel1D kernel_plateau_space(int alpha, double scale, double center) {
  require(alpha >= 1, "kernel_plateau_space: alpha must be >= 1");
  require(scale > 0.0, "kernel_plateau_space: scale must be positive");
  auto table = plateau_space_table(alpha);
  Kernel1D k;
  k.profile = [table](double z) { return (*table)(z); };
  k.cutoff = kSpaceCut;
  k.scale = scale;
  k.center = center;
  return k;
}

Kernel1D kernel_band_space(double scale, double center) {
  require(scale > 0.0, "kernel_band_space: scale must be positive");
  auto table = band_space_table();
  Kernel1D k;
  k.profile = [table](double z) { return (*table)(z); };
  k.cutoff = kSpaceCut;
  k.scale = scale;
  k.center = center;
  return k;
}

std::vector<double> kernel_cells(const Kernel1D& k, int n) {
  require(n >= 1, "kernel_cells: n must be >= 1");
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  if (!k.antiderivative) {
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = k.eval(static_cast<double>(i) / n);
    return out;
  }
  // Exact mass of the truncated kernel over each cell [i/n, (i+1)/n), wrapped:
  // clamping the antiderivative argument at the cutoff integrates precisely
  // the same truncated profile that eval() sees.
  const double w = k.cutoff * k.scale;
  auto prim = [&](double z) {
    return k.antiderivative(std::clamp(z, -k.cutoff, k.cutoff));
  };
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / n;
    const double b = static_cast<double>(i + 1) / n;
    const long long m0 = static_cast<long long>(std::ceil(k.center - w - b));
    const long long m1 = static_cast<long long>(std::floor(k.center + w - a));
    double acc = 0.0;
    for (long long m = m0; m <= m1; ++m) {
      const double dm = static_cast<double>(m);
      acc += prim((b + dm - k.center) / k.scale) - prim((a + dm - k.center) / k.scale);
    }
    out[static_cast<size_t>(i)] = k.amp * n * acc;
  }
  return out;
}

// ---- four-function contraction ----------------------------------------------

namespace {

// Shared summation core for the localized forms. The y and y' sums are folded
// first against the axis-2 kernels:
//   U(x,x') = (1/n) sum_y  f1(x',y)  f3(x,y)  ky(y)
//   V(x,x') = (1/n) sum_y' f2(x,y') f4(x',y') kyp(y')
// after which a form value is (1/n^2) sum_{x,x'} kx(x) kxp(x') U V. In direct
// mode the literal four-fold sum is kept as an independent oracle.
class Contractor {
 public:
  Contractor(const GridFunction2D& f1, const GridFunction2D& f2,
             const GridFunction2D& f3, const GridFunction2D& f4, bool direct)
      : f1_(f1), f2_(f2), f3_(f3), f4_(f4), n_(f1.n), direct_(direct) {
    if (!direct_) {
      U_.assign(static_cast<size_t>(n_) * n_, cd(0.0, 0.0));
      V_.assign(static_cast<size_t>(n_) * n_, cd(0.0, 0.0));
    }
  }

  void set_y(const std::vector<double>& ky, const std::vector<double>& kyp) {
    if (direct_) {
      ky_ = ky;
      kyp_ = kyp;
      return;
    }
    const int n = n_;
    std::fill(U_.begin(), U_.end(), cd(0.0, 0.0));
    std::fill(V_.begin(), V_.end(), cd(0.0, 0.0));
    for (int y = 0; y < n; ++y) {
      const double wy = ky[static_cast<size_t>(y)];
      if (wy == 0.0) continue;
      const cd* r1 = f1_.v.data() + static_cast<size_t>(y) * n;
      const cd* r3 = f3_.v.data() + static_cast<size_t>(y) * n;
      for (int xp = 0; xp < n; ++xp) {
        const cd c1 = r1[xp] * wy;
        cd* urow = U_.data() + static_cast<size_t>(xp) * n;
        for (int x = 0; x < n; ++x) urow[x] += c1 * r3[x];
      }
    }
    for (int yp = 0; yp < n; ++yp) {
      const double wyp = kyp[static_cast<size_t>(yp)];
      if (wyp == 0.0) continue;
      const cd* r2 = f2_.v.data() + static_cast<size_t>(yp) * n;
      const cd* r4 = f4_.v.data() + static_cast<size_t>(yp) * n;
      for (int xp = 0; xp < n; ++xp) {
        const cd c4 = r4[xp] * wyp;
        cd* vrow = V_.data() + static_cast<size_t>(xp) * n;
        for (int x = 0; x < n; ++x) vrow[x] += c4 * r2[x];
      }
    }
    const double inv = 1.0 / n;
    for (cd& z : U_) z *= inv;
    for (cd& z : V_) z *= inv;
  }

  cd eval_x(const std::vector<double>& kx, const std::vector<double>& kxp) const {
    const int n = n_;
    if (direct_) {
      cd acc(0.0, 0.0);
      for (int y = 0; y < n; ++y)
        for (int yp = 0; yp < n; ++yp) {
          const double wyy = ky_[static_cast<size_t>(y)] * kyp_[static_cast<size_t>(yp)];
          if (wyy == 0.0) continue;
          for (int xp = 0; xp < n; ++xp)
            for (int x = 0; x < n; ++x)
              acc += f1_.at(xp, y) * f2_.at(x, yp) * f3_.at(x, y) * f4_.at(xp, yp) *
                     kx[static_cast<size_t>(x)] * kxp[static_cast<size_t>(xp)] * wyy;
        }
      const double n2 = static_cast<double>(n) * n;
      return acc / (n2 * n2);
    }
    cd acc(0.0, 0.0);
    for (int xp = 0; xp < n; ++xp) {
      const double a = kxp[static_cast<size_t>(xp)];
      if (a == 0.0) continue;
      const cd* urow = U_.data() + static_cast<size_t>(xp) * n;
      const cd* vrow = V_.data() + static_cast<size_t>(xp) * n;
      cd inner(0.0, 0.0);
      for (int x = 0; x < n; ++x) {
        const double b = kx[static_cast<size_t>(x)];
        if (b != 0.0) inner += b * (urow[x] * vrow[x]);
      }
      acc += a * inner;
    }
    const double n2 = static_cast<double>(n) * n;
    return acc / n2;
  }

  // Contraction against a precomputed x-kernel correlation matrix
  //   S(x,x') = sum_p kx_p(x) kxp_p(x'),
  // which folds an entire p-node sweep into one O(n^2) pass. Only meaningful
  // in factorized mode; the direct oracle keeps per-p evaluations.
  cd eval_sum(const std::vector<double>& S) const {
    const int n = n_;
    cd acc(0.0, 0.0);
    for (int xp = 0; xp < n; ++xp) {
      const double* srow = S.data() + static_cast<size_t>(xp) * n;
      const cd* urow = U_.data() + static_cast<size_t>(xp) * n;
      const cd* vrow = V_.data() + static_cast<size_t>(xp) * n;
      cd inner(0.0, 0.0);
      for (int x = 0; x < n; ++x)
        if (srow[x] != 0.0) inner += srow[x] * (urow[x] * vrow[x]);
      acc += inner;
    }
    const double n2 = static_cast<double>(n) * n;
    return acc / n2;
  }

 private:
  const GridFunction2D& f1_;
  const GridFunction2D& f2_;
  const GridFunction2D& f3_;
  const GridFunction2D& f4_;
  int n_;
  bool direct_;
  std::vector<cd> U_, V_;
  std::vector<double> ky_, kyp_;
};

std::vector<double> correlation_matrix(const std::vector<std::vector<double>>& ka,
                                       const std::vector<std::vector<double>>& kb,
                                       int n) {
  std::vector<double> S(static_cast<size_t>(n) * n, 0.0);
  for (size_t p = 0; p < ka.size(); ++p) {
    const std::vector<double>& a = kb[p];  // axis x' weights
    const std::vector<double>& b = ka[p];  // axis x weights
    for (int xp = 0; xp < n; ++xp) {
      const double w = a[static_cast<size_t>(xp)];
      if (w == 0.0) continue;
      double* srow = S.data() + static_cast<size_t>(xp) * n;
      for (int x = 0; x < n; ++x) srow[x] += w * b[static_cast<size_t>(x)];
    }
  }
  return S;
}

struct RectFrame {
  double ell, w1, w2, ilo, jlo, ht, hp, hq;
};

RectFrame rect_frame(const DyadicGeometry& geo, const DyadicRectangle& q,
                     const FormQuad& quad) {
  RectFrame fr;
  fr.ell = std::ldexp(1.0, q.k);
  fr.w1 = std::ldexp(1.0, geo.alpha * q.k);
  fr.w2 = std::ldexp(1.0, geo.beta * q.k);
  fr.ilo = static_cast<double>(q.i1) * fr.w1;
  fr.jlo = static_cast<double>(q.i2) * fr.w2;
  fr.ht = 0.5 * fr.ell / quad.t_nodes;
  fr.hp = fr.w1 / quad.pq_nodes;
  fr.hq = fr.w2 / quad.pq_nodes;
  return fr;
}

// One scale-slab rectangle contribution of the theta1 / theta2 / lambda_uv
// kinds: midpoint nodes in t, q, p with the p sweep folded into a
// correlation matrix per t (factorized mode) or evaluated per node (direct).
cd slab_rect(FormKind kind, const DyadicGeometry& geo, const DyadicRectangle& rect,
             const GridFunction2D& f1, const GridFunction2D& f2,
             const GridFunction2D& f3, const GridFunction2D& f4,
             const FormParams& prm, const FormQuad& quad, Exec exec, bool direct) {
  const RectFrame fr = rect_frame(geo, rect, quad);
  const int n = f1.n;
  const int pq = quad.pq_nodes;
  std::vector<cd> partial(static_cast<size_t>(quad.t_nodes), cd(0.0, 0.0));
  parallel_for(quad.t_nodes, exec, [&](int it) {
    const double t = 0.5 * fr.ell + (it + 0.5) * fr.ht;
    const double ta = ipow(t, geo.alpha);
    const double tb = ipow(t, geo.beta);
    double wt = fr.ht / t;
    if (kind == FormKind::lambda_uv && prm.c_profile) wt *= prm.c_profile(t);

    std::vector<std::vector<double>> xk(static_cast<size_t>(pq));
    std::vector<std::vector<double>> xk2(static_cast<size_t>(pq));
    for (int ip = 0; ip < pq; ++ip) {
      const double p = fr.ilo + (ip + 0.5) * fr.hp;
      switch (kind) {
        case FormKind::theta1:
          xk[static_cast<size_t>(ip)] = kernel_cells(kernel_dgauss(prm.lambda * ta, p), n);
          break;
        case FormKind::theta2:
          xk[static_cast<size_t>(ip)] = kernel_cells(kernel_gauss(prm.lambda * ta, p), n);
          break;
        default:  // lambda_uv
          xk[static_cast<size_t>(ip)] =
              kernel_cells(kernel_plateau_space(geo.alpha, ta, p + prm.u * ta), n);
          xk2[static_cast<size_t>(ip)] = kernel_cells(kernel_gauss(ta, p), n);
          break;
      }
    }
    const bool split_x = kind == FormKind::lambda_uv;
    std::vector<double> S;
    if (!direct) S = correlation_matrix(xk, split_x ? xk2 : xk, n);

    Contractor con(f1, f2, f3, f4, direct);
    cd acc(0.0, 0.0);
    for (int iq = 0; iq < pq; ++iq) {
      const double q = fr.jlo + (iq + 0.5) * fr.hq;
      switch (kind) {
        case FormKind::theta1: {
          const auto yk = kernel_cells(kernel_gauss(tb, q + prm.r * tb), n);
          con.set_y(yk, yk);
          break;
        }
        case FormKind::theta2: {
          const auto yk = kernel_cells(kernel_dgauss(tb, q + prm.r * tb), n);
          con.set_y(yk, yk);
          break;
        }
        default: {
          const auto yk = kernel_cells(kernel_band_space(tb, q + prm.v * tb), n);
          const auto ykp = kernel_cells(kernel_dgauss(tb, q), n);
          con.set_y(yk, ykp);
          break;
        }
      }
      if (direct) {
        for (int ip = 0; ip < pq; ++ip)
          acc += con.eval_x(xk[static_cast<size_t>(ip)],
                            split_x ? xk2[static_cast<size_t>(ip)]
                                    : xk[static_cast<size_t>(ip)]);
      } else {
        acc += con.eval_sum(S);
      }
    }
    partial[static_cast<size_t>(it)] = wt * fr.hp * fr.hq * acc;
  });
  cd total(0.0, 0.0);
  for (const cd& z : partial) total += z;
  return total;
}

// Frozen-scale Gaussian form: pi int_Q F g g g g dp dq at scales lambda
// ell^alpha and ell^beta, no t integral.
cd xi_rect(const DyadicGeometry& geo, const DyadicRectangle& rect,
           const GridFunction2D& f1, const GridFunction2D& f2,
           const GridFunction2D& f3, const GridFunction2D& f4,
           const FormParams& prm, const FormQuad& quad, Exec exec, bool direct) {
  const RectFrame fr = rect_frame(geo, rect, quad);
  const int n = f1.n;
  const int pq = quad.pq_nodes;
  const double sx = prm.lambda * fr.w1;
  const double sy = fr.w2;
  std::vector<std::vector<double>> xk(static_cast<size_t>(pq));
  for (int ip = 0; ip < pq; ++ip)
    xk[static_cast<size_t>(ip)] =
        kernel_cells(kernel_gauss(sx, fr.ilo + (ip + 0.5) * fr.hp), n);
  std::vector<double> S;
  if (!direct) S = correlation_matrix(xk, xk, n);

  std::vector<cd> partial(static_cast<size_t>(pq), cd(0.0, 0.0));
  parallel_for(pq, exec, [&](int iq) {
    const double q = fr.jlo + (iq + 0.5) * fr.hq;
    Contractor con(f1, f2, f3, f4, direct);
    const auto yk = kernel_cells(kernel_gauss(sy, q + prm.r * sy), n);
    con.set_y(yk, yk);
    cd acc(0.0, 0.0);
    if (direct) {
      for (int ip = 0; ip < pq; ++ip)
        acc += con.eval_x(xk[static_cast<size_t>(ip)], xk[static_cast<size_t>(ip)]);
    } else {
      acc = con.eval_sum(S);
    }
    partial[static_cast<size_t>(iq)] = acc;
  });
  cd total(0.0, 0.0);
  for (const cd& z : partial) total += z;
  return kPi * fr.hp * fr.hq * total;
}

// Boundary ("bark") form of one rectangle. Three pieces, each an exact
// derivative of the frozen-scale form in one of p, q, t evaluated at the
// interval ends ([.]: value at the right end minus value at the left end):
//   -(alpha lambda / 2) int t^{alpha-1} dt int dq [h g + g h]_{p in I} G G
//   -(beta / 2)         int t^{beta-1}  dt int dp g g { [H G + G H]_{q in J} }
//   +pi beta r          int t^{beta-1}  dt int dp g g [G G]_{q in J}
// with g, h the x-axis pair at scale lambda t^alpha and G, H the y-axis pair
// at scale t^beta centered q + r t^beta.
cd bark_rect(const DyadicGeometry& geo, const DyadicRectangle& rect,
             const GridFunction2D& f1, const GridFunction2D& f2,
             const GridFunction2D& f3, const GridFunction2D& f4,
             const FormParams& prm, const FormQuad& quad, Exec exec, bool direct) {
  const RectFrame fr = rect_frame(geo, rect, quad);
  const int n = f1.n;
  const int pq = quad.pq_nodes;
  const double lam = prm.lambda;
  const double r = prm.r;
  std::vector<cd> partial(static_cast<size_t>(quad.t_nodes), cd(0.0, 0.0));
  parallel_for(quad.t_nodes, exec, [&](int it) {
    const double t = 0.5 * fr.ell + (it + 0.5) * fr.ht;
    const double ta = ipow(t, geo.alpha);
    const double tb = ipow(t, geo.beta);
    Contractor con(f1, f2, f3, f4, direct);

    // x boundary piece: q integral survives, p is evaluated at the ends of I.
    const auto khR = kernel_cells(kernel_dgauss(lam * ta, fr.ilo + fr.w1), n);
    const auto kgR = kernel_cells(kernel_gauss(lam * ta, fr.ilo + fr.w1), n);
    const auto khL = kernel_cells(kernel_dgauss(lam * ta, fr.ilo), n);
    const auto kgL = kernel_cells(kernel_gauss(lam * ta, fr.ilo), n);
    cd acc_x(0.0, 0.0);
    for (int iq = 0; iq < pq; ++iq) {
      const double q = fr.jlo + (iq + 0.5) * fr.hq;
      const auto yk = kernel_cells(kernel_gauss(tb, q + r * tb), n);
      con.set_y(yk, yk);
      acc_x += con.eval_x(khR, kgR) + con.eval_x(kgR, khR);
      acc_x -= con.eval_x(khL, kgL) + con.eval_x(kgL, khL);
    }
    acc_x *= fr.hq;

    // y boundary pieces: p integral survives (folded into one correlation
    // matrix), q is evaluated at the ends of J.
    std::vector<std::vector<double>> xg(static_cast<size_t>(pq));
    for (int ip = 0; ip < pq; ++ip)
      xg[static_cast<size_t>(ip)] =
          kernel_cells(kernel_gauss(lam * ta, fr.ilo + (ip + 0.5) * fr.hp), n);
    std::vector<double> S;
    if (!direct) S = correlation_matrix(xg, xg, n);
    auto p_sweep = [&]() {
      if (!direct) return con.eval_sum(S);
      cd acc(0.0, 0.0);
      for (int ip = 0; ip < pq; ++ip)
        acc += con.eval_x(xg[static_cast<size_t>(ip)], xg[static_cast<size_t>(ip)]);
      return acc;
    };
    cd acc_y(0.0, 0.0), acc_b(0.0, 0.0);
    const std::array<std::pair<double, double>, 2> ends{
        {{fr.jlo + fr.w2, 1.0}, {fr.jlo, -1.0}}};
    for (const auto& [qe, sign] : ends) {
      const auto yg = kernel_cells(kernel_gauss(tb, qe + r * tb), n);
      const auto yh = kernel_cells(kernel_dgauss(tb, qe + r * tb), n);
      con.set_y(yh, yg);
      acc_y += sign * p_sweep();
      con.set_y(yg, yh);
      acc_y += sign * p_sweep();
      if (r != 0.0) {
        con.set_y(yg, yg);
        acc_b += sign * p_sweep();
      }
    }
    acc_y *= fr.hp;
    acc_b *= fr.hp;

    partial[static_cast<size_t>(it)] =
        fr.ht * (-0.5 * geo.alpha * lam * ipow(t, geo.alpha - 1) * acc_x -
                 0.5 * geo.beta * ipow(t, geo.beta - 1) * acc_y +
                 kPi * geo.beta * r * ipow(t, geo.beta - 1) * acc_b);
  });
  cd total(0.0, 0.0);
  for (const cd& z : partial) total += z;
  return total;
}

cd form_value(FormKind kind, const DyadicGeometry& geo,
              const std::vector<DyadicRectangle>& rects, const GridFunction2D& f1,
              const GridFunction2D& f2, const GridFunction2D& f3,
              const GridFunction2D& f4, const FormParams& prm, const FormQuad& quad,
              Exec exec, bool direct) {
  check_geo(geo, "quad_form");
  check_same_n(f1, f2, "quad_form");
  check_same_n(f1, f3, "quad_form");
  check_same_n(f1, f4, "quad_form");
  require(quad.pq_nodes >= 1 && quad.t_nodes >= 1,
          "quad_form: node counts must be >= 1");
  if (kind != FormKind::lambda_uv)
    require(prm.lambda >= 1.0, "quad_form: lambda must be >= 1");
  if (kind == FormKind::lambda_uv) {
    // Warm the tabulated spatial profiles outside the parallel region.
    kernel_plateau_space(geo.alpha, 1.0, 0.0);
    kernel_band_space(1.0, 0.0);
  }
  cd total(0.0, 0.0);
  for (const DyadicRectangle& rect : rects) {
    switch (kind) {
      case FormKind::xi:
        total += xi_rect(geo, rect, f1, f2, f3, f4, prm, quad, exec, direct);
        break;
      case FormKind::bark:
        total += bark_rect(geo, rect, f1, f2, f3, f4, prm, quad, exec, direct);
        break;
      default:
        total += slab_rect(kind, geo, rect, f1, f2, f3, f4, prm, quad, exec, direct);
        break;
    }
  }
  return total;
}

}  // namespace

cd quad_form(FormKind kind, const Tree& tree, const GridFunction2D& f1,
             const GridFunction2D& f2, const GridFunction2D& f3,
             const GridFunction2D& f4, const FormParams& params,
             const FormQuad& quad, Exec exec) {
  return form_value(kind, tree.geometry(), tree.rects(), f1, f2, f3, f4, params,
                    quad, exec, false);
}

cd quad_form(FormKind kind, const DyadicGeometry& geo,
             const std::vector<DyadicRectangle>& rects, const GridFunction2D& f1,
             const GridFunction2D& f2, const GridFunction2D& f3,
             const GridFunction2D& f4, const FormParams& params,
             const FormQuad& quad, Exec exec) {
  require(kind == FormKind::xi || kind == FormKind::lambda_uv,
          "quad_form: slab-tree kinds need a Tree region");
  return form_value(kind, geo, rects, f1, f2, f3, f4, params, quad, exec, false);
}

cd quad_form_reference(FormKind kind, const Tree& tree, const GridFunction2D& f1,
                       const GridFunction2D& f2, const GridFunction2D& f3,
                       const GridFunction2D& f4, const FormParams& params,
                       const FormQuad& quad) {
  return form_value(kind, tree.geometry(), tree.rects(), f1, f2, f3, f4, params,
                    quad, Exec::seq, true);
}

cd quad_form_reference(FormKind kind, const DyadicGeometry& geo,
                       const std::vector<DyadicRectangle>& rects,
                       const GridFunction2D& f1, const GridFunction2D& f2,
                       const GridFunction2D& f3, const GridFunction2D& f4,
                       const FormParams& params, const FormQuad& quad) {
  require(kind == FormKind::xi || kind == FormKind::lambda_uv,
          "quad_form_reference: slab-tree kinds need a Tree region");
  return form_value(kind, geo, rects, f1, f2, f3, f4, params, quad, Exec::seq, true);
}

TelescopeResult telescoping_residual(const Tree& tree, const GridFunction2D& f1,
                                     const GridFunction2D& f2,
                                     const GridFunction2D& f3,
                                     const GridFunction2D& f4, double lambda,
                                     double r, const FormQuad& quad, Exec exec) {
  FormParams prm;
  prm.lambda = lambda;
  prm.r = r;
  const DyadicGeometry& geo = tree.geometry();
  const cd th1 = quad_form(FormKind::theta1, tree, f1, f2, f3, f4, prm, quad, exec);
  const cd th2 = quad_form(FormKind::theta2, tree, f1, f2, f3, f4, prm, quad, exec);
  const cd bark = quad_form(FormKind::bark, tree, f1, f2, f3, f4, prm, quad, exec);
  const cd xi_leaves = quad_form(FormKind::xi, geo, tree_leaves(tree), f1, f2, f3,
                                 f4, prm, quad, exec);
  const cd xi_root = quad_form(FormKind::xi, geo, {tree.root()}, f1, f2, f3, f4,
                               prm, quad, exec);
  const cd lhs = static_cast<double>(geo.alpha) * th1 + static_cast<double>(geo.beta) * th2;
  const cd rhs = xi_leaves - xi_root + bark;
  TelescopeResult res;
  res.residual = std::abs(lhs - rhs);
  res.scale = std::max({std::abs(static_cast<double>(geo.alpha) * th1),
                        std::abs(static_cast<double>(geo.beta) * th2),
                        std::abs(xi_leaves), std::abs(xi_root), std::abs(bark)});
  return res;
}

// ---- decay-envelope averages ------------------------------------------------

double theta_average(const GridFunction2D& f, double p, double q, double s1,
                     double s2) {
  const int n = f.n;
  require(n > 0, "theta_average: empty grid");
  const auto w1 = kernel_cells(kernel_theta(s1, p), n);
  const auto w2 = kernel_cells(kernel_theta(s2, q), n);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    if (w2[static_cast<size_t>(j)] == 0.0) continue;
    const cd* row = f.v.data() + static_cast<size_t>(j) * n;
    double rs = 0.0;
    for (int i = 0; i < n; ++i) rs += std::norm(row[i]) * w1[static_cast<size_t>(i)];
    acc += w2[static_cast<size_t>(j)] * rs;
  }
  return acc / (static_cast<double>(n) * n);
}

cd theta_quadruple(const GridFunction2D& f1, const GridFunction2D& f2,
                   const GridFunction2D& f3, const GridFunction2D& f4, double p,
                   double q, double s1, double s2) {
  check_same_n(f1, f2, "theta_quadruple");
  check_same_n(f1, f3, "theta_quadruple");
  check_same_n(f1, f4, "theta_quadruple");
  const int n = f1.n;
  const auto wx = kernel_cells(kernel_theta(s1, p), n);
  const auto wy = kernel_cells(kernel_theta(s2, q), n);
  Contractor con(f1, f2, f3, f4, false);
  con.set_y(wy, wy);
  return con.eval_x(wx, wx);
}

double local_max(const GridFunction2D& f, const DyadicGeometry& geo,
                 const std::vector<DyadicRectangle>& q) {
  check_geo(geo, "local_max");
  require(!q.empty(), "local_max: empty rectangle collection");
  double best = 0.0;
  for (const DyadicRectangle& rect : q) {
    const auto c = rect_center(geo, rect);
    const double avg = theta_average(f, c[0], c[1], rect_width(geo, rect, 1),
                                     rect_width(geo, rect, 2));
    best = std::max(best, std::sqrt(std::max(avg, 0.0)));
  }
  return best;
}

// ---- tree selection ----------------------------------------------------------

std::vector<SelectedTree> tree_select(const DyadicGeometry& geo,
                                      const std::vector<DyadicRectangle>& q0,
                                      const GridFunction2D& f1,
                                      const GridFunction2D& f2,
                                      const GridFunction2D& f3) {
  check_geo(geo, "tree_select");
  require(!q0.empty(), "tree_select: empty collection");
  const GridFunction2D* fs[3] = {&f1, &f2, &f3};
  for (const GridFunction2D* f : fs) {
    double m = 0.0;
    for (const cd& z : f->v) m = std::max(m, std::abs(z));
    require(m > 0.0, "tree_select: input function is identically zero");
  }

  std::vector<DyadicRectangle> rects = q0;
  std::sort(rects.begin(), rects.end());
  require(std::adjacent_find(rects.begin(), rects.end()) == rects.end(),
          "tree_select: duplicate rectangle");
  const int m = static_cast<int>(rects.size());
  const int kmax = rects.back().k;
  auto lookup = [&](const DyadicRectangle& r) -> int {
    auto it = std::lower_bound(rects.begin(), rects.end(), r);
    if (it != rects.end() && *it == r) return static_cast<int>(it - rects.begin());
    return -1;
  };

  // Running envelope maxima: process large scales first so the nearest
  // present ancestor already folds its whole chain.
  std::array<std::vector<double>, 3> sup;
  for (auto& s : sup) s.assign(static_cast<size_t>(m), 0.0);
  for (int idx = m - 1; idx >= 0; --idx) {
    const DyadicRectangle& rect = rects[static_cast<size_t>(idx)];
    const auto c = rect_center(geo, rect);
    const double w1 = rect_width(geo, rect, 1);
    const double w2 = rect_width(geo, rect, 2);
    for (int j = 0; j < 3; ++j)
      sup[static_cast<size_t>(j)][static_cast<size_t>(idx)] =
          std::sqrt(std::max(theta_average(*fs[j], c[0], c[1], w1, w2), 0.0));
    for (DyadicRectangle a = rect_parent(geo, rect); a.k <= kmax;
         a = rect_parent(geo, a)) {
      const int pidx = lookup(a);
      if (pidx < 0) continue;
      for (int j = 0; j < 3; ++j) {
        auto& s = sup[static_cast<size_t>(j)];
        s[static_cast<size_t>(idx)] =
            std::max(s[static_cast<size_t>(idx)], s[static_cast<size_t>(pidx)]);
      }
      break;
    }
  }

  constexpr int kZeroLevel = std::numeric_limits<int>::min() / 4;
  auto level_of = [](double v) {
    return v > 0.0 ? static_cast<int>(std::ceil(std::log2(v))) : kZeroLevel;
  };
  std::map<std::array<int, 3>, std::vector<int>> classes;
  for (int idx = 0; idx < m; ++idx) {
    std::array<int, 3> key;
    for (int j = 0; j < 3; ++j)
      key[static_cast<size_t>(j)] =
          level_of(sup[static_cast<size_t>(j)][static_cast<size_t>(idx)]);
    classes[key].push_back(idx);
  }

  std::vector<SelectedTree> out;
  for (const auto& [key, members] : classes) {
    std::vector<char> in_class(static_cast<size_t>(m), 0);
    for (int idx : members) in_class[static_cast<size_t>(idx)] = 1;
    // Root of a member: the highest rectangle of the same class on its
    // ancestor chain. Bucketing by root splits the class into trees.
    std::map<int, std::vector<DyadicRectangle>> buckets;
    for (int idx : members) {
      int root_idx = idx;
      for (DyadicRectangle a = rect_parent(geo, rects[static_cast<size_t>(idx)]);
           a.k <= kmax; a = rect_parent(geo, a)) {
        const int pidx = lookup(a);
        if (pidx >= 0 && in_class[static_cast<size_t>(pidx)]) root_idx = pidx;
      }
      buckets[root_idx].push_back(rects[static_cast<size_t>(idx)]);
    }
    for (auto& [root_idx, bucket] : buckets)
      out.push_back(SelectedTree{
          Tree(geo, rects[static_cast<size_t>(root_idx)], std::move(bucket)), key});
  }
  return out;
}

// ---- fiber decomposition ------------------------------------------------------

FiberDecomposition fiber_cz(const GridFunction2D& f, double level, double p) {
  require(level > 0.0, "fiber_cz: level must be positive");
  require(p >= 1.0, "fiber_cz: p must be >= 1");
  const int n = f.n;
  require(n > 0, "fiber_cz: empty grid");
  FiberDecomposition out;
  out.g = f;
  out.b = GridFunction2D(n);
  out.rows.assign(static_cast<size_t>(n), {});
  const double thresh = std::pow(level, p);
  std::vector<double> pref(static_cast<size_t>(n) + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    const cd* row = f.v.data() + static_cast<size_t>(j) * n;
    for (int i = 0; i < n; ++i)
      pref[static_cast<size_t>(i) + 1] =
          pref[static_cast<size_t>(i)] + std::pow(std::abs(row[i]), p);
    std::function<void(int, int)> descend = [&](int begin, int len) {
      const double mean =
          (pref[static_cast<size_t>(begin + len)] - pref[static_cast<size_t>(begin)]) / len;
      if (mean > thresh) {
        out.rows[static_cast<size_t>(j)].push_back({begin, len});
        const double val = std::pow(mean, 1.0 / p);
        for (int i = begin; i < begin + len; ++i) out.g.at(i, j) = cd(val, 0.0);
        return;
      }
      if (len > 1) {
        descend(begin, len / 2);
        descend(begin + len / 2, len / 2);
      }
    };
    descend(0, n);
  }
  for (size_t i = 0; i < f.v.size(); ++i) out.b.v[i] = f.v[i] - out.g.v[i];
  return out;
}

// ---- scale-integrated model operator -----------------------------------------

GridFunction2D model_apply(const GridFunction2D& f1, const GridFunction2D& f2,
                           const ModelParams& params, const DyadicGeometry& geo,
                           Exec exec) {
  check_geo(geo, "model_apply");
  check_same_n(f1, f2, "model_apply");
  require(params.t_cells >= 1, "model_apply: t_cells must be >= 1");
  const int n = f1.n;
  const ConeProfile cone = cone_profile(static_cast<double>(geo.alpha), 64);
  const SampledWindow psi = annulus_psi();

  const AxisSpectrum sp1 = axis_spectrum(f1, 1);
  const AxisSpectrum sp2 = axis_spectrum(f2, 2);
  GridFunction2D out(n), A(n), B(n);
  std::vector<cd> M1(static_cast<size_t>(n)), M2(static_cast<size_t>(n));

  // log2 t covers every band visible to lattice frequencies |eta| in [1, n/2].
  const double ulo = -std::log2(static_cast<double>(n)) / geo.beta;
  const double uhi = 1.0 / geo.beta;
  const int cells = params.t_cells;
  const int nodes = 2 * cells + 1;
  const double hu = (uhi - ulo) / cells;
  const double ln2 = std::log(2.0);

  for (int mnode = 0; mnode < nodes; ++mnode) {
    const double u = ulo + 0.5 * hu * mnode;
    const double t = std::exp2(u);
    const double ta = ipow(t, geo.alpha);
    const double tb = ipow(t, geo.beta);
    const bool end = (mnode == 0 || mnode == nodes - 1);
    double wt = (hu / 6.0) * (end ? 1.0 : (mnode % 2 == 1 ? 4.0 : 2.0)) * ln2;
    if (params.c_profile) wt *= params.c_profile(t);

    bool active = false;
    for (int b = 0; b < n; ++b) {
      const double eta = static_cast<double>(bin_to_freq(b, n));
      const double w = tb * eta;
      const double pv = psi(w);
      if (pv == 0.0) {
        M2[static_cast<size_t>(b)] = cd(0.0, 0.0);
        continue;
      }
      active = true;
      const double hv = dgauss_profile(w);
      const double ang = -kTwoPi * params.v * w;
      M2[static_cast<size_t>(b)] = -hv * hv * pv * cd(std::cos(ang), std::sin(ang));
    }
    if (!active) continue;
    for (int b = 0; b < n; ++b) {
      const double xi = static_cast<double>(bin_to_freq(b, n));
      const double s = ta * xi;
      const double pv = cone.profile(s);
      if (pv == 0.0) {
        M1[static_cast<size_t>(b)] = cd(0.0, 0.0);
        continue;
      }
      const double ang = -kTwoPi * params.u * s;
      M1[static_cast<size_t>(b)] = gauss_profile(s) * pv * cd(std::cos(ang), std::sin(ang));
    }

    parallel_for(n, exec, [&](int j) {
      std::vector<cd> buf(static_cast<size_t>(n));
      const cd* src = sp1.a.data() + static_cast<size_t>(j) * n;
      for (int b = 0; b < n; ++b) buf[static_cast<size_t>(b)] = src[b] * M1[static_cast<size_t>(b)];
      fft_pow2(buf.data(), n, true);
      std::copy(buf.begin(), buf.end(), A.v.data() + static_cast<size_t>(j) * n);
    });
    parallel_for(n, exec, [&](int i) {
      std::vector<cd> buf(static_cast<size_t>(n));
      const cd* src = sp2.a.data() + static_cast<size_t>(i) * n;
      for (int b = 0; b < n; ++b) buf[static_cast<size_t>(b)] = src[b] * M2[static_cast<size_t>(b)];
      fft_pow2(buf.data(), n, true);
      for (int j = 0; j < n; ++j) B.v[static_cast<size_t>(j) * n + i] = buf[static_cast<size_t>(j)];
    });
    parallel_for(n, exec, [&](int j) {
      cd* orow = out.v.data() + static_cast<size_t>(j) * n;
      const cd* arow = A.v.data() + static_cast<size_t>(j) * n;
      const cd* brow = B.v.data() + static_cast<size_t>(j) * n;
      for (int i = 0; i < n; ++i) orow[i] += wt * arow[i] * brow[i];
    });
  }
  return out;
}

SymbolSpec model_symbol(const ModelParams& params, const DyadicGeometry& geo) {
  check_geo(geo, "model_symbol");
  auto cone = std::make_shared<const ConeProfile>(
      cone_profile(static_cast<double>(geo.alpha), 64));
  const SampledWindow psi = annulus_psi();
  const double u_mod = params.u;
  const double v_mod = params.v;
  const auto c_profile = params.c_profile;
  const int alpha = geo.alpha;
  const int beta = geo.beta;

  SymbolSpec spec;
  spec.alpha = alpha;
  spec.beta = beta;
  spec.derivative_budget = 2;
  // Per-frequency Simpson in log2 t over the band t^beta |eta| in [1/2, 2];
  // the sign flip relative to the operator's multipliers (evaluation at the
  // negated frequencies) makes aniso_apply of this spec match model_apply.
  spec.eval = [cone, psi, u_mod, v_mod, c_profile, alpha, beta](double xi,
                                                                double eta) -> cd {
    if (eta == 0.0) return cd(0.0, 0.0);
    const double aeta = std::abs(eta);
    const double ulo = std::log2(0.5 / aeta) / beta;
    const double uhi = std::log2(2.0 / aeta) / beta;
    constexpr int kCells = 64;
    const double hu = (uhi - ulo) / kCells;
    auto integrand = [&](double u) -> cd {
      const double t = std::exp2(u);
      const double s = ipow(t, alpha) * xi;
      const double w = ipow(t, beta) * eta;
      const double pv = psi(w);
      if (pv == 0.0) return cd(0.0, 0.0);
      const double hv = dgauss_profile(w);
      double amp = gauss_profile(s) * cone->profile(s) * (-hv * hv * pv);
      if (c_profile) amp *= c_profile(t);
      const double ang = kTwoPi * (u_mod * s + v_mod * w);
      return amp * cd(std::cos(ang), std::sin(ang));
    };
    cd acc(0.0, 0.0);
    for (int c = 0; c < kCells; ++c) {
      const double a = ulo + c * hu;
      acc += (hu / 6.0) *
             (integrand(a) + 4.0 * integrand(a + 0.5 * hu) + integrand(a + hu));
    }
    return acc * std::log(2.0);
  };
  return spec;
}

// ---- serialization ------------------------------------------------------------

std::string tree_to_json(const Tree& t) {
  nlohmann::ordered_json j;
  j["alpha"] = t.geometry().alpha;
  j["beta"] = t.geometry().beta;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const DyadicRectangle& q : t.rects()) {
    nlohmann::ordered_json e;
    e["k"] = q.k;
    e["i1"] = q.i1;
    e["i2"] = q.i2;
    arr.push_back(std::move(e));
  }
  j["rects"] = std::move(arr);
  return j.dump();
}

Tree tree_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DyadicGeometry geo;
  geo.alpha = j.at("alpha").get<int>();
  geo.beta = j.at("beta").get<int>();
  std::vector<DyadicRectangle> rects;
  for (const auto& e : j.at("rects")) {
    DyadicRectangle q;
    q.k = e.at("k").get<int>();
    q.i1 = e.at("i1").get<long long>();
    q.i2 = e.at("i2").get<long long>();
    rects.push_back(q);
  }
  require(!rects.empty(), "tree_from_json: empty rectangle list");
  for (const DyadicRectangle& cand : rects) {
    bool all = true;
    for (const DyadicRectangle& q : rects)
      if (!rect_contains(geo, cand, q)) {
        all = false;
        break;
      }
    if (all) return Tree(geo, cand, rects);
  }
  require(false, "tree_from_json: no member contains all others");
  return Tree(geo, rects.front(), rects);  // unreachable
}

std::string form_report_json(const std::string& kind, const FormParams& params,
                             cd value, const FormQuad& quad) {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["params"] = {{"u", params.u}, {"v", params.v}, {"lambda", params.lambda},
                 {"r", params.r}};
  j["value_re"] = value.real();
  j["value_im"] = value.imag();
  j["quad"] = {{"pq_nodes", quad.pq_nodes}, {"t_nodes", quad.t_nodes}};
  return j.dump();
}

}  // namespace tht
