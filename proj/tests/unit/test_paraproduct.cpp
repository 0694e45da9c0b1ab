#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "tht/fft.hpp"
#include "tht/paraproduct.hpp"

using namespace tht;

namespace {

GridFunction2D random_grid(int n, Rng& rng, bool nonneg) {
  GridFunction2D f(n);
  for (auto& z : f.v)
    z = nonneg ? cd(rng.uniform(), 0.0)
               : cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return f;
}

GridFunction2D band_limited(int n, int kmax, Rng& rng) {
  Spectrum2D s(n);
  for (int x2 = -kmax; x2 <= kmax; ++x2)
    for (int x1 = -kmax; x1 <= kmax; ++x1) s.at_freq(x1, x2) = rng.gaussian_complex();
  return inverse(s);
}

}  // namespace

TEST_SUITE("paraproduct") {

TEST_CASE("rectangle geometry: widths, children, containment") {
  const DyadicGeometry geo;  // alpha = 1, beta = 2
  const DyadicRectangle root{0, 0, 0};
  CHECK(rect_width(geo, root, 1) == 1.0);
  CHECK(rect_width(geo, root, 2) == 1.0);
  CHECK(rect_area(geo, root) == 1.0);
  const auto kids = rect_children(geo, root);
  CHECK(kids.size() == 8);  // 2^alpha * 2^beta
  double area = 0.0;
  for (const auto& q : kids) {
    CHECK(q.k == -1);
    CHECK(rect_contains(geo, root, q));
    CHECK_FALSE(rect_contains(geo, q, root));
    CHECK(rect_parent(geo, q) == root);
    area += rect_area(geo, q);
  }
  CHECK(area == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("tree constructor enforces root containment and ancestor closure") {
  const DyadicGeometry geo;
  const DyadicRectangle root{0, 0, 0};
  CHECK_NOTHROW(Tree(geo, root, {root, {-1, 0, 0}, {-1, 1, 2}}));
  // grandchild without its parent violates convexity
  CHECK_THROWS_AS(Tree(geo, root, {root, {-2, 0, 0}}), std::invalid_argument);
  // member outside the root
  CHECK_THROWS_AS(Tree(geo, root, {root, {-1, 3, 0}}), std::invalid_argument);
}

TEST_CASE("random trees stay convex and leaves partition the root") {
  const DyadicGeometry geo;
  Rng rng(29, 6);
  const Tree tr = random_convex_tree(geo, {0, 0, 0}, 9, 3, rng);
  double area = 0.0;
  for (const auto& q : tree_leaves(tr)) area += rect_area(geo, q);
  CHECK(area == doctest::Approx(rect_area(geo, tr.root())).epsilon(1e-12));
  for (const auto& q : tr.rects())
    if (!(q == tr.root())) CHECK(tr.contains(rect_parent(geo, q)));
}

TEST_CASE("tree json round-trip") {
  const DyadicGeometry geo;
  Rng rng(31, 7);
  const Tree tr = random_convex_tree(geo, {0, 0, 0}, 7, 3, rng);
  const Tree back = tree_from_json(tree_to_json(tr));
  CHECK(back.rects() == tr.rects());
  CHECK(back.root() == tr.root());
}

TEST_CASE("localized maximum of the unit function is the envelope mass") {
  GridFunction2D one(16);
  for (auto& z : one.v) z = cd(1.0, 0.0);
  const DyadicGeometry geo;
  const std::vector<DyadicRectangle> rs{{0, 0, 0}, {-1, 1, 2}, {-2, 3, 7}};
  CHECK(local_max(one, geo, rs) == doctest::Approx(2.0 / 9.0).epsilon(1e-6));
}

TEST_CASE("quadruple form obeys the four-function envelope bound") {
  Rng rng(7, 1);
  int bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 16;
    const auto f1 = random_grid(n, rng, true), f2 = random_grid(n, rng, true),
               f3 = random_grid(n, rng, true), f4 = random_grid(n, rng, true);
    const double p = rng.uniform(), q = rng.uniform();
    const double s1 = std::exp2(rng.uniform(-4.0, 0.0));
    const double s2 = std::exp2(rng.uniform(-4.0, 0.0));
    const double lhs = std::abs(theta_quadruple(f1, f2, f3, f4, p, q, s1, s2));
    const double rhs =
        std::pow(theta_average(f1, p, q, s1, s2) * theta_average(f2, p, q, s1, s2) *
                     theta_average(f3, p, q, s1, s2) * theta_average(f4, p, q, s1, s2),
                 0.25);
    if (lhs > rhs * (1.0 + 1e-12)) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("factorized forms match the direct reference") {
  Rng rng(11, 2);
  const int n = 8;
  const auto f1 = random_grid(n, rng, false), f2 = random_grid(n, rng, false),
             f3 = random_grid(n, rng, false), f4 = random_grid(n, rng, false);
  const DyadicGeometry geo;
  const Tree tr = random_convex_tree(geo, {0, 0, 0}, 4, 2, rng);
  const FormQuad quad{4, 6};
  FormParams prm;
  prm.lambda = 1.5;
  prm.r = 0.5;
  prm.u = 0.7;
  prm.v = -0.3;
  for (FormKind kind : {FormKind::theta1, FormKind::theta2, FormKind::xi,
                        FormKind::bark, FormKind::lambda_uv}) {
    const cd a = quad_form(kind, tr, f1, f2, f3, f4, prm, quad, Exec::seq);
    const cd b = quad_form_reference(kind, tr, f1, f2, f3, f4, prm, quad);
    CHECK(std::abs(a - b) < 1e-10);
  }
}

TEST_CASE("theta2 is nonnegative on symmetric real inputs") {
  Rng rng(13, 3);
  const int n = 16;
  auto a = random_grid(n, rng, false), b = random_grid(n, rng, false);
  for (auto& z : a.v) z = cd(z.real(), 0.0);
  for (auto& z : b.v) z = cd(z.real(), 0.0);
  const DyadicGeometry geo;
  const Tree tr = random_convex_tree(geo, {0, 0, 0}, 5, 2, rng);
  FormParams prm;
  prm.lambda = 2.0;
  prm.r = 0.25;
  const cd v = quad_form(FormKind::theta2, tr, a, b, b, a, prm, FormQuad{8, 8}, Exec::par);
  CHECK(v.real() >= -1e-12);
  CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("telescoping residual shrinks under quadrature refinement") {
  Rng rng(17, 4);
  const int n = 16;
  const auto f1 = random_grid(n, rng, false), f2 = random_grid(n, rng, false),
             f3 = random_grid(n, rng, false), f4 = random_grid(n, rng, false);
  const DyadicGeometry geo;
  const Tree tr = random_convex_tree(geo, {0, 0, 0}, 6, 3, rng);
  const FormQuad coarse{16, 32};
  const TelescopeResult r1 =
      telescoping_residual(tr, f1, f2, f3, f4, 1.5, 0.5, coarse);
  const TelescopeResult r2 =
      telescoping_residual(tr, f1, f2, f3, f4, 1.5, 0.5, coarse.refined(2));
  CHECK(r1.scale > 0.0);
  CHECK(r1.residual / r1.scale < 0.1);
  CHECK(r2.residual / r2.scale < r1.residual / r1.scale);
}

TEST_CASE("form evaluation is identical under seq and par") {
  Rng rng(23, 5);
  const int n = 16;
  const auto f1 = random_grid(n, rng, false), f2 = random_grid(n, rng, false),
             f3 = random_grid(n, rng, false), f4 = random_grid(n, rng, false);
  const DyadicGeometry geo;
  const Tree tr = random_convex_tree(geo, {0, 0, 0}, 5, 2, rng);
  FormParams prm;
  prm.lambda = 1.0;
  prm.r = -0.5;
  const FormQuad quad{8, 8};
  const cd a = quad_form(FormKind::theta1, tr, f1, f2, f3, f4, prm, quad, Exec::seq);
  const cd b = quad_form(FormKind::theta1, tr, f1, f2, f3, f4, prm, quad, Exec::par);
  CHECK(a == b);
}

TEST_CASE("model operator agrees with its exact symbol") {
  Rng rng(41, 1);
  const int n = 32;
  const auto f1 = band_limited(n, 6, rng);
  const auto f2 = band_limited(n, 6, rng);
  ModelParams mp;
  mp.u = 0.8;
  mp.v = -0.4;
  const DyadicGeometry geo;
  const GridFunction2D direct = model_apply(f1, f2, mp, geo);
  const GridFunction2D via = aniso_apply(model_symbol(mp, geo), f1, f2);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < direct.v.size(); ++i) {
    num = std::max(num, std::abs(direct.v[i] - via.v[i]));
    den = std::max(den, std::abs(direct.v[i]));
  }
  CHECK(den > 0.0);
  // slack for roundoff across the ~n^4 spectral sums; a formula
  // mismatch would register as O(1) relative error
  CHECK(num < 1e-8 * den);

  const SymbolSpec spec = model_symbol(mp, geo);
  CHECK(std::abs(spec.eval(3.0, 0.0)) == 0.0);
  CHECK(std::abs(spec.eval(0.5, 0.0)) == 0.0);
}

TEST_CASE("tree selection partitions the rectangle collection") {
  Rng rng(43, 2);
  const int n = 16;
  GridFunction2D f1(n), f2(n), f3(n);
  for (auto& z : f1.v) z = cd(rng.uniform(), 0.0);
  for (auto& z : f2.v) z = cd(rng.uniform(), 0.0);
  for (auto& z : f3.v) z = cd(rng.uniform(), 0.0);
  for (int j = 0; j < 4; ++j)  // corner bump so levels vary spatially
    for (int i = 0; i < 4; ++i) f1.at(i, j) += cd(40.0, 0.0);
  const DyadicGeometry geo;
  std::vector<DyadicRectangle> q0;
  q0.push_back({0, 0, 0});
  for (int k = -1; k >= -2; --k) {
    const long long n1 = 1LL << (-geo.alpha * k), n2 = 1LL << (-geo.beta * k);
    for (long long i2 = 0; i2 < n2; ++i2)
      for (long long i1 = 0; i1 < n1; ++i1) q0.push_back({k, i1, i2});
  }
  const auto sel = tree_select(geo, q0, f1, f2, f3);
  size_t total = 0;
  std::vector<DyadicRectangle> all;
  for (const auto& st : sel) {
    total += st.tree.rects().size();
    for (const auto& r : st.tree.rects()) all.push_back(r);
  }
  CHECK(total == q0.size());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());

  // levels match the running envelope maximum recomputed by brute force
  for (const auto& st : sel)
    for (const auto& r : st.tree.rects()) {
      double s = 0.0;
      for (const auto& cand : q0)
        if (rect_contains(geo, cand, r)) {
          const auto c = rect_center(geo, cand);
          s = std::max(s, std::sqrt(theta_average(f1, c[0], c[1],
                                                  rect_width(geo, cand, 1),
                                                  rect_width(geo, cand, 2))));
        }
      CHECK(static_cast<int>(std::ceil(std::log2(s))) == st.levels[0]);
    }
}

TEST_CASE("fiber decomposition: reconstruction and level bounds") {
  Rng rng(47, 3);
  const int n = 32;
  GridFunction2D f(n);
  for (auto& z : f.v)
    z = cd(rng.uniform() * (rng.uniform() < 0.1 ? 10.0 : 0.3), 0.0);
  const double level = 1.0, p = 2.0;
  const FiberDecomposition dec = fiber_cz(f, level, p);

  double maxrec = 0.0;
  for (size_t i = 0; i < f.v.size(); ++i)
    maxrec = std::max(maxrec, std::abs(dec.g.v[i] + dec.b.v[i] - f.v[i]));
  CHECK(maxrec < 1e-14);

  double measure = 0.0;
  bool off_ok = true, parent_ok = true;
  for (int j = 0; j < n; ++j) {
    std::vector<char> sel(n, 0);
    for (const CellInterval iv : dec.rows[j]) {
      measure += static_cast<double>(iv.len) / n;
      for (int i = iv.begin; i < iv.begin + iv.len; ++i) sel[i] = 1;
      if (iv.len < n) {
        double s = 0.0;
        for (int i = iv.begin; i < iv.begin + iv.len; ++i)
          s += std::pow(std::abs(f.at(i, j)), p);
        if (std::pow(s / iv.len, 1.0 / p) > std::exp2(1.0 / p) * level * (1 + 1e-12))
          parent_ok = false;
      }
    }
    for (int i = 0; i < n; ++i)
      if (!sel[i] && std::abs(f.at(i, j)) > level + 1e-15) off_ok = false;
  }
  measure /= n;
  CHECK(off_ok);
  CHECK(parent_ok);
  double fp = 0.0;
  for (const auto& z : f.v) fp += std::pow(std::abs(z), p);
  fp /= static_cast<double>(n) * n;
  CHECK(measure <= fp / std::pow(level, p) + 1e-12);  // Chebyshev
}

TEST_CASE("periodized kernels: mass and cell sampling") {
  const Kernel1D g = kernel_gauss(0.25, 0.5);
  const int n = 64;
  const std::vector<double> cells = kernel_cells(g, n);
  REQUIRE(cells.size() == static_cast<size_t>(n));
  double mass = 0.0;
  for (double v : cells) mass += v / n;
  // int s^{-1} g((x-c)/s) dx = int g = 1 for the unit Gaussian
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  const Kernel1D d = kernel_dgauss(0.25, 0.5);
  const std::vector<double> dcells = kernel_cells(d, n);
  double dmass = 0.0;
  for (double v : dcells) dmass += v / n;
  CHECK(std::abs(dmass) < 1e-6);  // derivative integrates to zero
}

}  // TEST_SUITE
