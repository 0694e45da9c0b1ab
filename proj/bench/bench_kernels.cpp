// Timing comparison between the OpenMP kernels and their serial reference
// paths, with bitwise parity checked on every pair. The parallel schedule is
// static with fixed per-cell work, so seq and par must agree exactly; any
// mismatch here is a bug, not noise.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "tht/littlewood_paley.hpp"
#include "tht/paraproduct.hpp"
#include "tht/rng.hpp"
#include "tht/singular_ops.hpp"

using namespace tht;

namespace {

GridFunction2D random_grid(int n, uint64_t seed) {
  Rng rng(seed);
  GridFunction2D f(n);
  for (auto& z : f.v) z = rng.gaussian_complex();
  return f;
}

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count());
  }
  return best;
}

int mismatches = 0;

void row(const std::string& label, int n,
         const std::function<GridFunction2D(Exec)>& kernel) {
  GridFunction2D out_seq(2), out_par(2);
  const double t_seq = time_best_of(2, [&] { out_seq = kernel(Exec::seq); });
  const double t_par = time_best_of(2, [&] { out_par = kernel(Exec::par); });
  const bool same = out_seq.v == out_par.v;
  if (!same) ++mismatches;
  std::printf("%-28s n=%-4d seq %8.2f ms  par %8.2f ms  x%.2f  %s\n",
              label.c_str(), n, 1e3 * t_seq, 1e3 * t_par, t_seq / t_par,
              same ? "bitwise equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("kernel                       size      serial    parallel  "
              "speedup  parity\n");

  {
    const GridFunction2D f = random_grid(512, 1);
    row("shift_eval (off-grid t)", 512,
        [&](Exec e) { return shift_eval(f, 0.377, 1, e); });
    row("apply_band (delta_3)", 512,
        [&](Exec e) { return apply_band(f, {BandKind::delta, 3, 1}, e); });
    const auto w = [](double z) { return 1.0 / (1.0 + std::abs(z)); };
    row("apply_axis_multiplier", 512,
        [&](Exec e) { return apply_axis_multiplier(f, 2, w, e); });
  }

  {
    const GridFunction2D f1 = random_grid(128, 2), f2 = random_grid(128, 3);
    row("truncated_t", 128,
        [&](Exec e) { return truncated_t(f1, f2, {}, e); });
    row("maximal_op", 128,
        [&](Exec e) { return maximal_op(f1, f2, {}, e); });
    const SymbolSpec riesz = builtin_symbol("aniso-riesz");
    row("aniso_apply (riesz)", 128,
        [&](Exec e) { return aniso_apply(riesz, f1, f2, e); });
    const CutoffSpec cut = default_cutoff();
    const PhaseTable table = build_phase_table(cut, 128, 128);
    row("local_t_spectral", 128,
        [&](Exec e) { return local_t_spectral(f1, f2, cut, table, e); });
  }

  {
    const GridFunction2D f1 = random_grid(16, 4), f2 = random_grid(16, 5);
    const GridFunction2D f3 = random_grid(16, 6), f4 = random_grid(16, 7);
    const DyadicGeometry geo;
    Rng trng(8);
    const Tree tree = random_convex_tree(geo, {0, 0, 0}, 6, 3, trng);
    FormParams prm;
    prm.lambda = 1.5;
    prm.r = 0.5;
    const FormQuad quad{64, 32};
    cd v_seq, v_par;
    const double t_seq = time_best_of(2, [&] {
      v_seq = quad_form(FormKind::theta1, tree, f1, f2, f3, f4, prm, quad,
                        Exec::seq);
    });
    const double t_par = time_best_of(2, [&] {
      v_par = quad_form(FormKind::theta1, tree, f1, f2, f3, f4, prm, quad,
                        Exec::par);
    });
    const bool same = v_seq == v_par;
    if (!same) ++mismatches;
    std::printf("%-28s n=%-4d seq %8.2f ms  par %8.2f ms  x%.2f  %s\n",
                "quad_form (theta1)", 16, 1e3 * t_seq, 1e3 * t_par,
                t_seq / t_par, same ? "bitwise equal" : "MISMATCH");
  }

  if (mismatches) {
    std::printf("%d kernel(s) diverged between seq and par\n", mismatches);
    return 1;
  }
  std::printf("all kernels bitwise equal across seq/par\n");
  return 0;
}
