#include "tht/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace tht {

namespace {

struct Tables {
  std::vector<int> rev;       // bit-reversal permutation
  std::vector<cd> w_forward;  // twiddles for all stages, stage-major
  std::vector<cd> w_inverse;
};

// Twiddle cache keyed by transform length. Shared across threads; built once
// under a mutex and read-only afterwards.
const Tables& tables_for(int n) {
  static std::mutex mu;
  static std::map<int, Tables> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Tables t;
  t.rev.resize(n);
  const int lg = ilog2(n);
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < lg; ++b)
      if (i & (1 << b)) r |= 1 << (lg - 1 - b);
    t.rev[i] = r;
  }
  // Stage with half-size h stores h twiddles starting at offset h-1.
  t.w_forward.resize(n);
  t.w_inverse.resize(n);
  for (int h = 1; h < n; h <<= 1) {
    for (int k = 0; k < h; ++k) {
      const double ang = kPi * k / h;
      t.w_forward[h - 1 + k] = cd(std::cos(ang), -std::sin(ang));
      t.w_inverse[h - 1 + k] = cd(std::cos(ang), std::sin(ang));
    }
  }
  return cache.emplace(n, std::move(t)).first->second;
}

}  // namespace

void fft_pow2(cd* a, int n, bool invert) {
  require(is_pow2(n), "fft: length must be a power of two");
  if (n == 1) return;
  const Tables& t = tables_for(n);
  for (int i = 0; i < n; ++i) {
    const int r = t.rev[i];
    if (i < r) std::swap(a[i], a[r]);
  }
  const cd* w = invert ? t.w_inverse.data() : t.w_forward.data();
  for (int h = 1; h < n; h <<= 1) {
    const cd* wh = w + (h - 1);
    for (int i = 0; i < n; i += h << 1) {
      for (int k = 0; k < h; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + h] * wh[k];
        a[i + k] = u + v;
        a[i + k + h] = u - v;
      }
    }
  }
}

}  // namespace tht
