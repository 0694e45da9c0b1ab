#pragma once

#include <vector>

#include "tht/common.hpp"

namespace tht {

// In-place radix-2 FFT, power-of-two length.
//   invert = false: a[k] <- sum_j a[j] exp(-2 pi i j k / n)
//   invert = true : a[j] <- sum_k a[k] exp(+2 pi i j k / n)
// Both directions are unnormalized; callers own the 1/n factors.
void fft_pow2(cd* a, int n, bool invert);

inline void fft_pow2(std::vector<cd>& a, bool invert) {
  fft_pow2(a.data(), static_cast<int>(a.size()), invert);
}

// Signed frequency of bin m for transform length n: [-n/2, n/2).
inline int bin_to_freq(int m, int n) { return m < n / 2 ? m : m - n; }
inline int freq_to_bin(int xi, int n) { return xi >= 0 ? xi : xi + n; }

}  // namespace tht
