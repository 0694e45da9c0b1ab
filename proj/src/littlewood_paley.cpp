#include "tht/littlewood_paley.hpp"

#include <cmath>

#include "tht/fft.hpp"
#include "tht/windows.hpp"

namespace tht {

namespace {

const SampledWindow& plateau() {
  static const SampledWindow w = plateau_phi();
  return w;
}
const SampledWindow& annulus() {
  static const SampledWindow w = annulus_psi();
  return w;
}
const SampledWindow& annulus_wide() {
  static const SampledWindow w = psi_tilde();
  return w;
}

}  // namespace

double band_weight(const BandSpec& band, double zeta) {
  const double z = std::ldexp(zeta, -band.j);  // 2^-j zeta
  switch (band.kind) {
    case BandKind::delta:
      return annulus()(z);
    case BandKind::s_partial:
      return plateau()(z);
    case BandKind::delta_tilde:
      return annulus_wide()(z);
  }
  return 0.0;
}

GridFunction2D apply_axis_multiplier(const GridFunction2D& f, int axis,
                                     const std::function<double(double)>& w,
                                     Exec exec) {
  require(axis == 1 || axis == 2, "apply_axis_multiplier: axis must be 1 or 2");
  const int n = f.n;
  std::vector<double> weight(n);
  for (int b = 0; b < n; ++b) weight[b] = w(bin_to_freq(b, n));
  GridFunction2D out(n);
  if (axis == 1) {
    parallel_for(n, exec, [&](int j) {
      std::vector<cd> buf(n);
      const cd* src = f.v.data() + static_cast<size_t>(j) * n;
      std::copy(src, src + n, buf.begin());
      fft_pow2(buf.data(), n, false);
      for (int b = 0; b < n; ++b) buf[b] *= weight[b] / n;
      fft_pow2(buf.data(), n, true);
      std::copy(buf.begin(), buf.end(), out.v.data() + static_cast<size_t>(j) * n);
    });
  } else {
    parallel_for(n, exec, [&](int i) {
      std::vector<cd> buf(n);
      for (int j = 0; j < n; ++j) buf[j] = f.v[static_cast<size_t>(j) * n + i];
      fft_pow2(buf.data(), n, false);
      for (int b = 0; b < n; ++b) buf[b] *= weight[b] / n;
      fft_pow2(buf.data(), n, true);
      for (int j = 0; j < n; ++j) out.v[static_cast<size_t>(j) * n + i] = buf[j];
    });
  }
  return out;
}

GridFunction1D apply_multiplier(const GridFunction1D& g,
                                const std::function<double(double)>& w) {
  Spectrum1D s = forward(g);
  for (int b = 0; b < g.n; ++b) s.c[b] *= w(bin_to_freq(b, g.n));
  return inverse(s);
}

GridFunction2D apply_band(const GridFunction2D& f, const BandSpec& band, Exec exec) {
  return apply_axis_multiplier(
      f, band.axis, [&band](double zeta) { return band_weight(band, zeta); }, exec);
}

FreqClass classify_pair(int k1, int k2) {
  if (std::max(k1, k2) <= 0) return FreqClass::low;
  if (std::abs(k1 - k2) <= 100) return FreqClass::high;
  return FreqClass::mid;
}

}  // namespace tht
