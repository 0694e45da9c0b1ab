#pragma once

#include <functional>

#include "tht/grid.hpp"

namespace tht {

// One-coordinate frequency band operators. All multipliers act on a single
// axis: delta is the annulus psi(2^-j zeta), s_partial the plateau
// phi(2^-j zeta), delta_tilde the widened annulus equal to 1 on the delta
// band. Telescoping S_b - S_a = sum_{j=a+1}^b Delta_j holds pointwise by
// construction.
enum class BandKind { delta, s_partial, delta_tilde };

struct BandSpec {
  BandKind kind = BandKind::delta;
  int j = 0;     // dyadic scale: multiplier evaluated at 2^-j zeta
  int axis = 1;  // 1 or 2
};

// Scalar multiplier value of the band at integer frequency zeta.
double band_weight(const BandSpec& band, double zeta);

GridFunction2D apply_band(const GridFunction2D& f, const BandSpec& band,
                          Exec exec = Exec::par);

// Generic one-axis real multiplier (shared plumbing for band and model
// operators).
GridFunction2D apply_axis_multiplier(const GridFunction2D& f, int axis,
                                     const std::function<double(double)>& w,
                                     Exec exec = Exec::par);
GridFunction1D apply_multiplier(const GridFunction1D& g,
                                const std::function<double(double)>& w);

// Frequency-pair classes for the paired pieces T^(k): low when
// max(k1,k2) <= 0, high when the components are within 100 of each other,
// mid otherwise. Partition of Z^2.
enum class FreqClass { low, mid, high };

FreqClass classify_pair(int k1, int k2);

}  // namespace tht
