#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tht/common.hpp"
#include "tht/parallel.hpp"

namespace tht {

// Complex samples on the periodic unit torus [0,1)^2 at grid points
// (i/n, j/n). Storage index j*n + i (first coordinate fastest). Axis 1 is
// the first coordinate, axis 2 the second; n must be a power of two.
struct GridFunction2D {
  int n = 0;
  std::vector<cd> v;

  GridFunction2D() = default;
  explicit GridFunction2D(int n_);

  cd& at(int i, int j) { return v[static_cast<size_t>(j) * n + i]; }
  const cd& at(int i, int j) const { return v[static_cast<size_t>(j) * n + i]; }

  // Fill from a function of the sample point (x, y) in [0,1)^2.
  static GridFunction2D sample(int n, const std::function<cd(double, double)>& f);
};

struct GridFunction1D {
  int n = 0;
  std::vector<cd> v;

  GridFunction1D() = default;
  explicit GridFunction1D(int n_);

  static GridFunction1D sample(int n, const std::function<cd(double)>& f);
};

// Fourier coefficients on the symmetric frequency window [-n/2, n/2):
// f(x, y) = sum_xi coeffs(xi) exp(2 pi i (xi1 x + xi2 y)). Stored in bin
// order (bin b holds frequency b for b < n/2, else b - n), index b2*n + b1.
struct Spectrum2D {
  int n = 0;
  std::vector<cd> c;

  Spectrum2D() = default;
  explicit Spectrum2D(int n_);

  cd& at_bin(int b1, int b2) { return c[static_cast<size_t>(b2) * n + b1]; }
  const cd& at_bin(int b1, int b2) const { return c[static_cast<size_t>(b2) * n + b1]; }
  cd& at_freq(int xi1, int xi2);
  const cd& at_freq(int xi1, int xi2) const;
};

struct Spectrum1D {
  int n = 0;
  std::vector<cd> c;

  Spectrum1D() = default;
  explicit Spectrum1D(int n_);

  cd& at_freq(int xi);
  const cd& at_freq(int xi) const;
};

// Forward transform carries the 1/n^2 (1/n in 1D) normalization, so the
// coefficients are honest Fourier coefficients and Parseval reads
// sum |coeffs|^2 = (1/n^2) sum |values|^2.
Spectrum2D forward(const GridFunction2D& f);
GridFunction2D inverse(const Spectrum2D& s);
Spectrum1D forward(const GridFunction1D& f);
GridFunction1D inverse(const Spectrum1D& s);

// Exact trigonometric evaluation of f(. + t e_axis); reduces to a circular
// roll when t is a multiple of 1/n. axis is 1 or 2.
GridFunction2D shift_eval(const GridFunction2D& f, double t, int axis,
                          Exec exec = Exec::par);
GridFunction1D shift_eval(const GridFunction1D& g, double t);

// Difference function along an axis: f(. + s e_axis) * conj(f).
GridFunction2D diff_fn(const GridFunction2D& f, double s, int axis);
GridFunction1D diff_fn(const GridFunction1D& g, double s);

// Normalized lattice L^p norm ((1/n^2) sum |f|^p)^(1/p); p may be
// infinity. p < 1 is rejected.
double norm_lp(const GridFunction2D& f, double p);
double norm_lp(const GridFunction1D& f, double p);

// One-axis spectrum cache: the transform along a single axis with the other
// coordinate left in space. Lets operator quadratures pay one forward pass
// and then one inverse pass per t-node.
struct AxisSpectrum {
  int n = 0;
  int axis = 0;
  // axis == 1: index j*n + b  holds a(freq(b), y_j)
  // axis == 2: index i*n + b  holds b(x_i, freq(b))
  std::vector<cd> a;
};

AxisSpectrum axis_spectrum(const GridFunction2D& f, int axis);
// out = f shifted by t along spec.axis, reconstructed from the cache.
void shift_from_axis_spectrum(const AxisSpectrum& spec, double t,
                              GridFunction2D& out, Exec exec = Exec::par);

// Serialization. JSON object {"n": n, "re": [...], "im": [...]} and flat CSV
// "i,j,re,im"; both round-trip bit-exactly (shortest-repr doubles).
std::string grid2d_to_json(const GridFunction2D& f);
GridFunction2D grid2d_from_json(const std::string& text);
std::string grid2d_to_csv(const GridFunction2D& f);
GridFunction2D grid2d_from_csv(const std::string& text);

}  // namespace tht
