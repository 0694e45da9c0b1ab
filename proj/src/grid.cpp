#include "tht/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "tht/fft.hpp"
#include "json.hpp"

namespace tht {

namespace {

void check_n(int n, const char* who) {
  require(is_pow2(n), std::string(who) + ": n must be a positive power of two");
}

// Shortest round-trip representation of a double.
std::string dtos(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

GridFunction2D::GridFunction2D(int n_) : n(n_) {
  check_n(n_, "GridFunction2D");
  v.assign(static_cast<size_t>(n) * n, cd(0.0, 0.0));
}

GridFunction2D GridFunction2D::sample(int n, const std::function<cd(double, double)>& f) {
  GridFunction2D g(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      g.at(i, j) = f(static_cast<double>(i) / n, static_cast<double>(j) / n);
  return g;
}

GridFunction1D::GridFunction1D(int n_) : n(n_) {
  check_n(n_, "GridFunction1D");
  v.assign(n, cd(0.0, 0.0));
}

GridFunction1D GridFunction1D::sample(int n, const std::function<cd(double)>& f) {
  GridFunction1D g(n);
  for (int i = 0; i < n; ++i) g.v[i] = f(static_cast<double>(i) / n);
  return g;
}

Spectrum2D::Spectrum2D(int n_) : n(n_) {
  check_n(n_, "Spectrum2D");
  c.assign(static_cast<size_t>(n) * n, cd(0.0, 0.0));
}

cd& Spectrum2D::at_freq(int xi1, int xi2) {
  return at_bin(freq_to_bin(xi1, n), freq_to_bin(xi2, n));
}
const cd& Spectrum2D::at_freq(int xi1, int xi2) const {
  return at_bin(freq_to_bin(xi1, n), freq_to_bin(xi2, n));
}

Spectrum1D::Spectrum1D(int n_) : n(n_) {
  check_n(n_, "Spectrum1D");
  c.assign(n, cd(0.0, 0.0));
}

cd& Spectrum1D::at_freq(int xi) { return c[freq_to_bin(xi, n)]; }
const cd& Spectrum1D::at_freq(int xi) const { return c[freq_to_bin(xi, n)]; }

Spectrum2D forward(const GridFunction2D& f) {
  check_n(f.n, "forward");
  const int n = f.n;
  Spectrum2D s(n);
  s.c = f.v;
  // rows (axis 1), contiguous
  for (int j = 0; j < n; ++j) fft_pow2(s.c.data() + static_cast<size_t>(j) * n, n, false);
  // columns (axis 2), strided via scratch
  std::vector<cd> col(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) col[j] = s.c[static_cast<size_t>(j) * n + i];
    fft_pow2(col.data(), n, false);
    for (int j = 0; j < n; ++j) s.c[static_cast<size_t>(j) * n + i] = col[j];
  }
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& z : s.c) z *= scale;
  return s;
}

GridFunction2D inverse(const Spectrum2D& s) {
  check_n(s.n, "inverse");
  const int n = s.n;
  GridFunction2D f(n);
  f.v = s.c;
  for (int j = 0; j < n; ++j) fft_pow2(f.v.data() + static_cast<size_t>(j) * n, n, true);
  std::vector<cd> col(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) col[j] = f.v[static_cast<size_t>(j) * n + i];
    fft_pow2(col.data(), n, true);
    for (int j = 0; j < n; ++j) f.v[static_cast<size_t>(j) * n + i] = col[j];
  }
  return f;
}

Spectrum1D forward(const GridFunction1D& f) {
  check_n(f.n, "forward1d");
  Spectrum1D s(f.n);
  s.c = f.v;
  fft_pow2(s.c, false);
  const double scale = 1.0 / f.n;
  for (auto& z : s.c) z *= scale;
  return s;
}

GridFunction1D inverse(const Spectrum1D& s) {
  check_n(s.n, "inverse1d");
  GridFunction1D f(s.n);
  f.v = s.c;
  fft_pow2(f.v, true);
  return f;
}

namespace {

// Phase table exp(2 pi i freq(b) t) for one transform length.
std::vector<cd> phase_table(int n, double t) {
  std::vector<cd> ph(n);
  for (int b = 0; b < n; ++b) {
    const double ang = kTwoPi * bin_to_freq(b, n) * t;
    ph[b] = cd(std::cos(ang), std::sin(ang));
  }
  return ph;
}

}  // namespace

GridFunction2D shift_eval(const GridFunction2D& f, double t, int axis, Exec exec) {
  require(axis == 1 || axis == 2, "shift_eval: axis must be 1 or 2");
  AxisSpectrum sp = axis_spectrum(f, axis);
  GridFunction2D out(f.n);
  shift_from_axis_spectrum(sp, t, out, exec);
  return out;
}

GridFunction1D shift_eval(const GridFunction1D& g, double t) {
  Spectrum1D s = forward(g);
  const std::vector<cd> ph = phase_table(g.n, t);
  for (int b = 0; b < g.n; ++b) s.c[b] *= ph[b];
  return inverse(s);
}

GridFunction2D diff_fn(const GridFunction2D& f, double s, int axis) {
  GridFunction2D out = shift_eval(f, s, axis);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] *= std::conj(f.v[k]);
  return out;
}

GridFunction1D diff_fn(const GridFunction1D& g, double s) {
  GridFunction1D out = shift_eval(g, s);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] *= std::conj(g.v[k]);
  return out;
}

namespace {

double norm_lp_impl(const std::vector<cd>& v, double cells, double p) {
  require(p >= 1.0, "norm_lp: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const cd& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (const cd& z : v) acc += std::norm(z);
  } else {
    for (const cd& z : v) acc += std::pow(std::abs(z), p);
  }
  return std::pow(acc / cells, 1.0 / p);
}

}  // namespace

double norm_lp(const GridFunction2D& f, double p) {
  return norm_lp_impl(f.v, static_cast<double>(f.n) * f.n, p);
}

double norm_lp(const GridFunction1D& f, double p) {
  return norm_lp_impl(f.v, static_cast<double>(f.n), p);
}

AxisSpectrum axis_spectrum(const GridFunction2D& f, int axis) {
  require(axis == 1 || axis == 2, "axis_spectrum: axis must be 1 or 2");
  check_n(f.n, "axis_spectrum");
  const int n = f.n;
  AxisSpectrum sp;
  sp.n = n;
  sp.axis = axis;
  sp.a.resize(static_cast<size_t>(n) * n);
  const double scale = 1.0 / n;
  if (axis == 1) {
    for (int j = 0; j < n; ++j) {
      cd* row = sp.a.data() + static_cast<size_t>(j) * n;
      const cd* src = f.v.data() + static_cast<size_t>(j) * n;
      std::copy(src, src + n, row);
      fft_pow2(row, n, false);
      for (int b = 0; b < n; ++b) row[b] *= scale;
    }
  } else {
    std::vector<cd> col(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) col[j] = f.v[static_cast<size_t>(j) * n + i];
      fft_pow2(col.data(), n, false);
      cd* dst = sp.a.data() + static_cast<size_t>(i) * n;
      for (int b = 0; b < n; ++b) dst[b] = col[b] * scale;
    }
  }
  return sp;
}

void shift_from_axis_spectrum(const AxisSpectrum& sp, double t, GridFunction2D& out,
                              Exec exec) {
  const int n = sp.n;
  require(out.n == n, "shift_from_axis_spectrum: size mismatch");
  const std::vector<cd> ph = phase_table(n, t);
  if (sp.axis == 1) {
    // Each row is an independent inverse transform: safe to parallelize.
    parallel_for(n, exec, [&](int j) {
      std::vector<cd> buf(n);
      const cd* src = sp.a.data() + static_cast<size_t>(j) * n;
      for (int b = 0; b < n; ++b) buf[b] = src[b] * ph[b];
      fft_pow2(buf.data(), n, true);
      cd* dst = out.v.data() + static_cast<size_t>(j) * n;
      std::copy(buf.begin(), buf.end(), dst);
    });
  } else {
    parallel_for(n, exec, [&](int i) {
      std::vector<cd> buf(n);
      const cd* src = sp.a.data() + static_cast<size_t>(i) * n;
      for (int b = 0; b < n; ++b) buf[b] = src[b] * ph[b];
      fft_pow2(buf.data(), n, true);
      for (int j = 0; j < n; ++j) out.v[static_cast<size_t>(j) * n + i] = buf[j];
    });
  }
}

std::string grid2d_to_json(const GridFunction2D& f) {
  nlohmann::json j;
  j["n"] = f.n;
  std::vector<double> re(f.v.size()), im(f.v.size());
  for (size_t k = 0; k < f.v.size(); ++k) {
    re[k] = f.v[k].real();
    im[k] = f.v[k].imag();
  }
  j["re"] = re;
  j["im"] = im;
  return j.dump();
}

GridFunction2D grid2d_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  require(j.contains("n") && j.contains("re") && j.contains("im"),
          "grid2d_from_json: need keys n, re, im");
  const int n = j["n"].get<int>();
  check_n(n, "grid2d_from_json");
  const auto re = j["re"].get<std::vector<double>>();
  const auto im = j["im"].get<std::vector<double>>();
  const size_t cells = static_cast<size_t>(n) * n;
  require(re.size() == cells && im.size() == cells,
          "grid2d_from_json: re/im length must equal n*n");
  GridFunction2D f(n);
  for (size_t k = 0; k < cells; ++k) f.v[k] = cd(re[k], im[k]);
  return f;
}

std::string grid2d_to_csv(const GridFunction2D& f) {
  std::string out = "i,j,re,im\n";
  for (int j = 0; j < f.n; ++j)
    for (int i = 0; i < f.n; ++i) {
      const cd z = f.at(i, j);
      out += std::to_string(i);
      out += ',';
      out += std::to_string(j);
      out += ',';
      out += dtos(z.real());
      out += ',';
      out += dtos(z.imag());
      out += '\n';
    }
  return out;
}

GridFunction2D grid2d_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  struct Row {
    int i, j;
    double re, im;
  };
  std::vector<Row> rows;
  int max_idx = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("i,j", 0) == 0) continue;  // header
    Row r{};
    const char* p = line.c_str();
    const char* end = p + line.size();
    auto eat_int = [&](int& dst) {
      auto res = std::from_chars(p, end, dst);
      require(res.ec == std::errc(), "grid2d_from_csv: bad integer field");
      p = res.ptr;
      require(p < end && *p == ',', "grid2d_from_csv: expected comma");
      ++p;
    };
    eat_int(r.i);
    eat_int(r.j);
    auto res = std::from_chars(p, end, r.re);
    require(res.ec == std::errc(), "grid2d_from_csv: bad real field");
    p = res.ptr;
    require(p < end && *p == ',', "grid2d_from_csv: expected comma");
    ++p;
    res = std::from_chars(p, end, r.im);
    require(res.ec == std::errc(), "grid2d_from_csv: bad imag field");
    rows.push_back(r);
    max_idx = std::max({max_idx, r.i, r.j});
  }
  const int n = max_idx + 1;
  check_n(n, "grid2d_from_csv");
  require(rows.size() == static_cast<size_t>(n) * n,
          "grid2d_from_csv: expected n*n data rows");
  GridFunction2D f(n);
  std::vector<char> seen(rows.size(), 0);
  for (const Row& r : rows) {
    require(r.i >= 0 && r.i < n && r.j >= 0 && r.j < n, "grid2d_from_csv: index range");
    const size_t k = static_cast<size_t>(r.j) * n + r.i;
    require(!seen[k], "grid2d_from_csv: duplicate cell");
    seen[k] = 1;
    f.v[k] = cd(r.re, r.im);
  }
  return f;
}

}  // namespace tht
