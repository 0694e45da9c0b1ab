#include "tht/patterns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tht/fft.hpp"
#include "tht/littlewood_paley.hpp"
#include "tht/windows.hpp"

namespace tht {

namespace {

// Mean by halving recursion over a power-of-two block. Each level is an
// exact average of two sub-means, so a block of identical values returns
// that value bit for bit and w * mean recombines to the pairwise block sum.
cd block_mean_rec(const cd* v, size_t stride, size_t count) {
  if (count == 1) return *v;
  const size_t h = count / 2;
  return 0.5 * (block_mean_rec(v, stride, h) +
                block_mean_rec(v + stride * h, stride, h));
}

int containing_cell(double coord, int n) {
  long c = static_cast<long>(std::floor(coord * n));
  c %= n;
  if (c < 0) c += n;
  return static_cast<int>(c);
}

std::string dtos(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

BitmapSet::BitmapSet(int n_) : n(n_) {
  require(n_ >= 1, "BitmapSet: grid side must be >= 1");
  cells.assign(static_cast<size_t>(n_) * n_, 0);
}

double BitmapSet::density() const {
  size_t on = 0;
  for (std::uint8_t c : cells) on += (c != 0);
  return static_cast<double>(on) / (static_cast<double>(n) * n);
}

BitmapSet random_bitmap(int n, double density, Rng& rng) {
  require(density >= 0.0 && density <= 1.0,
          "random_bitmap: density must lie in [0,1]");
  BitmapSet e(n);
  for (size_t idx = 0; idx < e.cells.size(); ++idx)
    e.cells[idx] = rng.uniform() < density ? 1 : 0;
  return e;
}

GridFunction2D bitmap_to_grid(const BitmapSet& e) {
  GridFunction2D g(e.n);
  for (size_t idx = 0; idx < e.cells.size(); ++idx)
    g.v[idx] = cd(e.cells[idx] ? 1.0 : 0.0, 0.0);
  return g;
}

std::string bitmap_to_text(const BitmapSet& e) {
  std::string out = std::to_string(e.n);
  out.push_back('\n');
  for (int j = 0; j < e.n; ++j) {
    for (int i = 0; i < e.n; ++i) out.push_back(e.at(i, j) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

BitmapSet bitmap_from_text(const std::string& text) {
  std::istringstream in(text);
  long n = 0;
  require(static_cast<bool>(in >> n) && n >= 1 && n <= (1 << 16),
          "bitmap text: first token must be the grid side");
  BitmapSet e(static_cast<int>(n));
  for (int j = 0; j < e.n; ++j) {
    std::string row;
    require(static_cast<bool>(in >> row),
            "bitmap text: missing row " + std::to_string(j));
    require(row.size() == static_cast<size_t>(e.n),
            "bitmap text: row " + std::to_string(j) + " has wrong length");
    for (int i = 0; i < e.n; ++i) {
      require(row[i] == '0' || row[i] == '1',
              "bitmap text: row " + std::to_string(j) + " has a character "
              "other than 0/1");
      e.set(i, j, row[i] == '1');
    }
  }
  return e;
}

std::string bitmap_to_json(const BitmapSet& e) {
  nlohmann::ordered_json j;
  j["n"] = e.n;
  auto rows = nlohmann::ordered_json::array();
  for (int r = 0; r < e.n; ++r) {
    std::string row(static_cast<size_t>(e.n), '0');
    for (int i = 0; i < e.n; ++i)
      if (e.at(i, r)) row[static_cast<size_t>(i)] = '1';
    rows.push_back(row);
  }
  j["rows"] = std::move(rows);
  return j.dump(2);
}

BitmapSet bitmap_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  require(j.is_object() && j.contains("n") && j["n"].is_number_integer(),
          "bitmap json: missing integer field n");
  require(j.contains("rows") && j["rows"].is_array(),
          "bitmap json: missing array field rows");
  const long n = j["n"].get<long>();
  require(n >= 1 && n <= (1 << 16), "bitmap json: bad grid side n");
  require(j["rows"].size() == static_cast<size_t>(n),
          "bitmap json: rows must have exactly n entries");
  std::string flat = std::to_string(n);
  flat.push_back('\n');
  for (const auto& row : j["rows"]) {
    require(row.is_string(), "bitmap json: rows entries must be strings");
    flat += row.get<std::string>();
    flat.push_back('\n');
  }
  return bitmap_from_text(flat);
}

GridFunction2D martingale_avg(const GridFunction2D& f, int axis, int k) {
  const int n = f.n;
  require(axis == 1 || axis == 2, "martingale_avg: axis must be 1 or 2");
  require(k >= 0 && k <= ilog2(n), "martingale_avg: 2^k must be <= n");
  const int w = n >> k;
  const size_t stride = axis == 1 ? 1 : static_cast<size_t>(n);
  GridFunction2D out(n);
  for (int fib = 0; fib < n; ++fib) {
    const size_t base =
        axis == 1 ? static_cast<size_t>(fib) * n : static_cast<size_t>(fib);
    for (int blk = 0; blk < n; blk += w) {
      const cd m = block_mean_rec(f.v.data() + base + stride * blk, stride,
                                  static_cast<size_t>(w));
      for (int r = 0; r < w; ++r) out.v[base + stride * (blk + r)] = m;
    }
  }
  return out;
}

cd cell_mean(const GridFunction2D& f) {
  return block_mean_rec(f.v.data(), 1, f.v.size());
}

double count_integral(const GridFunction2D& f, int t_nodes) {
  const int n = f.n;
  require(t_nodes >= n, "count_integral: t_nodes must be >= n");
  std::vector<double> F(f.v.size());
  for (size_t idx = 0; idx < F.size(); ++idx) F[idx] = f.v[idx].real();
  std::vector<double> vals(static_cast<size_t>(t_nodes), 0.0);
  parallel_for(t_nodes, Exec::par, [&](int q) {
    const double t = static_cast<double>(q) / t_nodes;
    const int s1 = static_cast<int>(std::floor(t * n));
    const int s2 = static_cast<int>(std::floor(t * t * n));
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const int j2 = j + s2 >= n ? j + s2 - n : j + s2;
      const double* row = F.data() + static_cast<size_t>(j) * n;
      const double* up = F.data() + static_cast<size_t>(j2) * n;
      for (int i = 0; i < n; ++i) {
        const int i1 = i + s1 >= n ? i + s1 - n : i + s1;
        acc += row[i] * row[i1] * up[i];
      }
    }
    vals[static_cast<size_t>(q)] = acc / (static_cast<double>(n) * n);
  });
  double total = 0.0;
  for (double v : vals) total += v;
  return total / t_nodes;
}

LowerBoundResult lower_bound_check(const GridFunction2D& f, int k, int l) {
  const int n = f.n;
  bool in_range = true;
  for (const cd& z : f.v)
    in_range = in_range && z.imag() == 0.0 && z.real() >= 0.0 && z.real() <= 1.0;
  require(in_range, "lower_bound_check: f must be real with values in [0,1]");
  const GridFunction2D e1 = martingale_avg(f, 1, k);
  const GridFunction2D e2 = martingale_avg(f, 2, l);
  GridFunction2D prod(n);
  for (size_t idx = 0; idx < prod.v.size(); ++idx)
    prod.v[idx] = cd(f.v[idx].real() * e1.v[idx].real() * e2.v[idx].real(), 0.0);
  LowerBoundResult r;
  r.lhs = cell_mean(prod).real();
  const double mean = cell_mean(f).real();
  r.rhs = mean * mean * mean * mean;
  r.ok = r.lhs >= r.rhs - 1e-12;
  return r;
}

std::optional<PatternTriple> pattern_search(const BitmapSet& e, double t_min) {
  const int n = e.n;
  require(t_min >= 1.0 / n, "pattern_search: t_min must be >= 1/n");
  int m_min = static_cast<int>(std::ceil(t_min * n));
  if (m_min < 1) m_min = 1;
  for (int m = n - 1; m >= m_min; --m) {
    const int s1 = m;
    const int s2 = (m * m / n) % n;
    for (int j = 0; j < n; ++j) {
      const int j2 = j + s2 >= n ? j + s2 - n : j + s2;
      for (int i = 0; i < n; ++i) {
        const int i1 = i + s1 >= n ? i + s1 - n : i + s1;
        if (e.at(i, j) && e.at(i1, j) && e.at(i, j2)) {
          PatternTriple hit;
          hit.x = static_cast<double>(i) / n;
          hit.y = static_cast<double>(j) / n;
          hit.t = static_cast<double>(m) / n;
          const bool verified =
              e.at(containing_cell(hit.x, n), containing_cell(hit.y, n)) &&
              e.at(containing_cell(hit.x + hit.t, n),
                   containing_cell(hit.y, n)) &&
              e.at(containing_cell(hit.x, n),
                   containing_cell(hit.y + hit.t * hit.t, n));
          if (!verified)
            throw std::logic_error(
                "pattern_search: scan hit failed bitmap re-verification");
          return hit;
        }
      }
    }
  }
  return std::nullopt;
}

double vartheta_hat(double u) {
  static const SampledWindow profile = vartheta_window();
  const double au = std::abs(u);
  // >= 32 Simpson panels per oscillation of cos(2 pi u x) across [-2,2].
  int panels = 512 + 128 * static_cast<int>(std::ceil(4.0 * au));
  if (panels > (1 << 17)) panels = 1 << 17;
  const double lo = -2.0, hi = 2.0;
  const double h = (hi - lo) / panels;
  auto g = [&](double x) { return profile(x) * std::cos(kTwoPi * u * x); };
  double acc = g(lo) + g(hi);
  for (int i = 1; i < panels; ++i)
    acc += g(lo + h * i) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

const char* branch_name(DichotomyBranch b) {
  switch (b) {
    case DichotomyBranch::count_large: return "count_large";
    case DichotomyBranch::increment_large: return "increment_large";
    default: return "neither";
  }
}

namespace {

GridFunction2D mollify(const GridFunction2D& f, int axis, int k) {
  return apply_axis_multiplier(f, axis, [k](double zeta) {
    return vartheta_hat(std::ldexp(zeta, -k));
  });
}

GridFunction2D grid_sub(const GridFunction2D& a, const GridFunction2D& b) {
  GridFunction2D out(a.n);
  for (size_t idx = 0; idx < out.v.size(); ++idx)
    out.v[idx] = a.v[idx] - b.v[idx];
  return out;
}

// Scale ladder shared by the run and its energy constant: pairs
// (k_l, m_factor * k_l) while the finer scale still fits the grid.
std::vector<std::pair<int, int>> scale_ladder(int n, int k0, int m_factor,
                                              int max_iter, bool* truncated) {
  require(k0 >= 1, "dichotomy: k0 must be >= 1");
  require(m_factor >= 2, "dichotomy: m_factor must be >= 2");
  require(max_iter >= 1, "dichotomy: max_iter must be >= 1");
  const int kmax = ilog2(n);
  require(k0 <= kmax, "dichotomy: 2^k0 must be <= n");
  std::vector<std::pair<int, int>> pairs;
  if (truncated) *truncated = false;
  long k = k0;
  for (int l = 0; l < max_iter; ++l) {
    const long knext = k * m_factor;
    if (knext > kmax) {
      if (truncated) *truncated = true;
      break;
    }
    pairs.emplace_back(static_cast<int>(k), static_cast<int>(knext));
    k = knext;
  }
  return pairs;
}

}  // namespace

DichotomyResult dichotomy_run(const GridFunction2D& f, int k0, int m_factor,
                              int max_iter, const DichotomyThresholds& th) {
  require(th.eps > 0.0 && th.c > 0.0,
          "dichotomy: thresholds need eps > 0 and c > 0");
  DichotomyResult out;
  const auto ladder =
      scale_ladder(f.n, k0, m_factor, max_iter, &out.truncated);
  if (ladder.empty()) return out;
  const double count = count_integral(f, 2 * f.n);
  const double c_eps4 = th.c * th.eps * th.eps * th.eps * th.eps;
  GridFunction2D cur1 = mollify(f, 1, ladder.front().first);
  GridFunction2D cur2 = mollify(f, 2, ladder.front().first);
  for (size_t l = 0; l < ladder.size(); ++l) {
    const auto [k, knext] = ladder[l];
    GridFunction2D nxt1 = mollify(f, 1, knext);
    GridFunction2D nxt2 = mollify(f, 2, knext);
    DichotomyRecord rec;
    rec.l = static_cast<int>(l);
    rec.k_l = k;
    rec.count_I = count;
    rec.increment = norm_lp(grid_sub(nxt1, cur1), 2.0) +
                    norm_lp(grid_sub(nxt2, cur2), 2.0);
    const double count_thr = std::ldexp(c_eps4, -(knext + 10));
    rec.branch = rec.count_I > count_thr ? DichotomyBranch::count_large
                 : rec.increment > c_eps4 ? DichotomyBranch::increment_large
                                          : DichotomyBranch::neither;
    out.records.push_back(rec);
    cur1 = std::move(nxt1);
    cur2 = std::move(nxt2);
  }
  return out;
}

double dichotomy_energy_constant(int n, int k0, int m_factor, int max_iter) {
  require(is_pow2(n), "dichotomy: n must be a power of two");
  const auto ladder = scale_ladder(n, k0, m_factor, max_iter, nullptr);
  double worst = 0.0;
  for (int b = 0; b < n; ++b) {
    const double zeta = bin_to_freq(b, n);
    double acc = 0.0;
    for (const auto& [k, knext] : ladder) {
      const double d = vartheta_hat(std::ldexp(zeta, -knext)) -
                       vartheta_hat(std::ldexp(zeta, -k));
      acc += d * d;
    }
    worst = std::max(worst, acc);
  }
  return 4.0 * worst;
}

std::string dichotomy_to_csv(const DichotomyResult& run) {
  std::string out = "l,k_l,count,increment,branch\n";
  for (const DichotomyRecord& rec : run.records) {
    out += std::to_string(rec.l);
    out.push_back(',');
    out += std::to_string(rec.k_l);
    out.push_back(',');
    out += dtos(rec.count_I);
    out.push_back(',');
    out += dtos(rec.increment);
    out.push_back(',');
    out += branch_name(rec.branch);
    out.push_back('\n');
  }
  return out;
}

}  // namespace tht
