#include "obslab/thickness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace obslab {

std::size_t SetSample::count() const {
  std::size_t c = 0;
  for (auto b : mask) c += b;
  return c;
}

namespace {
// Snap a coordinate to the nearest cell boundary index in [0, N].
int snap_to_cell(const GridSpec& g, double coord) {
  double rel = (coord + g.half_length) / g.cell();
  int idx = static_cast<int>(std::lround(rel));
  return std::clamp(idx, 0, g.points);
}
}  // namespace

SetSample rasterize(const GridSpec& grid, const std::vector<Box>& boxes) {
  SetSample s;
  s.mask.assign(grid.size(), 0);
  std::array<int, 3> j{};
  for (const auto& box : boxes) {
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < grid.dim; ++a) {
      if (box.lo[a] < -grid.half_length - 1e-12 ||
          box.hi[a] > grid.half_length + 1e-12 || box.lo[a] > box.hi[a])
        throw usage_error("rasterize: box must lie inside the torus");
      lo[a] = snap_to_cell(grid, box.lo[a]);
      hi[a] = snap_to_cell(grid, box.hi[a]);
    }
    for (std::size_t i = 0; i < s.mask.size(); ++i) {
      grid.decode(i, j);
      bool inside = true;
      for (int a = 0; a < grid.dim; ++a)
        if (j[a] < lo[a] || j[a] >= hi[a]) inside = false;
      if (inside) s.mask[i] = 1;
    }
  }
  return s;
}

SetSample full_set(const GridSpec& grid) {
  SetSample s;
  s.mask.assign(grid.size(), 1);
  return s;
}

SetSample empty_set(const GridSpec& grid) {
  SetSample s;
  s.mask.assign(grid.size(), 0);
  return s;
}

int SetFamily::sample_index(double t) const {
  if (samples.empty()) throw usage_error("SetFamily: no samples");
  int i = static_cast<int>(std::floor(t / horizon * samples.size()));
  return std::clamp<int>(i, 0, static_cast<int>(samples.size()) - 1);
}

const SetSample& SetFamily::at_time(double t) const {
  return samples[sample_index(t)];
}

namespace {

// Per-anchor window cell counts with wrap-around, via prefix sums over a
// doubled tile.  Returns a vector indexed by flat anchor position.
std::vector<std::int64_t> window_counts(const GridSpec& g, const SetSample& set,
                                        const std::array<int, 3>& w) {
  const int n = g.points;
  if (g.dim == 1) {
    std::vector<std::int64_t> pre(2 * n + 1, 0);
    for (int i = 0; i < 2 * n; ++i) pre[i + 1] = pre[i] + set.mask[i % n];
    std::vector<std::int64_t> out(n);
    for (int x = 0; x < n; ++x) out[x] = pre[x + w[0]] - pre[x];
    return out;
  }
  if (g.dim == 2) {
    const int m = 2 * n;
    std::vector<std::int64_t> pre((m + 1) * (m + 1), 0);
    auto P = [&](int r, int c) -> std::int64_t& { return pre[r * (m + 1) + c]; };
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        P(r + 1, c + 1) = P(r, c + 1) + P(r + 1, c) - P(r, c) +
                          set.mask[(r % n) * n + (c % n)];
    std::vector<std::int64_t> out(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        out[r * n + c] = P(r + w[0], c + w[1]) - P(r, c + w[1]) -
                         P(r + w[0], c) + P(r, c);
    return out;
  }
  // dim == 3: direct sum with wrap (grids used in 3d are small).
  std::vector<std::int64_t> out(g.size(), 0);
  std::array<int, 3> j{};
  for (std::size_t anchor = 0; anchor < g.size(); ++anchor) {
    g.decode(anchor, j);
    std::int64_t c = 0;
    for (int a = 0; a < w[0]; ++a)
      for (int b = 0; b < w[1]; ++b)
        for (int d = 0; d < w[2]; ++d) {
          int x = (j[0] + a) % n, y = (j[1] + b) % n, z = (j[2] + d) % n;
          c += set.mask[(static_cast<std::size_t>(x) * n + y) * n + z];
        }
    out[anchor] = c;
  }
  return out;
}

std::array<int, 3> snap_window(const GridSpec& g, const std::vector<double>& L) {
  if (static_cast<int>(L.size()) != g.dim)
    throw usage_error("window lengths must match the grid dimension");
  std::array<int, 3> w{1, 1, 1};
  for (int a = 0; a < g.dim; ++a) {
    if (!(L[a] > 0.0) || L[a] > 2.0 * g.half_length + 1e-12)
      throw usage_error("window length must lie in (0, 2X]");
    w[a] = std::clamp(static_cast<int>(std::lround(L[a] / g.cell())), 1, g.points);
  }
  return w;
}

std::int64_t window_cells(const GridSpec& g, const std::array<int, 3>& w) {
  std::int64_t c = 1;
  for (int a = 0; a < g.dim; ++a) c *= w[a];
  return c;
}

std::vector<int> decode_anchor(const GridSpec& g, std::size_t flat) {
  std::array<int, 3> j{};
  g.decode(flat, j);
  return std::vector<int>(j.begin(), j.begin() + g.dim);
}

}  // namespace

ThicknessProfile thickness_profile(const GridSpec& grid, const SetSample& set,
                                   const std::vector<double>& L) {
  auto w = snap_window(grid, L);
  auto counts = window_counts(grid, set, w);
  const double denom = static_cast<double>(window_cells(grid, w));
  ThicknessProfile out;
  out.rho = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double v = counts[i] / denom;
    if (v < out.rho) {
      out.rho = v;
      arg = i;
    }
  }
  out.worst_anchor = decode_anchor(grid, arg);
  return out;
}

ThicknessDecision is_uniformly_thick(const SetFamily& fam,
                                     const std::vector<double>& L, double rho) {
  ThicknessDecision d;
  for (std::size_t j = 0; j < fam.samples.size(); ++j) {
    auto prof = thickness_profile(fam.grid, fam.samples[j], L);
    if (prof.rho < rho) {
      d.holds = false;
      d.witness = ThicknessWitness{static_cast<int>(j), prof.worst_anchor, prof.rho};
      return d;
    }
  }
  return d;
}

ThicknessDecision is_mean_thick(const SetFamily& fam, const std::vector<double>& L,
                                double rho) {
  auto w = snap_window(fam.grid, L);
  const double denom = static_cast<double>(window_cells(fam.grid, w)) *
                       static_cast<double>(fam.samples.size());
  std::vector<double> avg(fam.grid.size(), 0.0);
  for (const auto& s : fam.samples) {
    auto counts = window_counts(fam.grid, s, w);
    for (std::size_t i = 0; i < counts.size(); ++i) avg[i] += counts[i];
  }
  ThicknessDecision d;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    double v = avg[i] / denom;
    if (v < rho) {
      d.holds = false;
      d.witness = ThicknessWitness{-1, decode_anchor(fam.grid, i), v};
      return d;
    }
  }
  return d;
}

Field restrict_field(const Field& f, const SetSample& set) {
  if (set.mask.size() != f.values.size())
    throw usage_error("restrict_field: mask/grid size mismatch");
  Field out(f.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    out.values[i] = set.mask[i] ? f.values[i] : cplx{0.0, 0.0};
  return out;
}

SetFamily halfline_example(const GridSpec& grid, double T) {
  if (grid.dim != 1) throw usage_error("halfline_example: one-dimensional only");
  SetFamily fam;
  fam.grid = grid;
  fam.horizon = T;
  Box right;
  right.lo[0] = 0.0;
  right.hi[0] = grid.half_length;
  Box left;
  left.lo[0] = -grid.half_length;
  left.hi[0] = 0.0;
  fam.samples.push_back(rasterize(grid, {right}));
  fam.samples.push_back(rasterize(grid, {left}));
  return fam;
}

double mean_window_measure(const SetFamily& fam, const std::vector<double>& L,
                           const std::vector<int>& anchor) {
  auto w = snap_window(fam.grid, L);
  std::array<int, 3> j{0, 0, 0};
  for (std::size_t a = 0; a < anchor.size(); ++a) j[a] = anchor[a];
  const std::size_t flat = fam.grid.encode(j);
  double acc = 0.0;
  for (const auto& s : fam.samples) {
    auto counts = window_counts(fam.grid, s, w);
    acc += static_cast<double>(counts[flat]);
  }
  return acc * fam.grid.cell_volume() / static_cast<double>(fam.samples.size());
}

}  // namespace obslab
