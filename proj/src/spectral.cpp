#include "obslab/spectral.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace obslab {

namespace {

// Twiddle factors and bit-reversal tables are cached per transform size.
// thread_local avoids locking; sizes in use are few and small.
struct FftTables {
  std::vector<cplx> twiddle;       // exp(-2 pi i k / N), k = 0..N/2-1
  std::vector<unsigned> reversal;  // bit-reversed indices
};

const FftTables& tables_for(int n) {
  thread_local std::map<int, FftTables> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  FftTables t;
  t.twiddle.resize(n / 2);
  for (int k = 0; k < n / 2; ++k)
    t.twiddle[k] = std::polar(1.0, -2.0 * pi * k / n);
  t.reversal.resize(n);
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  for (int i = 0; i < n; ++i) {
    unsigned r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (1 << b)) r |= 1u << (bits - 1 - b);
    t.reversal[i] = r;
  }
  return cache.emplace(n, std::move(t)).first->second;
}

// Iterative radix-2 Cooley-Tukey on a strided line.
void fft_line(cplx* a, int n, std::size_t stride, bool inverse) {
  const FftTables& t = tables_for(n);
  for (int i = 0; i < n; ++i) {
    unsigned r = t.reversal[i];
    if (static_cast<unsigned>(i) < r)
      std::swap(a[i * stride], a[r * stride]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    int half = len / 2, step = n / len;
    for (int base = 0; base < n; base += len) {
      for (int k = 0; k < half; ++k) {
        cplx w = t.twiddle[k * step];
        if (inverse) w = std::conj(w);
        cplx* u = a + (base + k) * stride;
        cplx* v = a + (base + k + half) * stride;
        cplx tv = *v * w;
        *v = *u - tv;
        *u += tv;
      }
    }
  }
  if (inverse) {
    double inv_n = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i * stride] *= inv_n;
  }
}

}  // namespace

void dft_nd(std::vector<cplx>& data, const GridSpec& g, bool inverse) {
  const int n = g.points;
  const std::size_t total = g.size();
  // Axis a has stride N^{dim-1-a} in row-major layout.
  std::size_t stride = total / n;
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t lines = total / n;
    for (std::size_t line = 0; line < lines; ++line) {
      // Start offset of this line: interleave the non-axis indices.
      std::size_t block = line / stride;       // indices before the axis
      std::size_t within = line % stride;      // indices after the axis
      std::size_t start = block * stride * n + within;
      fft_line(data.data() + start, n, stride, inverse);
    }
    stride /= n;
  }
}

namespace {

// Parity (-1)^{sum of FFT indices}; N even, so the signed index has the
// same parity as the storage index.
inline double lattice_parity(const GridSpec& g, std::size_t idx) {
  int sum = 0;
  std::size_t rem = idx;
  for (int a = g.dim - 1; a >= 0; --a) {
    sum += static_cast<int>(rem % g.points);
    rem /= g.points;
  }
  return (sum & 1) ? -1.0 : 1.0;
}

}  // namespace

Spectrum forward_transform(const Field& f) {
  Spectrum out(f.grid);
  out.values = f.values;
  dft_nd(out.values, f.grid, /*inverse=*/false);
  const double scale = f.grid.cell_volume();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= scale * lattice_parity(f.grid, i);
  return out;
}

Field inverse_transform(const Spectrum& s) {
  Field out(s.grid);
  out.values = s.values;
  const double scale = 1.0 / s.grid.cell_volume();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= scale * lattice_parity(s.grid, i);
  dft_nd(out.values, s.grid, /*inverse=*/true);
  return out;
}

Spectrum apply_multiplier(const Spectrum& s,
                          const std::function<cplx(const double*)>& mult) {
  Spectrum out(s.grid);
  std::array<int, 3> j{};
  double xi[3] = {0, 0, 0};
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    s.grid.decode(i, j);
    for (int a = 0; a < s.grid.dim; ++a) xi[a] = s.grid.freq(j[a]);
    out.values[i] = s.values[i] * mult(xi);
  }
  return out;
}

double bump_eta(double r) {
  if (r < 0.0) throw usage_error("bump_eta: r must be nonnegative");
  auto g = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  double a = g(2.0 - 2.0 * r), b = g(2.0 * r - 1.0);
  return a / (a + b);
}

namespace {

double freq_radius(const GridSpec& g, std::size_t idx) {
  std::array<int, 3> j{};
  g.decode(idx, j);
  double s = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    double xi = g.freq(j[a]);
    s += xi * xi;
  }
  return std::sqrt(s);
}

double freq_sup(const GridSpec& g, std::size_t idx) {
  std::array<int, 3> j{};
  g.decode(idx, j);
  double s = 0.0;
  for (int a = 0; a < g.dim; ++a) s = std::max(s, std::abs(g.freq(j[a])));
  return s;
}

}  // namespace

Spectrum project_smooth_spectrum(const Spectrum& s, double lambda) {
  if (!(lambda > 0.0)) throw usage_error("project_smooth: lambda must be positive");
  Spectrum out(s.grid);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    double r = freq_radius(s.grid, i) / lambda;
    out.values[i] = (r >= 1.0) ? cplx{0.0, 0.0} : s.values[i] * bump_eta(r);
  }
  return out;
}

Field project_smooth(const Field& f, double lambda) {
  return inverse_transform(project_smooth_spectrum(forward_transform(f), lambda));
}

Spectrum project_sharp_spectrum(const Spectrum& s, double lambda) {
  if (!(lambda > 0.0)) throw usage_error("project_sharp: lambda must be positive");
  Spectrum out(s.grid);
  for (std::size_t i = 0; i < s.values.size(); ++i)
    out.values[i] = (freq_sup(s.grid, i) <= lambda) ? s.values[i] : cplx{0.0, 0.0};
  return out;
}

Field project_sharp(const Field& f, double lambda) {
  return inverse_transform(project_sharp_spectrum(forward_transform(f), lambda));
}

double smooth_cutoff_kernel_l1(const GridSpec& g, double lambda) {
  Spectrum chi(g);
  for (std::size_t i = 0; i < chi.values.size(); ++i) {
    double r = freq_radius(g, i) / lambda;
    chi.values[i] = (r >= 1.0) ? 0.0 : bump_eta(r);
  }
  return field_norm(inverse_transform(chi), 1.0);
}

Field gaussian_packet_field(const GridSpec& g, const std::array<double, 3>& center,
                            double width, const std::array<double, 3>& modulation) {
  if (!(width > 0.0)) throw usage_error("gaussian_packet_field: width must be positive");
  Field f(g);
  std::array<int, 3> j{};
  const double period = 2.0 * g.half_length;
  // enough images that the truncated tail sits below 1e-17 of the peak
  const int images =
      std::max(1, static_cast<int>(std::ceil((9.0 * width + 2.0 * g.half_length) /
                                             period)));
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    g.decode(i, j);
    cplx acc{0.0, 0.0};
    int counts[3] = {0, 0, 0};
    for (int a = 0; a < g.dim; ++a) counts[a] = images;
    for (int n0 = -counts[0]; n0 <= counts[0]; ++n0)
      for (int n1 = -counts[1]; n1 <= counts[1]; ++n1)
        for (int n2 = -counts[2]; n2 <= counts[2]; ++n2) {
          const int shift[3] = {n0, n1, n2};
          double r2 = 0.0, phase = 0.0;
          for (int a = 0; a < g.dim; ++a) {
            double x = g.coord(j[a]) + period * shift[a] - center[a];
            r2 += x * x;
            phase += modulation[a] * (g.coord(j[a]) + period * shift[a]);
          }
          acc += std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, phase);
        }
    f.values[i] = acc;
  }
  return f;
}

}  // namespace obslab
