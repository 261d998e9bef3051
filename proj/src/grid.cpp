#include "obslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace obslab {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

GridSpec::GridSpec(int d, double X, int N) : dim(d), half_length(X), points(N) {
  if (d < 1 || d > 3) throw usage_error("GridSpec: dimension must be 1..3");
  if (!(X > 0.0)) throw usage_error("GridSpec: half-length must be positive");
  if (N < 8 || !power_of_two(N))
    throw usage_error("GridSpec: points per axis must be a power of two >= 8");
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
  return s;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= cell();
  return v;
}

double GridSpec::freq_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= freq_step();
  return v;
}

void GridSpec::decode(std::size_t idx, std::array<int, 3>& j) const {
  j = {0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    j[a] = static_cast<int>(idx % points);
    idx /= points;
  }
}

std::size_t GridSpec::encode(const std::array<int, 3>& j) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim; ++a) idx = idx * points + j[a];
  return idx;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

double field_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw usage_error("field_norm: p must be >= 1 (use INFINITY for sup)");
  double m = max_abs(f.values);
  if (m == 0.0) return 0.0;
  if (std::isinf(p)) return m;
  double acc = 0.0;
  for (const auto& z : f.values) {
    double r = std::abs(z) / m;
    acc += (p == 2.0) ? r * r : ((p == 1.0) ? r : std::pow(r, p));
  }
  return m * std::pow(f.grid.cell_volume() * acc, 1.0 / p);
}

double spectrum_norm_l2(const Spectrum& s) {
  double m = max_abs(s.values);
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& z : s.values) {
    double r = std::abs(z) / m;
    acc += r * r;
  }
  return m * std::sqrt(s.grid.freq_volume() * acc);
}

}  // namespace obslab
