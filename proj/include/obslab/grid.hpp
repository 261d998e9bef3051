#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "obslab/common.hpp"

namespace obslab {

// Uniform periodic grid on the torus [-X, X)^d with N points per axis.
// The frequency lattice per axis is { pi*k/X : k = -N/2 .. N/2-1 }.
struct GridSpec {
  int dim = 1;
  double half_length = 1.0;  // X
  int points = 8;            // N, power of two

  GridSpec() = default;
  GridSpec(int d, double X, int N);

  std::size_t size() const;           // N^d
  double cell() const { return 2.0 * half_length / points; }
  double cell_volume() const;         // cell()^d
  double freq_step() const { return pi / half_length; }
  double freq_volume() const;         // freq_step()^d
  double nyquist() const { return pi * (points / 2) / half_length; }

  int signed_index(int j) const { return j < points / 2 ? j : j - points; }
  double freq(int j) const { return freq_step() * signed_index(j); }
  double coord(int j) const { return -half_length + cell() * j; }

  // Row-major decode of a flat index into per-axis indices.
  void decode(std::size_t idx, std::array<int, 3>& j) const;
  std::size_t encode(const std::array<int, 3>& j) const;

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && half_length == o.half_length && points == o.points;
  }
};

// Real-space samples on a grid.
struct Field {
  GridSpec grid;
  std::vector<cplx> values;

  Field() = default;
  explicit Field(const GridSpec& g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}
};

// Frequency-space samples on the dual lattice, stored in FFT index order.
struct Spectrum {
  GridSpec grid;
  std::vector<cplx> values;

  Spectrum() = default;
  explicit Spectrum(const GridSpec& g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}
};

// Cell-volume-weighted L^p norm (Riemann sum); p = infinity is the max.
// Accumulation is scaled by the max modulus so that fields with entries far
// below 1e-154 still produce correct norms.
double field_norm(const Field& f, double p);
double max_abs(const std::vector<cplx>& v);

// Frequency-lattice L^2 norm with freq_volume() weights.
double spectrum_norm_l2(const Spectrum& s);

}  // namespace obslab
