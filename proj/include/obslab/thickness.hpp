#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "obslab/grid.hpp"

namespace obslab {

// Axis-aligned box on the torus, given in coordinates.  Boxes are snapped to
// cell boundaries when rasterized, so window measures are exact cell counts.
struct Box {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
};

// One observation set as a grid cell mask.
struct SetSample {
  std::vector<std::uint8_t> mask;  // size grid.size()

  std::size_t count() const;
};

SetSample rasterize(const GridSpec& grid, const std::vector<Box>& boxes);
SetSample full_set(const GridSpec& grid);
SetSample empty_set(const GridSpec& grid);

// Time-indexed family Omega(t): piecewise constant on a uniform partition of
// [0,T]; sample j is active on [jT/M, (j+1)T/M).
struct SetFamily {
  GridSpec grid;
  double horizon = 1.0;
  std::vector<SetSample> samples;

  const SetSample& at_time(double t) const;
  int sample_index(double t) const;
};

// min over lattice anchors x of |Omega cap (window + x)| / prod L_i, windows
// wrapping around the torus.  L_i are snapped to whole cells.
struct ThicknessProfile {
  double rho = 0.0;
  std::vector<int> worst_anchor;  // lattice indices
};

ThicknessProfile thickness_profile(const GridSpec& grid, const SetSample& set,
                                   const std::vector<double>& L);

struct ThicknessWitness {
  int time_index = -1;
  std::vector<int> anchor;
  double value = 0.0;
};

struct ThicknessDecision {
  bool holds = true;
  std::optional<ThicknessWitness> witness;
};

ThicknessDecision is_uniformly_thick(const SetFamily& fam,
                                     const std::vector<double>& L, double rho);
ThicknessDecision is_mean_thick(const SetFamily& fam, const std::vector<double>& L,
                                double rho);

// Observation operator C(t): pointwise mask.
Field restrict_field(const Field& f, const SetSample& set);

// Half-line example: Omega(t) = [0, X) for t < T/2 and [-X, 0) afterwards.
SetFamily halfline_example(const GridSpec& grid, double T);

// Mean-thickness failure witnesses: anchors x_n with small averaged window
// measure, used by the falsification experiment.
double mean_window_measure(const SetFamily& fam, const std::vector<double>& L,
                           const std::vector<int>& anchor);

}  // namespace obslab
