#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "obslab/observability.hpp"
#include "obslab/ou.hpp"
#include "obslab/symbol.hpp"
#include "obslab/thickness.hpp"

namespace obslab {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A run configuration: raw JSON plus typed accessors.  Named presets ship
// the standard example setups; a preset is a full config that overrides
// merge into.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_preset(const std::string& name);
  static Config from_json(nlohmann::json j, std::string source_bytes);
  static std::vector<std::string> preset_names();

  void merge_overrides(const nlohmann::json& overrides);

  const nlohmann::json& raw() const { return raw_; }
  const std::string& hash() const { return hash_; }

  GridSpec grid() const;
  NonAutonomousSymbol symbol() const;
  SetFamily family(const GridSpec& grid) const;
  IntervalSet observation_times() const;  // "E"
  OUSystem ou_system() const;
  std::optional<HypothesisConstants> explicit_constants() const;

  double horizon() const;
  std::uint64_t seed() const;
  int threads() const;
  std::string out_dir() const;

 private:
  nlohmann::json raw_;
  std::string hash_;
};

// Building blocks also used by tests.
NonAutonomousSymbol symbol_from_json(const nlohmann::json& j);
SetFamily family_from_json(const nlohmann::json& j, const GridSpec& grid,
                           double horizon);
MatrixTrack matrix_track_from_json(const nlohmann::json& j);

// Periodic half-intervals [k p, k p + p/2) on the torus; uniformly
// (p, 1/2)-thick.
SetFamily periodic_halves_family(const GridSpec& grid, double period, double T);
SetFamily left_half_family(const GridSpec& grid, double T);

}  // namespace obslab
