#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace obslab {

// One persisted run: config identity, seed, timestamps, per-module outputs
// and the pass/fail roll-up.  Serialized as JSON; numeric fields keep full
// precision (shortest round-trip decimal, <= 17 significant digits).
struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  nlohmann::json outputs = nlohmann::json::object();
  bool pass = true;
  std::vector<std::string> failures;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

void write_report(const RunRecord& record, const std::string& path);
RunRecord read_report(const std::string& path);

// A named curve for CSV emission.
struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// CSV with the fixed header contract: one file per curve, full-precision
// decimal values.
void emit_plot_data(const Curve& curve, const std::string& path);

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

}  // namespace obslab
