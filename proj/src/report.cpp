#include "obslab/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "obslab/common.hpp"

namespace obslab {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = fnv1a64(bytes);
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

nlohmann::json record_to_json(const RunRecord& r) {
  nlohmann::json j;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  j["outputs"] = r.outputs;
  j["pass"] = r.pass;
  j["failures"] = r.failures;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.started_at = j.at("started_at").get<std::string>();
  r.finished_at = j.at("finished_at").get<std::string>();
  r.outputs = j.at("outputs");
  r.pass = j.at("pass").get<bool>();
  r.failures = j.at("failures").get<std::vector<std::string>>();
  return r;
}

void write_report(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("write_report: cannot open " + path);
  out << record_to_json(record).dump(2) << "\n";
  if (!out) throw numeric_error("write_report: write failed for " + path);
}

RunRecord read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw numeric_error("read_report: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return record_from_json(j);
}

namespace {
std::string format_full(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}
}  // namespace

void emit_plot_data(const Curve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw numeric_error("emit_plot_data: cannot open " + path);
  for (std::size_t i = 0; i < curve.columns.size(); ++i)
    out << (i ? "," : "") << curve.columns[i];
  out << "\n";
  for (const auto& row : curve.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_full(row[i]);
    out << "\n";
  }
  if (!out) throw numeric_error("emit_plot_data: write failed for " + path);
}

}  // namespace obslab
