#include "obslab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "obslab/report.hpp"

namespace obslab {

using nlohmann::json;

namespace {

json heat_symbol_json(double T) {
  return json{{"d", 1}, {"m", 2}, {"T", T},
              {"coeffs", json::array({json{{"alpha", {2}}, {"re", {-1.0}}, {"im", {0.0}}}})}};
}

json quartic_symbol_json(double T) {
  return json{{"d", 1}, {"m", 4}, {"T", T},
              {"coeffs", json::array({json{{"alpha", {4}}, {"re", {1.0}}, {"im", {0.0}}}})}};
}

json preset_heat() {
  json j;
  j["T"] = 1.0;
  j["grid"] = {{"d", 1}, {"X", 16.0}, {"N", 1024}};
  j["symbol"] = heat_symbol_json(1.0);
  j["family"] = {{"pattern", "periodic_halves"}, {"period", 1.0}};
  j["E"] = json::array({json::array({0.0, 1.0})});
  j["observe"] = {{"p", 2.0},     {"r", 2.0},          {"theta", 0.5},
                  {"candidates", 500}, {"band", 8.0},  {"quad_nodes", 16},
                  {"L", {1.0}},   {"rho", 0.5}};
  j["uncertainty"] = {{"lambda_list", {2.0, 3.0, 5.0, 8.0, 12.0, 20.0}},
                      {"L", {1.0}},
                      {"rho", 0.5},
                      {"draws", 24},
                      {"p", 2.0}};
  j["dissipation"] = {{"lambda_list", {24.0, 32.0, 44.0, 60.0, 80.0}},
                      {"timegap_list", {0.004, 0.008, 0.016, 0.032, 0.064}},
                      {"draws", 6},
                      {"p", 2.0}};
  j["propagate"] = {{"triples", 100}, {"band", 16.0}};
  j["kernel_check"] = {{"pairs", 20}};
  return j;
}

json preset_quartic() {
  json j = preset_heat();
  j["symbol"] = quartic_symbol_json(1.0);
  j["dissipation"] = {{"lambda_list", {10.0, 13.0, 17.0, 22.0, 28.0}},
                      {"timegap_list", {0.0002, 0.0005, 0.001, 0.002, 0.004}},
                      {"draws", 6},
                      {"p", 2.0}};
  return j;
}

json preset_kernel_oracle() {
  json j = preset_heat();
  j["grid"] = {{"d", 1}, {"X", 20.0}, {"N", 2048}};
  return j;
}

json preset_halfline() {
  json j;
  j["T"] = 2.0;
  j["grid"] = {{"d", 1}, {"X", 16.0}, {"N", 1024}};
  j["symbol"] = heat_symbol_json(2.0);
  j["family"] = {{"pattern", "halfline_example"}};
  j["E"] = json::array({json::array({0.0, 2.0})});
  j["thickness"] = {{"L", {1.0}}, {"rho", 0.5}};
  return j;
}

json preset_falsify_left() {
  json j;
  j["T"] = 1.0;
  j["grid"] = {{"d", 1}, {"X", 50.0}, {"N", 2048}};
  j["symbol"] = heat_symbol_json(1.0);
  j["family"] = {{"pattern", "left_half"}};
  j["E"] = json::array({json::array({0.0, 1.0})});
  j["falsify"] = {{"r", 2.0},
                  {"p", 2.0},
                  {"bump_width", 1.0},
                  {"centers", {0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0}},
                  {"quad_nodes", 16}};
  return j;
}

json preset_kolmogorov() {
  json j;
  j["T"] = 0.5;
  j["grid"] = {{"d", 2}, {"X", 8.0}, {"N", 256}};
  j["ou"] = {{"preset", "kolmogorov"}, {"block_dim", 1}, {"epsilon_window", 0.5}};
  j["family"] = {{"pattern", "periodic_halves"}, {"period", 1.0}};
  j["E"] = json::array({json::array({0.0, 0.5})});
  j["ou_observe"] = {{"p", 2.0},
                     {"r", 2.0},
                     {"candidates", 60},
                     {"band", 3.0},
                     {"quad_nodes", 8}};
  j["ou_check"] = {{"norm_samples", 50},
                   {"band", 3.0},
                   {"p_sweep", {1.25, 2.0, 4.0}},
                   {"grid", {{"d", 2}, {"X", 32.0}, {"N", 256}}}};
  return j;
}

}  // namespace

std::vector<std::string> Config::preset_names() {
  return {"heat", "quartic", "kernel-oracle", "halfline", "falsify-left",
          "kolmogorov"};
}

Config Config::from_preset(const std::string& name) {
  json j;
  if (name == "heat") j = preset_heat();
  else if (name == "quartic") j = preset_quartic();
  else if (name == "kernel-oracle") j = preset_kernel_oracle();
  else if (name == "halfline") j = preset_halfline();
  else if (name == "falsify-left") j = preset_falsify_left();
  else if (name == "kolmogorov") j = preset_kolmogorov();
  else throw config_error("unknown preset: " + name);
  return from_json(j, j.dump());
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("malformed config: ") + e.what());
  }
  if (j.contains("preset")) {
    Config base = from_preset(j.at("preset").get<std::string>());
    json merged = base.raw_;
    merged.merge_patch(j);
    return from_json(merged, bytes);
  }
  return from_json(j, bytes);
}

Config Config::from_json(json j, std::string source_bytes) {
  Config c;
  c.raw_ = std::move(j);
  c.hash_ = fnv1a64_hex(source_bytes);
  return c;
}

void Config::merge_overrides(const json& overrides) {
  raw_.merge_patch(overrides);
  hash_ = fnv1a64_hex(raw_.dump());
}

namespace {
template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw config_error("config: missing field '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error("config: bad field '" + key + "' in " + where + ": " + e.what());
  }
}
}  // namespace

GridSpec Config::grid() const {
  const json& g = raw_.contains("grid") ? raw_.at("grid") : json::object();
  return GridSpec(require<int>(g, "d", "grid"), require<double>(g, "X", "grid"),
                  require<int>(g, "N", "grid"));
}

double Config::horizon() const {
  return raw_.contains("T") ? raw_.at("T").get<double>() : 1.0;
}

std::uint64_t Config::seed() const {
  return raw_.contains("seed") ? raw_.at("seed").get<std::uint64_t>() : 20250810ULL;
}

int Config::threads() const {
  return raw_.contains("threads") ? raw_.at("threads").get<int>() : 1;
}

std::string Config::out_dir() const {
  if (const char* env = std::getenv("OBSLAB_OUT")) return env;
  return raw_.contains("out") ? raw_.at("out").get<std::string>() : ".";
}

NonAutonomousSymbol symbol_from_json(const json& j) {
  int d = require<int>(j, "d", "symbol");
  int m = require<int>(j, "m", "symbol");
  double T = require<double>(j, "T", "symbol");
  std::vector<SymbolTerm> terms;
  for (const auto& cj : j.at("coeffs")) {
    SymbolTerm term;
    term.alpha = require<std::vector<int>>(cj, "alpha", "symbol.coeffs");
    auto re = require<std::vector<double>>(cj, "re", "symbol.coeffs");
    auto im = cj.contains("im") ? cj.at("im").get<std::vector<double>>()
                                : std::vector<double>(re.size(), 0.0);
    if (im.size() != re.size())
      throw config_error("config: symbol coefficient re/im length mismatch");
    std::vector<cplx> samples(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) samples[i] = cplx{re[i], im[i]};
    term.track = CoefficientTrack(samples);
    terms.push_back(std::move(term));
  }
  try {
    return NonAutonomousSymbol(d, m, T, std::move(terms));
  } catch (const usage_error& e) {
    throw config_error(std::string("config: invalid symbol: ") + e.what());
  }
}

NonAutonomousSymbol Config::symbol() const {
  if (!raw_.contains("symbol")) throw config_error("config: missing 'symbol'");
  return symbol_from_json(raw_.at("symbol"));
}

SetFamily periodic_halves_family(const GridSpec& grid, double period, double T) {
  SetFamily fam;
  fam.grid = grid;
  fam.horizon = T;
  std::vector<Box> boxes;
  double X = grid.half_length;
  for (double lo = -X; lo < X - 1e-12; lo += period) {
    Box b;
    b.lo[0] = lo;
    b.hi[0] = std::min(lo + period / 2.0, X);
    if (grid.dim >= 2) {
      b.lo[1] = -X;
      b.hi[1] = X;
    }
    if (grid.dim >= 3) {
      b.lo[2] = -X;
      b.hi[2] = X;
    }
    boxes.push_back(b);
  }
  fam.samples.push_back(rasterize(grid, boxes));
  return fam;
}

SetFamily left_half_family(const GridSpec& grid, double T) {
  SetFamily fam;
  fam.grid = grid;
  fam.horizon = T;
  Box b;
  b.lo[0] = -grid.half_length;
  b.hi[0] = 0.0;
  for (int a = 1; a < grid.dim; ++a) {
    b.lo[a] = -grid.half_length;
    b.hi[a] = grid.half_length;
  }
  fam.samples.push_back(rasterize(grid, {b}));
  return fam;
}

SetFamily family_from_json(const json& j, const GridSpec& grid, double horizon) {
  if (j.contains("pattern")) {
    std::string pattern = j.at("pattern").get<std::string>();
    if (pattern == "halfline_example") return halfline_example(grid, horizon);
    if (pattern == "periodic_halves")
      return periodic_halves_family(grid, require<double>(j, "period", "family"),
                                    horizon);
    if (pattern == "left_half") return left_half_family(grid, horizon);
    if (pattern == "full") {
      SetFamily fam;
      fam.grid = grid;
      fam.horizon = horizon;
      fam.samples.push_back(full_set(grid));
      return fam;
    }
    if (pattern == "empty") {
      SetFamily fam;
      fam.grid = grid;
      fam.horizon = horizon;
      fam.samples.push_back(empty_set(grid));
      return fam;
    }
    throw config_error("config: unknown family pattern " + pattern);
  }
  if (!j.contains("sets")) throw config_error("config: family needs 'sets' or 'pattern'");
  SetFamily fam;
  fam.grid = grid;
  fam.horizon = horizon;
  for (const auto& sample : j.at("sets")) {
    std::vector<Box> boxes;
    for (const auto& bj : sample) {
      Box b;
      if (bj.is_array()) {
        if (grid.dim != 1)
          throw config_error("config: [lo, hi] boxes are one-dimensional");
        b.lo[0] = bj.at(0).get<double>();
        b.hi[0] = bj.at(1).get<double>();
      } else {
        auto lo = require<std::vector<double>>(bj, "lo", "family.sets");
        auto hi = require<std::vector<double>>(bj, "hi", "family.sets");
        for (std::size_t a = 0; a < lo.size(); ++a) {
          b.lo[a] = lo[a];
          b.hi[a] = hi[a];
        }
      }
      boxes.push_back(b);
    }
    fam.samples.push_back(rasterize(grid, boxes));
  }
  if (fam.samples.empty()) throw config_error("config: family has no time samples");
  return fam;
}

SetFamily Config::family(const GridSpec& grid) const {
  if (!raw_.contains("family")) throw config_error("config: missing 'family'");
  return family_from_json(raw_.at("family"), grid, horizon());
}

IntervalSet Config::observation_times() const {
  if (!raw_.contains("E")) return IntervalSet({{0.0, horizon()}});
  std::vector<std::pair<double, double>> iv;
  for (const auto& e : raw_.at("E"))
    iv.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return IntervalSet(std::move(iv));
}

MatrixTrack matrix_track_from_json(const json& j) {
  auto mat = [](const json& mj) {
    auto rows = mj.get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
    return m;
  };
  std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "constant";
  if (kind == "constant") return MatrixTrack::constant(mat(j.at("m")));
  if (kind == "affine") return MatrixTrack::affine(mat(j.at("m0")), mat(j.at("m1")));
  if (kind == "trig")
    return MatrixTrack::trig(mat(j.at("m0")), mat(j.at("ms")), mat(j.at("mc")),
                             j.at("w").get<double>());
  throw config_error("config: unknown matrix track kind " + kind);
}

OUSystem Config::ou_system() const {
  if (!raw_.contains("ou")) throw config_error("config: missing 'ou'");
  const json& j = raw_.at("ou");
  if (j.contains("preset")) {
    std::string p = j.at("preset").get<std::string>();
    if (p == "kolmogorov") {
      int block = j.contains("block_dim") ? j.at("block_dim").get<int>() : 1;
      return kolmogorov_system(block, horizon());
    }
    throw config_error("config: unknown ou preset " + p);
  }
  OUSystem sys;
  sys.A = matrix_track_from_json(j.at("A"));
  sys.B = matrix_track_from_json(j.at("B"));
  sys.dim = sys.A.rows();
  sys.horizon = horizon();
  sys.validate();
  return sys;
}

std::optional<HypothesisConstants> Config::explicit_constants() const {
  if (!raw_.contains("constants")) return std::nullopt;
  const json& j = raw_.at("constants");
  HypothesisConstants hc;
  hc.d0 = require<double>(j, "d0", "constants");
  hc.d1 = require<double>(j, "d1", "constants");
  hc.gamma1 = require<double>(j, "gamma1", "constants");
  hc.d2 = require<double>(j, "d2", "constants");
  hc.d3 = require<double>(j, "d3", "constants");
  hc.gamma2 = require<double>(j, "gamma2", "constants");
  hc.gamma3 = require<double>(j, "gamma3", "constants");
  hc.M = require<double>(j, "M", "constants");
  hc.omega = require<double>(j, "omega", "constants");
  hc.obs_norm = require<double>(j, "obs_norm", "constants");
  hc.theta = require<double>(j, "theta", "constants");
  hc.validate();
  return hc;
}

}  // namespace obslab
