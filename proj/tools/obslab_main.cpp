// obslab: batch driver for the observability experiments.
//
// Exit codes: 0 = all asserted invariants pass, 1 = an invariant failed
// (witness serialized into the report), 2 = unusable configuration.

#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "obslab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"obslab - non-autonomous observability laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, preset, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::vector<std::string> overrides;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--preset", preset,
                 "named preset (heat, quartic, kernel-oracle, halfline, "
                 "falsify-left, kolmogorov)");
  app.add_option_function<std::uint64_t>(
         "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; },
         "random seed override");
  app.add_option("--out", out_dir, "output directory for reports and tables");
  app.add_option("--threads", threads, "worker cap for candidate sweeps");
  app.add_option("--override", overrides,
                 "dotted JSON merge patches, e.g. observe.candidates=100");

  const std::vector<std::string> names = {
      "ellipticity", "kernel-check", "propagate", "thickness", "uncertainty",
      "dissipation", "cobs",         "observe",   "falsify",   "ou-check",
      "ou-observe"};
  for (const auto& n : names) app.add_subcommand(n);

  CLI11_PARSE(app, argc, argv);
  std::string sub = app.get_subcommands().front()->get_name();

  try {
    obslab::Config config =
        !config_path.empty() ? obslab::Config::from_file(config_path)
        : !preset.empty()    ? obslab::Config::from_preset(preset)
                             : throw obslab::config_error(
                                   "either --config or --preset is required");
    nlohmann::json patch = nlohmann::json::object();
    if (seed_set) patch["seed"] = seed;
    if (threads > 0) patch["threads"] = threads;
    if (!out_dir.empty()) patch["out"] = out_dir;
    for (const auto& ov : overrides) {
      auto eq = ov.find('=');
      if (eq == std::string::npos)
        throw obslab::config_error("override must look like key=value: " + ov);
      std::string key = ov.substr(0, eq);
      nlohmann::json value = nlohmann::json::parse(ov.substr(eq + 1), nullptr, false);
      if (value.is_discarded()) value = ov.substr(eq + 1);
      // build nested object from the dotted key
      nlohmann::json nested = value;
      for (auto pos = key.rfind('.'); pos != std::string::npos; pos = key.rfind('.')) {
        nlohmann::json wrap;
        wrap[key.substr(pos + 1)] = nested;
        nested = wrap;
        key = key.substr(0, pos);
      }
      nlohmann::json wrap;
      wrap[key] = nested;
      patch.merge_patch(wrap);
    }
    if (!patch.empty()) config.merge_overrides(patch);
    return obslab::run_subcommand(sub, config);
  } catch (const obslab::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const obslab::usage_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
