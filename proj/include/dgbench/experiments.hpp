#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace dgbench {

inline constexpr const char* kToolkitName = "dg-bench";
inline constexpr const char* kToolkitVersion = "0.1.0";

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::string seed_source;  // "config" or "cli_flag"
  std::string out_dir;
  int workers = 1;
  nlohmann::json params;  // full config JSON as parsed

  // Parses the config file and folds in CLI values. `cli_seed` is used only
  // when the config has no "seed" (config wins); a missing seed in both is
  // an error. `cli_kind` must match the config's kind.
  static ExperimentConfig load(const std::string& config_path,
                               const std::string& cli_kind,
                               const std::string& out_dir, int workers,
                               bool has_cli_seed, std::uint64_t cli_seed);
};

struct ExperimentReport {
  nlohmann::ordered_json json;
  double wall_clock_seconds = 0.0;
};

// Dispatches to the per-kind runner, writes report.json, tables/*.csv,
// figures/*.svg and the run_meta.json sidecar under config.out_dir, and
// returns the report. report.json depends only on (config, seed), never on
// the worker count or timing.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace dgbench
