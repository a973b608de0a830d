#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "dgbench/errors.hpp"
#include "dgbench/experiments.hpp"

namespace {

int exit_code_for(dgbench::ErrorKind kind) {
  switch (kind) {
    case dgbench::ErrorKind::config:
      return 2;
    case dgbench::ErrorKind::theorem:
      return 3;
    case dgbench::ErrorKind::io:
      return 4;
    case dgbench::ErrorKind::logic:
      break;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(dgbench::kToolkitName) +
               ": distributional-generalization measurements"};
  app.set_version_flag("--version", dgbench::kToolkitVersion);

  std::string kind, config_path, out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  app.add_option("kind", kind, "experiment kind (must match the config)")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--workers", workers, "worker threads (default: all cores)");
  auto* seed_opt = app.add_option(
      "--seed", seed, "seed when the config does not set one (config wins)");

  CLI11_PARSE(app, argc, argv);

  try {
    const dgbench::ExperimentConfig config = dgbench::ExperimentConfig::load(
        config_path, kind, out_dir, workers, seed_opt->count() > 0, seed);
    const dgbench::ExperimentReport report = dgbench::run_experiment(config);
    std::printf("%s %s: wrote %s/report.json (%.2fs, %d workers)\n",
                dgbench::kToolkitName, config.kind.c_str(),
                config.out_dir.c_str(), report.wall_clock_seconds,
                config.workers);
    return 0;
  } catch (const dgbench::DgError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
