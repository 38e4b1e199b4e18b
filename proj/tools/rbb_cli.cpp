// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "rbb/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Binaural beamformer comparison toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a batch experiment from a JSON config");
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> methods;
  std::vector<double> c_values;
  std::uint64_t seed = 0;
  bool seed_set = false;
  run->add_option("config", config_path, "JSON experiment config (omit for defaults)");
  run->add_option("--out", out_dir, "Output directory (overrides config)");
  run->add_option("--methods", methods, "Methods to run (overrides config)")->delimiter(',');
  run->add_option("--c", c_values, "Relaxation factors (overrides config)")->delimiter(',');
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides config)");

  CLI11_PARSE(app, argc, argv);
  seed_set = seed_opt->count() > 0;

  try {
    rbb::ExperimentConfig cfg = config_path.empty()
                                    ? rbb::ExperimentConfig::defaults()
                                    : rbb::ExperimentConfig::from_json_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty()) cfg.out_dir = "out";
    if (!methods.empty()) cfg.methods = methods;
    if (!c_values.empty()) cfg.c_grid = c_values;
    if (seed_set) cfg.seed = seed;
    cfg.validate();

    const rbb::ExperimentResult result = rbb::run_experiment(cfg);
    for (const auto& line : result.log) std::fprintf(stderr, "%s\n", line.c_str());
    int completed = 0;
    for (const auto& cell : result.cells) completed += cell.ok ? 1 : 0;
    std::printf("completed %d/%zu cells, reports in %s\n", completed, result.cells.size(),
                cfg.out_dir.c_str());
    return result.all_ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
