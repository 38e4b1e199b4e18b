// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_EXPERIMENT_HPP
#define RBB_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rbb/beamformer.hpp"
#include "rbb/metrics.hpp"
#include "rbb/scene.hpp"
#include "rbb/stft.hpp"

namespace rbb {

enum class ConstraintMode { true_ratf, predetermined_grid };

struct ExperimentConfig {
  MicrophoneArray array = MicrophoneArray::default_binaural();
  SceneConfig scene;
  StftConfig stft;
  std::vector<std::string> methods = {"bmvdr", "sco", "sdcr", "hybrid"};
  std::vector<double> c_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  ConstraintMode constraint_mode = ConstraintMode::true_ratf;
  double slack = 0.05;
  int k_max = 50;
  SolverOptions solver = design_solver_options();
  std::uint64_t seed = 1;
  double noise_seconds = 5.0;  // noise-only segment for CPSD estimation
  double eval_seconds = 10.0;
  double loading = 1e-6;
  std::string out_dir;  // empty: keep everything in memory
  bool write_wavs = true;

  // Target talker in the look direction plus four interferers at
  // 80/50/-35/-70 degrees with matched source powers.
  static ExperimentConfig defaults();
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);

  void validate() const;
};

struct CellResult {
  std::string method;
  double c = 0.0;
  bool ok = false;
  std::string error;
  FilterTable filters;
  MetricReport report;
  long sdcr_path_bins = 0;
  long sco_path_bins = 0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::vector<std::string> log;
  int bins = 0;
  int num_interferers = 0;

  bool all_ok() const;
  const CellResult* find(const std::string& method, double c) const;
};

// Per-bin ATF table for one source: synthetic free-field by default, or the
// DFT of a loaded multichannel impulse response when the source names one
// (sample rate and channel count must match).
std::vector<CVector> source_atf_table(const MicrophoneArray& array, const SourceSpec& src,
                                      const SceneConfig& scene, const StftConfig& stft);

// Synthesizes the scene, estimates the noise CPSD from the noise-only
// segment, designs every requested (method, c) cell, filters the audio,
// computes the metrics, and (when out_dir is set) writes CSV reports plus
// stereo WAV outputs. Deterministic for a fixed seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes metrics.csv, filters.csv, solve_counts.csv and per-figure plot
// data under dir. Throws when the directory cannot be written.
void emit_report(const ExperimentResult& result, const ExperimentConfig& cfg,
                 const std::string& dir);

}  // namespace rbb

#endif  // RBB_EXPERIMENT_HPP
