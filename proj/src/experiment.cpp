// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rbb/rng.hpp"
#include "rbb/wav_io.hpp"

namespace rbb {

namespace {

using nlohmann::json;

std::uint64_t seed_for(std::uint64_t master, std::uint64_t stream) {
  DetRng rng(master ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return rng.next_u64();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

SourceKind kind_from_string(const std::string& s) {
  if (s == "white") return SourceKind::white;
  if (s == "speech_shaped") return SourceKind::speech_shaped;
  throw std::invalid_argument("unknown source kind: " + s);
}

SourceSpec source_from_json(const json& j) {
  SourceSpec spec;
  if (j.contains("azimuth_deg")) spec.azimuth_deg = j.at("azimuth_deg").get<double>();
  if (j.contains("kind")) spec.kind = kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("power")) spec.power = j.at("power").get<double>();
  if (j.contains("ir_wav")) spec.ir_wav = j.at("ir_wav").get<std::string>();
  return spec;
}

}  // namespace

std::vector<CVector> source_atf_table(const MicrophoneArray& array, const SourceSpec& src,
                                      const SceneConfig& scene, const StftConfig& stft) {
  std::vector<CVector> table(stft.num_bins());
  if (!src.ir_wav.empty()) {
    const WavData ir = read_wav(src.ir_wav);
    if (ir.sample_rate != static_cast<int>(scene.sample_rate_hz)) {
      std::ostringstream msg;
      msg << "impulse response " << src.ir_wav << " sample rate " << ir.sample_rate
          << " does not match scene rate " << scene.sample_rate_hz;
      throw std::invalid_argument(msg.str());
    }
    if (static_cast<int>(ir.channels.size()) != array.size()) {
      throw std::invalid_argument("impulse response channel count does not match array");
    }
    const int n = stft.fft_size;
    for (int k = 0; k < stft.num_bins(); ++k) {
      CVector a(array.size());
      for (int m = 0; m < array.size(); ++m) {
        Complex acc(0.0, 0.0);
        const auto& h = ir.channels[m];
        const std::size_t taps = std::min<std::size_t>(h.size(), n);
        for (std::size_t t = 0; t < taps; ++t) {
          acc += h[t] * std::polar(1.0, -2.0 * std::numbers::pi * k *
                                            static_cast<double>(t) / n);
        }
        a(m) = acc;
      }
      table[k] = a;
    }
    return table;
  }
  AtfOptions opts{scene.sample_rate_hz, scene.speed_of_sound, scene.head_shadow};
  for (int k = 0; k < stft.num_bins(); ++k) {
    table[k] = synth_atf(array, src.azimuth_deg,
                         stft.bin_freq_hz(k, scene.sample_rate_hz), opts);
  }
  return table;
}

namespace {

std::vector<CVector> ratf_table(const std::vector<CVector>& atfs, int ref) {
  std::vector<CVector> out(atfs.size());
  for (std::size_t k = 0; k < atfs.size(); ++k) out[k] = ratf(atfs[k], ref);
  return out;
}

// Renders a mono source to all microphones by per-bin ATF products in the
// STFT domain (the per-bin signal model applied literally).
std::vector<std::vector<double>> render_source(const std::vector<double>& signal,
                                               const std::vector<CVector>& atfs,
                                               const StftConfig& stft, int mics) {
  const StftGrid mono = analyze(signal, stft);
  std::vector<std::vector<double>> channels(mics);
  StftGrid ch = mono;
  for (int m = 0; m < mics; ++m) {
    for (int k = 0; k < mono.num_bins; ++k) {
      ch.coef.col(k) = mono.coef.col(k) * atfs[k](m);
    }
    channels[m] = synthesize(ch, stft);
  }
  return channels;
}

void accumulate(std::vector<std::vector<double>>& into,
                const std::vector<std::vector<double>>& from) {
  if (into.empty()) {
    into = from;
    return;
  }
  for (std::size_t m = 0; m < into.size(); ++m) {
    const std::size_t n = std::min(into[m].size(), from[m].size());
    for (std::size_t i = 0; i < n; ++i) into[m][i] += from[m][i];
  }
}

// Spherically isotropic diffuse field: plane waves from a Fibonacci sphere
// driven by independent white noises; pairwise coherence approaches
// sinc(2 pi f d / c).
std::vector<std::vector<double>> render_diffuse(const MicrophoneArray& array,
                                                const SceneConfig& scene,
                                                const StftConfig& stft,
                                                std::size_t num_samples,
                                                std::uint64_t seed) {
  const int directions = 192;
  std::vector<std::vector<double>> channels(array.size(),
                                            std::vector<double>(num_samples, 0.0));
  if (scene.diffuse_level <= 0.0) return channels;
  const double gain = std::sqrt(scene.diffuse_level / directions);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<CVector> atfs(stft.num_bins());
  for (int d = 0; d < directions; ++d) {
    const double zc = 1.0 - 2.0 * (d + 0.5) / directions;
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double phi = golden * d;
    const Eigen::Vector3d u(r * std::cos(phi), r * std::sin(phi), zc);
    for (int k = 0; k < stft.num_bins(); ++k) {
      const double f = stft.bin_freq_hz(k, scene.sample_rate_hz);
      CVector a(array.size());
      for (int m = 0; m < array.size(); ++m) {
        const double tau = array.positions.col(m).dot(u) / scene.speed_of_sound;
        a(m) = std::polar(gain, -2.0 * std::numbers::pi * f * tau);
      }
      atfs[k] = a;
    }
    DetRng rng(seed_for(seed, 1000 + d));
    std::vector<double> white(num_samples);
    for (auto& v : white) v = rng.gaussian();
    accumulate(channels, render_source(white, atfs, stft, array.size()));
  }
  return channels;
}

std::vector<std::vector<double>> render_self_noise(const MicrophoneArray& array,
                                                   double psd, std::size_t num_samples,
                                                   std::uint64_t seed) {
  std::vector<std::vector<double>> channels(array.size());
  const double sigma = std::sqrt(psd);
  for (int m = 0; m < array.size(); ++m) {
    DetRng rng(seed_for(seed, 2000 + m));
    channels[m].resize(num_samples);
    for (auto& v : channels[m]) v = sigma * rng.gaussian();
  }
  return channels;
}

std::vector<StftGrid> analyze_channels(const std::vector<std::vector<double>>& channels,
                                       const StftConfig& stft) {
  std::vector<StftGrid> grids;
  grids.reserve(channels.size());
  for (const auto& ch : channels) grids.push_back(analyze(ch, stft));
  return grids;
}

struct Csv {
  std::ofstream out;
  explicit Csv(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot write " + path);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << cells[i] << (i + 1 == cells.size() ? "" : ",");
    }
    out << "\n";
  }
};

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.scene.target = {0.0, SourceKind::speech_shaped, 1.0, ""};
  cfg.scene.interferers = {
      {80.0, SourceKind::speech_shaped, 1.0, ""},
      {50.0, SourceKind::white, 1.0, ""},
      {-35.0, SourceKind::white, 1.0, ""},
      {-70.0, SourceKind::white, 1.0, ""},
  };
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg = defaults();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("c_grid")) cfg.c_grid = j.at("c_grid").get<std::vector<double>>();
  if (j.contains("constraint_mode")) {
    const std::string mode = j.at("constraint_mode").get<std::string>();
    if (mode == "true_ratf") {
      cfg.constraint_mode = ConstraintMode::true_ratf;
    } else if (mode == "predetermined_grid") {
      cfg.constraint_mode = ConstraintMode::predetermined_grid;
    } else {
      throw std::invalid_argument("unknown constraint_mode: " + mode);
    }
  }
  if (j.contains("slack")) cfg.slack = j.at("slack").get<double>();
  if (j.contains("k_max")) cfg.k_max = j.at("k_max").get<int>();
  if (j.contains("noise_seconds")) cfg.noise_seconds = j.at("noise_seconds").get<double>();
  if (j.contains("eval_seconds")) cfg.eval_seconds = j.at("eval_seconds").get<double>();
  if (j.contains("loading")) cfg.loading = j.at("loading").get<double>();
  if (j.contains("write_wavs")) cfg.write_wavs = j.at("write_wavs").get<bool>();
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (s.contains("max_iter")) cfg.solver.max_iter = s.at("max_iter").get<int>();
    if (s.contains("gap_tol")) cfg.solver.gap_tol = s.at("gap_tol").get<double>();
    if (s.contains("feas_tol")) cfg.solver.feas_tol = s.at("feas_tol").get<double>();
  }
  if (j.contains("stft")) {
    const json& s = j.at("stft");
    if (s.contains("frame_len")) cfg.stft.frame_len = s.at("frame_len").get<int>();
    if (s.contains("hop")) cfg.stft.hop = s.at("hop").get<int>();
    if (s.contains("fft_size")) cfg.stft.fft_size = s.at("fft_size").get<int>();
  }
  if (j.contains("array")) {
    const json& a = j.at("array");
    if (a.contains("self_noise_snr_db")) {
      cfg.array.self_noise_snr_db = a.at("self_noise_snr_db").get<double>();
    }
    if (a.contains("positions")) {
      const auto pos = a.at("positions").get<std::vector<std::vector<double>>>();
      cfg.array.positions.resize(3, static_cast<Eigen::Index>(pos.size()));
      for (std::size_t m = 0; m < pos.size(); ++m) {
        if (pos[m].size() != 3) throw std::invalid_argument("positions need 3 coordinates");
        cfg.array.positions.col(static_cast<Eigen::Index>(m)) =
            Eigen::Vector3d(pos[m][0], pos[m][1], pos[m][2]);
      }
      cfg.array.left_ref = 0;
      cfg.array.right_ref = static_cast<int>(pos.size()) - 1;
    }
  }
  if (j.contains("scene")) {
    const json& s = j.at("scene");
    if (s.contains("target")) cfg.scene.target = source_from_json(s.at("target"));
    if (s.contains("interferers")) {
      cfg.scene.interferers.clear();
      for (const auto& it : s.at("interferers")) {
        cfg.scene.interferers.push_back(source_from_json(it));
      }
    }
    if (s.contains("diffuse_level")) cfg.scene.diffuse_level = s.at("diffuse_level").get<double>();
    if (s.contains("sample_rate_hz")) cfg.scene.sample_rate_hz = s.at("sample_rate_hz").get<double>();
    if (s.contains("speed_of_sound")) cfg.scene.speed_of_sound = s.at("speed_of_sound").get<double>();
    if (s.contains("head_shadow")) cfg.scene.head_shadow = s.at("head_shadow").get<bool>();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void ExperimentConfig::validate() const {
  array.validate();
  scene.validate();
  stft.validate();
  static const std::set<std::string> known = {"bmvdr", "sco", "sdcr", "hybrid"};
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  bool any_relaxed = false;
  for (const auto& m : methods) {
    if (!known.count(m)) throw std::invalid_argument("unknown method: " + m);
    if (m != "bmvdr") any_relaxed = true;
  }
  for (double c : c_grid) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("c values must lie in [0, 1]");
  }
  if (any_relaxed && c_grid.empty()) {
    throw std::invalid_argument("relaxed methods requested with an empty c grid");
  }
  if (noise_seconds <= 0.0 || eval_seconds <= 0.0) {
    throw std::invalid_argument("segment durations must be positive");
  }
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
}

bool ExperimentResult::all_ok() const {
  for (const auto& cell : cells) {
    if (!cell.ok) return false;
  }
  return !cells.empty();
}

const CellResult* ExperimentResult::find(const std::string& method, double c) const {
  for (const auto& cell : cells) {
    if (cell.method == method && std::abs(cell.c - c) < 1e-12) return &cell;
  }
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const double fs = cfg.scene.sample_rate_hz;
  const int mics = cfg.array.size();
  const int bins = cfg.stft.num_bins();
  const auto n_noise = static_cast<std::size_t>(std::llround(cfg.noise_seconds * fs));
  const auto n_eval = static_cast<std::size_t>(std::llround(cfg.eval_seconds * fs));

  ExperimentResult result;
  result.bins = bins;
  result.num_interferers = static_cast<int>(cfg.scene.interferers.size());

  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + cfg.out_dir);
  }

  // Per-bin target and interferer RATFs (metrics always use the true ones).
  const auto a_bins = ratf_table(
      source_atf_table(cfg.array, cfg.scene.target, cfg.scene, cfg.stft), cfg.array.left_ref);
  std::vector<std::vector<CVector>> b_bins;  // interferer -> bin
  for (const auto& src : cfg.scene.interferers) {
    b_bins.push_back(
        ratf_table(source_atf_table(cfg.array, src, cfg.scene, cfg.stft), cfg.array.left_ref));
  }

  // Constraint set per bin.
  std::vector<std::vector<CVector>> constraints(bins);
  if (cfg.constraint_mode == ConstraintMode::true_ratf) {
    for (int k = 0; k < bins; ++k) {
      for (const auto& table : b_bins) constraints[k].push_back(table[k]);
    }
  } else {
    AtfOptions opts{fs, cfg.scene.speed_of_sound, cfg.scene.head_shadow};
    for (double az : predetermined_grid_azimuths()) {
      for (int k = 0; k < bins; ++k) {
        constraints[k].push_back(ratf(
            synth_atf(cfg.array, az, cfg.stft.bin_freq_hz(k, fs), opts), cfg.array.left_ref));
      }
    }
  }

  // --- Signals ------------------------------------------------------------
  const double p_self = self_noise_psd(cfg.array, cfg.scene, cfg.stft);

  std::vector<std::vector<double>> noise_channels;  // noise-only segment
  std::vector<std::vector<double>> eval_noise_channels;
  for (std::size_t i = 0; i < cfg.scene.interferers.size(); ++i) {
    const auto& src = cfg.scene.interferers[i];
    const auto atfs = source_atf_table(cfg.array, src, cfg.scene, cfg.stft);
    const auto sig_noise =
        synth_source_signal(src, n_noise, seed_for(cfg.seed, 10 + 2 * i), cfg.stft, fs);
    const auto sig_eval =
        synth_source_signal(src, n_eval, seed_for(cfg.seed, 11 + 2 * i), cfg.stft, fs);
    accumulate(noise_channels, render_source(sig_noise, atfs, cfg.stft, mics));
    accumulate(eval_noise_channels, render_source(sig_eval, atfs, cfg.stft, mics));
  }
  if (noise_channels.empty()) {
    noise_channels.assign(mics, std::vector<double>(n_noise, 0.0));
    eval_noise_channels.assign(mics, std::vector<double>(n_eval, 0.0));
  }
  accumulate(noise_channels,
             render_diffuse(cfg.array, cfg.scene, cfg.stft, n_noise, cfg.seed));
  accumulate(eval_noise_channels,
             render_diffuse(cfg.array, cfg.scene, cfg.stft, n_eval, cfg.seed ^ 0x5a5aULL));
  accumulate(noise_channels, render_self_noise(cfg.array, p_self, n_noise, cfg.seed));
  accumulate(eval_noise_channels,
             render_self_noise(cfg.array, p_self, n_eval, cfg.seed ^ 0xa5a5ULL));

  const auto target_signal =
      synth_source_signal(cfg.scene.target, n_eval, seed_for(cfg.seed, 1), cfg.stft, fs);
  const auto target_channels =
      render_source(target_signal, source_atf_table(cfg.array, cfg.scene.target, cfg.scene, cfg.stft),
                    cfg.stft, mics);

  std::vector<std::vector<double>> mixture_channels = eval_noise_channels;
  accumulate(mixture_channels, target_channels);

  // --- Noise CPSD estimate from the noise-only segment ---------------------
  const auto noise_grids = analyze_channels(noise_channels, cfg.stft);
  std::vector<CMatrix> p_n(bins);
  std::vector<CMatrix> p_lift(bins);
  for (int k = 0; k < bins; ++k) {
    std::vector<CVector> frames;
    frames.reserve(noise_grids[0].num_frames);
    for (int t = 0; t < noise_grids[0].num_frames; ++t) {
      CVector y(mics);
      for (int m = 0; m < mics; ++m) y(m) = noise_grids[m].coef(t, k);
      frames.push_back(std::move(y));
    }
    const CrossPsd est = estimate_cpsd_from_frames(frames, cfg.loading, k);
    p_n[k] = est.p;
    p_lift[k] = lift_block_diag(est.p);
  }

  // --- Filter design -------------------------------------------------------
  FilterTable bmvdr_table(bins);
  for (int k = 0; k < bins; ++k) bmvdr_table[k] = bmvdr(p_n[k], a_bins[k]);

  const auto eval_noise_grids = analyze_channels(eval_noise_channels, cfg.stft);
  const auto target_grids = analyze_channels(target_channels, cfg.stft);
  const auto mixture_grids = analyze_channels(mixture_channels, cfg.stft);
  const auto mask = activity_mask(target_channels[cfg.array.left_ref], cfg.stft);

  std::vector<std::pair<std::string, double>> cells_todo;
  for (double c : cfg.c_grid) {
    for (const auto& method : cfg.methods) cells_todo.emplace_back(method, c);
  }

  for (const auto& [method, c] : cells_todo) {
    CellResult cell;
    cell.method = method;
    cell.c = c;
    try {
      FilterTable table(bins);
      for (int k = 0; k < bins; ++k) {
        if (method == "bmvdr") {
          table[k] = bmvdr_table[k];
          continue;
        }
        const RelaxationSpec spec =
            epsilon_bounds(c, a_bins[k], constraints[k], cfg.slack, cfg.k_max);
        if (method == "sdcr") {
          table[k] = sdcr_solve(p_lift[k], a_bins[k], spec, cfg.solver);
        } else if (method == "sco") {
          table[k] = sco_solve(p_lift[k], a_bins[k], spec, cfg.solver);
        } else {
          table[k] = hybrid_solve(p_lift[k], a_bins[k], spec, cfg.solver);
          if (table[k].path == 'd') {
            ++cell.sdcr_path_bins;
          } else {
            ++cell.sco_path_bins;
          }
        }
      }

      auto [left, right] = apply_filters(table, mixture_grids);
      auto [tgt_l, tgt_r] = apply_filters(table, target_grids);
      auto [noi_l, noi_r] = apply_filters(table, eval_noise_grids);

      MetricReport report;
      report.method = method;
      report.c = c;
      const auto out_tl = synthesize(tgt_l, cfg.stft);
      const auto out_tr = synthesize(tgt_r, cfg.stft);
      const auto out_nl = synthesize(noi_l, cfg.stft);
      const auto out_nr = synthesize(noi_r, cfg.stft);
      report.ssnr_left_db = ssnr_db(out_tl, out_nl, mask, cfg.stft).value_or(-99.0);
      report.ssnr_right_db = ssnr_db(out_tr, out_nr, mask, cfg.stft).value_or(-99.0);
      for (const auto& table_b : b_bins) {
        InterfererMetrics im;
        const ItfAverage itf = avg_itf_error(table, table_b, a_bins, c);
        im.avg_itf_error = itf.avg_error;
        im.itf_bound = itf.bound;
        im.ild_error_db = ild_error_db(table, table_b, cfg.stft, fs).value;
        im.ipd_error_rad = ipd_error_rad(table, table_b, cfg.stft, fs).value;
        report.interferers.push_back(im);
      }
      for (const auto& fb : table) report.total_convex_solves += fb.solves;

      if (!cfg.out_dir.empty() && cfg.write_wavs) {
        WavData wav;
        wav.sample_rate = static_cast<int>(fs);
        wav.channels = {synthesize(left, cfg.stft), synthesize(right, cfg.stft)};
        std::ostringstream name;
        name << cfg.out_dir << "/" << method << "_c" << fmt(c) << ".wav";
        write_wav(name.str(), wav);
      }

      cell.filters = std::move(table);
      cell.report = std::move(report);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      std::ostringstream log;
      log << "cell (" << method << ", c=" << fmt(c) << ") failed: " << e.what();
      result.log.push_back(log.str());
    }
    result.cells.push_back(std::move(cell));
  }

  if (!cfg.out_dir.empty()) {
    if (cfg.write_wavs) {
      WavData wav;
      wav.sample_rate = static_cast<int>(fs);
      wav.channels = {mixture_channels[cfg.array.left_ref],
                      mixture_channels[cfg.array.right_ref]};
      write_wav(cfg.out_dir + "/unprocessed.wav", wav);
    }
    emit_report(result, cfg, cfg.out_dir);
  }
  return result;
}

void emit_report(const ExperimentResult& result, const ExperimentConfig& /*cfg*/,
                 const std::string& dir) {
  if (result.cells.empty()) throw std::invalid_argument("no cells to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);

  {
    Csv csv(dir + "/metrics.csv");
    csv.row({"method", "c", "metric", "source", "value"});
    for (const auto& cell : result.cells) {
      if (!cell.ok) continue;
      const MetricReport& r = cell.report;
      csv.row({r.method, fmt(r.c), "ssnr_db", "left", fmt(r.ssnr_left_db)});
      csv.row({r.method, fmt(r.c), "ssnr_db", "right", fmt(r.ssnr_right_db)});
      for (std::size_t i = 0; i < r.interferers.size(); ++i) {
        const auto& im = r.interferers[i];
        const std::string src = "interferer" + std::to_string(i + 1);
        csv.row({r.method, fmt(r.c), "avg_itf_error", src, fmt(im.avg_itf_error)});
        csv.row({r.method, fmt(r.c), "itf_bound", src, fmt(im.itf_bound)});
        csv.row({r.method, fmt(r.c), "ild_error_db", src, fmt(im.ild_error_db)});
        csv.row({r.method, fmt(r.c), "ipd_error_rad", src, fmt(im.ipd_error_rad)});
      }
      csv.row({r.method, fmt(r.c), "convex_solves", "total",
               std::to_string(r.total_convex_solves)});
    }
  }

  {
    Csv csv(dir + "/filters.csv");
    std::vector<std::string> header = {"method", "c", "bin"};
    int mics = 0;
    for (const auto& cell : result.cells) {
      if (cell.ok && !cell.filters.empty()) {
        mics = static_cast<int>(cell.filters.front().w_left.size());
        break;
      }
    }
    for (int m = 0; m < mics; ++m) {
      header.push_back("wl" + std::to_string(m) + "_re");
      header.push_back("wl" + std::to_string(m) + "_im");
    }
    for (int m = 0; m < mics; ++m) {
      header.push_back("wr" + std::to_string(m) + "_re");
      header.push_back("wr" + std::to_string(m) + "_im");
    }
    header.insert(header.end(), {"solves", "converged", "rank_gap"});
    csv.row(header);
    for (const auto& cell : result.cells) {
      if (!cell.ok) continue;
      for (std::size_t k = 0; k < cell.filters.size(); ++k) {
        const FilterBin& fb = cell.filters[k];
        std::vector<std::string> row = {cell.method, fmt(cell.c), std::to_string(k)};
        for (int m = 0; m < mics; ++m) {
          row.push_back(fmt(fb.w_left(m).real()));
          row.push_back(fmt(fb.w_left(m).imag()));
        }
        for (int m = 0; m < mics; ++m) {
          row.push_back(fmt(fb.w_right(m).real()));
          row.push_back(fmt(fb.w_right(m).imag()));
        }
        row.push_back(std::to_string(fb.solves));
        row.push_back(fb.converged ? "1" : "0");
        row.push_back(fmt(fb.rank_gap));
        csv.row(row);
      }
    }
  }

  {
    Csv csv(dir + "/solve_counts.csv");
    csv.row({"method", "c", "total_solves", "bins", "sdcr_path_bins", "sco_path_bins"});
    for (const auto& cell : result.cells) {
      if (!cell.ok) continue;
      csv.row({cell.method, fmt(cell.c), std::to_string(cell.report.total_convex_solves),
               std::to_string(result.bins), std::to_string(cell.sdcr_path_bins),
               std::to_string(cell.sco_path_bins)});
    }
  }

  {
    Csv csv(dir + "/fig1_ssnr.csv");
    csv.row({"c", "method", "ssnr_left_db", "ssnr_right_db"});
    for (const auto& cell : result.cells) {
      if (!cell.ok) continue;
      csv.row({fmt(cell.c), cell.method, fmt(cell.report.ssnr_left_db),
               fmt(cell.report.ssnr_right_db)});
    }
  }
  {
    Csv itf(dir + "/fig2_itf.csv");
    Csv ild(dir + "/fig2_ild.csv");
    Csv ipd(dir + "/fig2_ipd.csv");
    itf.row({"c", "method", "interferer", "avg_itf_error", "itf_bound"});
    ild.row({"c", "method", "interferer", "ild_error_db"});
    ipd.row({"c", "method", "interferer", "ipd_error_rad"});
    for (const auto& cell : result.cells) {
      if (!cell.ok) continue;
      for (std::size_t i = 0; i < cell.report.interferers.size(); ++i) {
        const auto& im = cell.report.interferers[i];
        const std::string idx = std::to_string(i + 1);
        itf.row({fmt(cell.c), cell.method, idx, fmt(im.avg_itf_error), fmt(im.itf_bound)});
        ild.row({fmt(cell.c), cell.method, idx, fmt(im.ild_error_db)});
        ipd.row({fmt(cell.c), cell.method, idx, fmt(im.ipd_error_rad)});
      }
    }
  }
  {
    Csv csv(dir + "/fig3_solves.csv");
    csv.row({"c", "method", "total_solves"});
    for (const auto& cell : result.cells) {
      if (!cell.ok) continue;
      csv.row({fmt(cell.c), cell.method, std::to_string(cell.report.total_convex_solves)});
    }
  }

  // Hybrid switching log, one file per c value.
  for (const auto& cell : result.cells) {
    if (!cell.ok || cell.method != "hybrid") continue;
    Csv csv(dir + "/hybrid_switching_c" + fmt(cell.c) + ".csv");
    csv.row({"bin", "path", "solves", "converged"});
    for (std::size_t k = 0; k < cell.filters.size(); ++k) {
      const FilterBin& fb = cell.filters[k];
      csv.row({std::to_string(k), std::string(1, fb.path), std::to_string(fb.solves),
               fb.converged ? "1" : "0"});
    }
  }
}

}  // namespace rbb
