// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/scene.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rbb/rng.hpp"

namespace rbb {

namespace {

constexpr double kPi = std::numbers::pi;

// One-pole shaping filter for the speech-shaped source: flat to ~500 Hz,
// then rolling off, which is close enough to a long-term speech spectrum
// for trend experiments.
double speech_pole(double sample_rate_hz) {
  return std::exp(-2.0 * kPi * 500.0 / sample_rate_hz);
}

double shape_unnormalized(SourceKind kind, double freq_hz, double sample_rate_hz) {
  switch (kind) {
    case SourceKind::white:
      return 1.0;
    case SourceKind::speech_shaped: {
      const double rho = speech_pole(sample_rate_hz);
      const double w = 2.0 * kPi * freq_hz / sample_rate_hz;
      const double denom = 1.0 - 2.0 * rho * std::cos(w) + rho * rho;
      return (1.0 - rho) * (1.0 - rho) / denom;
    }
  }
  return 1.0;
}

double shape_mean_over_bins(SourceKind kind, const StftConfig& cfg, double fs) {
  double sum = 0.0;
  for (int k = 0; k < cfg.num_bins(); ++k) {
    sum += shape_unnormalized(kind, cfg.bin_freq_hz(k, fs), fs);
  }
  return sum / cfg.num_bins();
}

}  // namespace

void MicrophoneArray::validate() const {
  if (size() < 2) throw std::invalid_argument("array needs at least 2 microphones");
  if (left_ref == right_ref || left_ref < 0 || right_ref < 0 || left_ref >= size() ||
      right_ref >= size()) {
    throw std::invalid_argument("invalid reference microphone indices");
  }
}

MicrophoneArray MicrophoneArray::default_binaural() {
  MicrophoneArray array;
  array.positions.resize(3, 4);
  const double half_ear = 0.17 / 2.0;
  const double half_dev = 0.01 / 2.0;
  array.positions.col(0) << half_dev, half_ear, 0.0;    // left front (reference)
  array.positions.col(1) << -half_dev, half_ear, 0.0;   // left back
  array.positions.col(2) << -half_dev, -half_ear, 0.0;  // right back
  array.positions.col(3) << half_dev, -half_ear, 0.0;   // right front (reference)
  array.left_ref = 0;
  array.right_ref = 3;
  return array;
}

void SceneConfig::validate() const {
  auto check_azimuth = [](double az) {
    if (!(az >= -180.0 && az < 180.0)) {
      std::ostringstream msg;
      msg << "azimuth " << az << " outside [-180, 180)";
      throw std::invalid_argument(msg.str());
    }
  };
  check_azimuth(target.azimuth_deg);
  if (target.power < 0.0) throw std::invalid_argument("negative target power");
  for (const auto& src : interferers) {
    check_azimuth(src.azimuth_deg);
    if (src.power < 0.0) throw std::invalid_argument("negative interferer power");
  }
  if (diffuse_level < 0.0) throw std::invalid_argument("negative diffuse level");
  if (sample_rate_hz <= 0.0 || speed_of_sound <= 0.0) {
    throw std::invalid_argument("sample rate and speed of sound must be positive");
  }
}

CVector synth_atf(const MicrophoneArray& array, double azimuth_deg, double freq_hz,
                  const AtfOptions& opts) {
  array.validate();
  if (!(freq_hz >= 0.0 && freq_hz <= opts.sample_rate_hz / 2.0)) {
    std::ostringstream msg;
    msg << "frequency " << freq_hz << " outside [0, " << opts.sample_rate_hz / 2.0 << "]";
    throw std::invalid_argument(msg.str());
  }
  const double az = azimuth_deg * kPi / 180.0;
  Eigen::Vector3d direction(std::cos(az), -std::sin(az), 0.0);

  const double shadow_gain = 1.0 / (1.0 + (freq_hz / 4000.0) * std::abs(std::sin(az)));
  CVector atf(array.size());
  for (int m = 0; m < array.size(); ++m) {
    const double tau = array.positions.col(m).dot(direction) / opts.speed_of_sound;
    double gain = 1.0;
    if (opts.head_shadow) {
      const double y = array.positions.col(m).y();
      const bool contralateral = (azimuth_deg > 0.0 && y > 0.0) ||
                                 (azimuth_deg < 0.0 && y < 0.0);
      if (contralateral) gain = shadow_gain;
    }
    atf(m) = gain * std::polar(1.0, -2.0 * kPi * freq_hz * tau);
  }
  return atf;
}

CVector ratf(const CVector& atf, int ref_index) {
  if (ref_index < 0 || ref_index >= atf.size()) {
    throw std::invalid_argument("ratf reference index out of range");
  }
  if (atf(ref_index) == Complex(0.0, 0.0)) {
    throw std::invalid_argument("ratf reference element is zero");
  }
  return atf / atf(ref_index);
}

double diffuse_coherence(double distance_m, double freq_hz, double speed_of_sound) {
  if (distance_m < 0.0) throw std::invalid_argument("negative microphone distance");
  const double x = 2.0 * kPi * freq_hz * distance_m / speed_of_sound;
  if (x == 0.0) return 1.0;
  return std::sin(x) / x;
}

CMatrix diffuse_coherence_matrix(const MicrophoneArray& array, double freq_hz,
                                 double speed_of_sound) {
  const int m = array.size();
  CMatrix gamma(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double d = (array.positions.col(i) - array.positions.col(j)).norm();
      gamma(i, j) = diffuse_coherence(d, freq_hz, speed_of_sound);
    }
  }
  return gamma;
}

double source_psd(const SourceSpec& spec, double freq_hz, const StftConfig& cfg,
                  double sample_rate_hz) {
  const double mean = shape_mean_over_bins(spec.kind, cfg, sample_rate_hz);
  return spec.power * shape_unnormalized(spec.kind, freq_hz, sample_rate_hz) / mean;
}

std::vector<double> synth_source_signal(const SourceSpec& spec, std::size_t num_samples,
                                        std::uint64_t seed, const StftConfig& cfg,
                                        double sample_rate_hz) {
  DetRng rng(seed);
  std::vector<double> x(num_samples);
  switch (spec.kind) {
    case SourceKind::white:
      for (auto& v : x) v = rng.gaussian();
      break;
    case SourceKind::speech_shaped: {
      const double rho = speech_pole(sample_rate_hz);
      const double mean = shape_mean_over_bins(spec.kind, cfg, sample_rate_hz);
      double state = 0.0;
      const double b0 = (1.0 - rho) / std::sqrt(mean);
      for (auto& v : x) {
        state = b0 * rng.gaussian() + rho * state;
        v = state;
      }
      break;
    }
  }
  const double scale = std::sqrt(spec.power);
  for (auto& v : x) v *= scale;
  return x;
}

double self_noise_psd(const MicrophoneArray& array, const SceneConfig& scene,
                      const StftConfig& cfg) {
  AtfOptions opts{scene.sample_rate_hz, scene.speed_of_sound, scene.head_shadow};
  double received = 0.0;
  for (int k = 0; k < cfg.num_bins(); ++k) {
    const double f = cfg.bin_freq_hz(k, scene.sample_rate_hz);
    const CVector a = synth_atf(array, scene.target.azimuth_deg, f, opts);
    received += source_psd(scene.target, f, cfg, scene.sample_rate_hz) *
                std::norm(a(array.left_ref));
  }
  received /= cfg.num_bins();
  return received / std::pow(10.0, array.self_noise_snr_db / 10.0);
}

CrossPsd assemble_noise_cpsd(const MicrophoneArray& array, const SceneConfig& scene,
                             const StftConfig& cfg, int freq_bin) {
  array.validate();
  scene.validate();
  const double f = cfg.bin_freq_hz(freq_bin, scene.sample_rate_hz);
  AtfOptions opts{scene.sample_rate_hz, scene.speed_of_sound, scene.head_shadow};

  CMatrix p = CMatrix::Zero(array.size(), array.size());
  for (const auto& src : scene.interferers) {
    const CVector b = synth_atf(array, src.azimuth_deg, f, opts);
    p += source_psd(src, f, cfg, scene.sample_rate_hz) * (b * b.adjoint());
  }
  if (scene.diffuse_level > 0.0) {
    p += scene.diffuse_level *
         diffuse_coherence_matrix(array, f, scene.speed_of_sound);
  }
  p += self_noise_psd(array, scene, cfg) *
       CMatrix::Identity(array.size(), array.size());

  CrossPsd out;
  out.freq_bin = freq_bin;
  out.kind = PsdKind::noise;
  out.p = 0.5 * (p + p.adjoint()).eval();
  return out;
}

CrossPsd assemble_target_cpsd(const MicrophoneArray& array, const SceneConfig& scene,
                              const StftConfig& cfg, int freq_bin) {
  const double f = cfg.bin_freq_hz(freq_bin, scene.sample_rate_hz);
  AtfOptions opts{scene.sample_rate_hz, scene.speed_of_sound, scene.head_shadow};
  const CVector a = synth_atf(array, scene.target.azimuth_deg, f, opts);
  CrossPsd out;
  out.freq_bin = freq_bin;
  out.kind = PsdKind::target;
  out.p = source_psd(scene.target, f, cfg, scene.sample_rate_hz) * (a * a.adjoint());
  return out;
}

CrossPsd estimate_cpsd_from_frames(const std::vector<CVector>& frames, double loading,
                                   int freq_bin, PsdKind kind) {
  if (frames.empty()) throw std::invalid_argument("cpsd estimation needs at least one frame");
  const Eigen::Index m = frames.front().size();
  CMatrix p = CMatrix::Zero(m, m);
  for (const auto& y : frames) {
    if (y.size() != m) throw std::invalid_argument("inconsistent frame dimensions");
    p.noalias() += y * y.adjoint();
  }
  p /= static_cast<double>(frames.size());
  p = 0.5 * (p + p.adjoint()).eval();
  const double tr = p.real().trace();
  p += loading * (tr / static_cast<double>(m)) * CMatrix::Identity(m, m);

  CrossPsd out;
  out.freq_bin = freq_bin;
  out.kind = kind;
  out.p = p;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(out.p, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<double> predetermined_grid_azimuths() {
  std::vector<double> grid;
  for (int k = 0; k < 24; ++k) {
    double az = -90.0 + 15.0 * k;
    if (az >= 180.0) az -= 360.0;
    if (az == 0.0) continue;  // same direction as the target
    grid.push_back(az);
  }
  return grid;
}

}  // namespace rbb
