// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_SCENE_HPP
#define RBB_SCENE_HPP

#include <string>
#include <vector>

#include "rbb/linalg.hpp"
#include "rbb/stft.hpp"

namespace rbb {

struct MicrophoneArray {
  Eigen::Matrix3Xd positions;  // meters, one column per microphone
  int left_ref = 0;
  int right_ref = 0;
  double self_noise_snr_db = 40.0;

  int size() const { return static_cast<int>(positions.cols()); }
  void validate() const;

  // Two 2-mic behind-the-ear devices: 0.17 m inter-ear spacing along y,
  // 0.01 m intra-device spacing along x; references are the front mics
  // (first and last).
  static MicrophoneArray default_binaural();
};

enum class SourceKind { white, speech_shaped };

struct SourceSpec {
  double azimuth_deg = 0.0;
  SourceKind kind = SourceKind::white;
  double power = 1.0;
  std::string ir_wav;  // optional measured impulse response per direction
};

struct SceneConfig {
  SourceSpec target;                    // 0 degrees by default
  std::vector<SourceSpec> interferers;  // r entries
  double diffuse_level = 0.01;
  double sample_rate_hz = 16000.0;
  double speed_of_sound = 343.0;
  bool head_shadow = true;
  void validate() const;
};

enum class PsdKind { noisy, noise, target };

struct CrossPsd {
  int freq_bin = 0;
  PsdKind kind = PsdKind::noise;
  CMatrix p;
  double condition_number = 0.0;  // reported for estimated matrices
};

struct AtfOptions {
  double sample_rate_hz = 16000.0;
  double speed_of_sound = 343.0;
  bool head_shadow = true;
};

// Far-field plane-wave ATF, element m = g_m * exp(-j 2 pi f tau_m) with
// tau_m = (position_m . unit_direction) / c. Azimuth 0 is the look
// direction (+x), positive azimuths lie on the right-hand side (-y).
// With head_shadow on, the contralateral device is attenuated by
// 1 / (1 + (f/4000) |sin az|) so ILDs are nonzero above ~3 kHz.
CVector synth_atf(const MicrophoneArray& array, double azimuth_deg, double freq_hz,
                  const AtfOptions& opts = {});

// RATF: ATF normalized to the reference element.
CVector ratf(const CVector& atf, int ref_index);

// Spherically isotropic coherence sinc(2 pi f d / c); 1 at d = 0 or f = 0.
double diffuse_coherence(double distance_m, double freq_hz, double speed_of_sound = 343.0);

CMatrix diffuse_coherence_matrix(const MicrophoneArray& array, double freq_hz,
                                 double speed_of_sound = 343.0);

// Analytic per-frequency power density of a unit-power source, normalized so
// the mean over the cfg's bins equals spec.power.
double source_psd(const SourceSpec& spec, double freq_hz, const StftConfig& cfg,
                  double sample_rate_hz);

// Seeded stationary source realization with unit average power times
// spec.power; deterministic for a fixed seed.
std::vector<double> synth_source_signal(const SourceSpec& spec, std::size_t num_samples,
                                        std::uint64_t seed, const StftConfig& cfg,
                                        double sample_rate_hz);

// Flat self-noise density per bin giving array.self_noise_snr_db at the left
// reference microphone relative to the received target power.
double self_noise_psd(const MicrophoneArray& array, const SceneConfig& scene,
                      const StftConfig& cfg);

// P_n = sum_i p_i b_i b_i^H + p_diffuse Gamma + p_self I   (model-based)
CrossPsd assemble_noise_cpsd(const MicrophoneArray& array, const SceneConfig& scene,
                             const StftConfig& cfg, int freq_bin);

// P_x = p_s a a^H (rank one)
CrossPsd assemble_target_cpsd(const MicrophoneArray& array, const SceneConfig& scene,
                              const StftConfig& cfg, int freq_bin);

// Sample mean of outer products plus loading * (tr/M) * I.
CrossPsd estimate_cpsd_from_frames(const std::vector<CVector>& frames, double loading,
                                   int freq_bin = 0, PsdKind kind = PsdKind::noise);

// 24-point azimuth grid at 15 degree spacing from -90, the 0-degree entry
// omitted; angles wrapped to [-180, 180).
std::vector<double> predetermined_grid_azimuths();

}  // namespace rbb

#endif  // RBB_SCENE_HPP
