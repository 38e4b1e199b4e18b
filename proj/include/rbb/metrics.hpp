// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_METRICS_HPP
#define RBB_METRICS_HPP

#include <optional>
#include <span>
#include <vector>

#include "rbb/beamformer.hpp"
#include "rbb/stft.hpp"

namespace rbb {

// Ideal activity detector: frames whose ground-truth target energy exceeds
// the maximum frame energy minus threshold_db.
std::vector<bool> activity_mask(std::span<const double> target_reference,
                                const StftConfig& cfg, double threshold_db = 40.0);

// Segmental SNR over marked frames, each frame's ratio clamped to
// [-10, 35] dB; the target and noise components come from shadow-filtering
// the separated signals through identical filters. Empty when no frame is
// marked.
std::optional<double> ssnr_db(std::span<const double> filtered_target,
                              std::span<const double> filtered_noise,
                              const std::vector<bool>& mask, const StftConfig& cfg);

struct BandAverage {
  double value = 0.0;
  int bins_used = 0;
  int bins_excluded = 0;  // undefined ITF bins
};

// Per-bin |ILD_out - ILD_in| in dB, averaged over bins with center frequency
// in [lo_hz, hi_hz] (inclusive).
BandAverage ild_error_db(const FilterTable& filters, const std::vector<CVector>& b_bins,
                         const StftConfig& cfg, double sample_rate_hz,
                         double lo_hz = 3000.0, double hi_hz = 8000.0);

// Per-bin wrapped |angle(ITF_out) - angle(ITF_in)| in radians, averaged over
// bins with center frequency in [lo_hz, hi_hz].
BandAverage ipd_error_rad(const FilterTable& filters, const std::vector<CVector>& b_bins,
                          const StftConfig& cfg, double sample_rate_hz,
                          double lo_hz = 0.0, double hi_hz = 1500.0);

struct ItfAverage {
  double avg_error = 0.0;
  double bound = 0.0;  // c x frequency-average of the BMVDR ITF errors
  int bins_used = 0;
  int bins_excluded = 0;
};

// Frequency-average ITF error over all bins, paired with the c-scaled BMVDR
// bound computed from the target/constraint vectors.
ItfAverage avg_itf_error(const FilterTable& filters, const std::vector<CVector>& b_bins,
                         const std::vector<CVector>& a_bins, double c);

// Wrap an angle to (-pi, pi].
double wrap_angle(double radians);

struct InterfererMetrics {
  double avg_itf_error = 0.0;
  double itf_bound = 0.0;
  double ild_error_db = 0.0;
  double ipd_error_rad = 0.0;
};

struct MetricReport {
  std::string method;
  double c = 0.0;
  double ssnr_left_db = 0.0;
  double ssnr_right_db = 0.0;
  std::vector<InterfererMetrics> interferers;
  long total_convex_solves = 0;
};

}  // namespace rbb

#endif  // RBB_METRICS_HPP
