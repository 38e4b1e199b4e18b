// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rbb {

namespace {

double frame_energy(std::span<const double> x, int start, int len) {
  double e = 0.0;
  for (int n = 0; n < len; ++n) e += x[start + n] * x[start + n];
  return e;
}

}  // namespace

std::vector<bool> activity_mask(std::span<const double> target_reference,
                                const StftConfig& cfg, double threshold_db) {
  const int frames = stft_num_frames(target_reference.size(), cfg);
  std::vector<double> energy(frames);
  double peak = 0.0;
  for (int k = 0; k < frames; ++k) {
    energy[k] = frame_energy(target_reference, k * cfg.hop, cfg.frame_len);
    peak = std::max(peak, energy[k]);
  }
  const double floor = peak * std::pow(10.0, -threshold_db / 10.0);
  std::vector<bool> mask(frames);
  for (int k = 0; k < frames; ++k) mask[k] = energy[k] > floor && peak > 0.0;
  return mask;
}

std::optional<double> ssnr_db(std::span<const double> filtered_target,
                              std::span<const double> filtered_noise,
                              const std::vector<bool>& mask, const StftConfig& cfg) {
  if (filtered_target.size() != filtered_noise.size()) {
    throw std::invalid_argument("ssnr inputs must have equal length");
  }
  const int frames = stft_num_frames(filtered_target.size(), cfg);
  if (static_cast<int>(mask.size()) < frames) {
    throw std::invalid_argument("activity mask shorter than the signal");
  }
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < frames; ++k) {
    if (!mask[k]) continue;
    const double ex = frame_energy(filtered_target, k * cfg.hop, cfg.frame_len);
    const double en = frame_energy(filtered_noise, k * cfg.hop, cfg.frame_len);
    double snr;
    if (en <= 0.0) {
      snr = 35.0;  // clamp rule covers silent-noise frames
    } else {
      snr = 10.0 * std::log10(ex / en);
      snr = std::clamp(snr, -10.0, 35.0);
    }
    sum += snr;
    ++used;
  }
  if (used == 0) return std::nullopt;
  return sum / used;
}

double wrap_angle(double radians) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

namespace {

template <typename PerBin>
BandAverage band_average(const FilterTable& filters, const std::vector<CVector>& b_bins,
                         const StftConfig& cfg, double fs, double lo_hz, double hi_hz,
                         PerBin per_bin) {
  if (filters.size() != b_bins.size()) {
    throw std::invalid_argument("filters and constraint vectors disagree in bin count");
  }
  BandAverage out;
  double sum = 0.0;
  for (std::size_t k = 0; k < filters.size(); ++k) {
    const double f = cfg.bin_freq_hz(static_cast<int>(k), fs);
    if (f < lo_hz || f > hi_hz) continue;
    const auto in = itf_in(b_bins[k]);
    const auto o = itf_out(filters[k], b_bins[k]);
    if (!in.has_value() || !o.has_value()) {
      ++out.bins_excluded;
      continue;
    }
    sum += per_bin(*o, *in);
    ++out.bins_used;
  }
  if (out.bins_used > 0) out.value = sum / out.bins_used;
  return out;
}

}  // namespace

BandAverage ild_error_db(const FilterTable& filters, const std::vector<CVector>& b_bins,
                         const StftConfig& cfg, double sample_rate_hz, double lo_hz,
                         double hi_hz) {
  return band_average(filters, b_bins, cfg, sample_rate_hz, lo_hz, hi_hz,
                      [](Complex out, Complex in) {
                        return std::abs(10.0 * std::log10(std::norm(out)) -
                                        10.0 * std::log10(std::norm(in)));
                      });
}

BandAverage ipd_error_rad(const FilterTable& filters, const std::vector<CVector>& b_bins,
                          const StftConfig& cfg, double sample_rate_hz, double lo_hz,
                          double hi_hz) {
  return band_average(filters, b_bins, cfg, sample_rate_hz, lo_hz, hi_hz,
                      [](Complex out, Complex in) {
                        return std::abs(wrap_angle(std::arg(out) - std::arg(in)));
                      });
}

ItfAverage avg_itf_error(const FilterTable& filters, const std::vector<CVector>& b_bins,
                         const std::vector<CVector>& a_bins, double c) {
  if (filters.size() != b_bins.size() || filters.size() != a_bins.size()) {
    throw std::invalid_argument("bin counts disagree");
  }
  ItfAverage out;
  double err_sum = 0.0;
  double bound_sum = 0.0;
  int bound_bins = 0;
  for (std::size_t k = 0; k < filters.size(); ++k) {
    bound_sum += bmvdr_itf_error(a_bins[k], b_bins[k]);
    ++bound_bins;
    const auto err = itf_error(filters[k], b_bins[k]);
    if (!err.has_value()) {
      ++out.bins_excluded;
      continue;
    }
    err_sum += *err;
    ++out.bins_used;
  }
  if (out.bins_used > 0) out.avg_error = err_sum / out.bins_used;
  if (bound_bins > 0) out.bound = c * bound_sum / bound_bins;
  return out;
}

}  // namespace rbb
