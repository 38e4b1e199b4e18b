// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef RBB_STFT_HPP
#define RBB_STFT_HPP

#include <span>
#include <vector>

#include "rbb/linalg.hpp"

namespace rbb {

// Analysis/synthesis configuration: 10 ms frames at 16 kHz, 50% overlap,
// square-root Hann analysis and synthesis windows (COLA at this hop).
struct StftConfig {
  int frame_len = 160;
  int hop = 80;
  int fft_size = 256;

  int num_bins() const { return fft_size / 2 + 1; }
  double bin_freq_hz(int bin, double sample_rate_hz) const {
    return bin * sample_rate_hz / fft_size;
  }
  void validate() const;  // throws on violated invariants
};

// Periodic sqrt-Hann; squares sum to one at 50% overlap.
std::vector<double> sqrt_hann_window(int length);

struct StftGrid {
  int num_frames = 0;
  int num_bins = 0;
  // num_frames x num_bins, bins 0..fft_size/2 of the zero-padded frame DFT.
  CMatrix coef;
};

int stft_num_frames(std::size_t signal_len, const StftConfig& cfg);

StftGrid analyze(std::span<const double> signal, const StftConfig& cfg);

// Weighted overlap-add inverse. Interior samples of analyze->synthesize
// round-trip exactly (edge half-frames carry partial window sums).
std::vector<double> synthesize(const StftGrid& grid, const StftConfig& cfg);

}  // namespace rbb

#endif  // RBB_STFT_HPP
