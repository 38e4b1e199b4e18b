// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rbb {

namespace {

// FFTW plan creation is not thread-safe; execution on private buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(plan_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // time (n reals) -> bins 0..n/2
  void forward(const double* time, Complex* bins) {
    std::copy(time, time + n_, in_);
    fftw_execute(fwd_);
    for (int k = 0; k <= n_ / 2; ++k) bins[k] = Complex(out_[k][0], out_[k][1]);
  }

  // bins 0..n/2 -> time (n reals), includes the 1/n scaling
  void inverse(const Complex* bins, double* time) {
    for (int k = 0; k <= n_ / 2; ++k) {
      out_[k][0] = bins[k].real();
      out_[k][1] = bins[k].imag();
    }
    fftw_execute(inv_);
    const double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) time[i] = in_[i] * scale;
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace

void StftConfig::validate() const {
  if (frame_len <= 0 || hop <= 0 || fft_size <= 0) {
    throw std::invalid_argument("stft sizes must be positive");
  }
  if (hop * 2 != frame_len) {
    throw std::invalid_argument("hop must be frame_len/2 (50% overlap)");
  }
  if (fft_size < frame_len) {
    throw std::invalid_argument("fft_size must be >= frame_len");
  }
  if (fft_size % 2 != 0) {
    throw std::invalid_argument("fft_size must be even");
  }
}

std::vector<double> sqrt_hann_window(int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
    w[n] = std::sqrt(hann);
  }
  return w;
}

int stft_num_frames(std::size_t signal_len, const StftConfig& cfg) {
  if (signal_len < static_cast<std::size_t>(cfg.frame_len)) return 0;
  return static_cast<int>((signal_len - cfg.frame_len) / cfg.hop) + 1;
}

StftGrid analyze(std::span<const double> signal, const StftConfig& cfg) {
  cfg.validate();
  const int frames = stft_num_frames(signal.size(), cfg);
  if (frames < 1) {
    std::ostringstream msg;
    msg << "signal of " << signal.size() << " samples is shorter than one frame ("
        << cfg.frame_len << ")";
    throw std::invalid_argument(msg.str());
  }
  const std::vector<double> window = sqrt_hann_window(cfg.frame_len);

  StftGrid grid;
  grid.num_frames = frames;
  grid.num_bins = cfg.num_bins();
  grid.coef.resize(frames, grid.num_bins);

  RealFft fft(cfg.fft_size);
  std::vector<double> padded(cfg.fft_size, 0.0);  // zero padding at the frame tail
  std::vector<Complex> bins(grid.num_bins);
  for (int k = 0; k < frames; ++k) {
    const double* frame = signal.data() + static_cast<std::size_t>(k) * cfg.hop;
    for (int n = 0; n < cfg.frame_len; ++n) padded[n] = window[n] * frame[n];
    fft.forward(padded.data(), bins.data());
    for (int b = 0; b < grid.num_bins; ++b) grid.coef(k, b) = bins[b];
  }
  return grid;
}

std::vector<double> synthesize(const StftGrid& grid, const StftConfig& cfg) {
  cfg.validate();
  if (grid.num_bins != cfg.num_bins() || grid.coef.rows() != grid.num_frames ||
      grid.coef.cols() != grid.num_bins) {
    throw std::invalid_argument("grid dimensions do not match stft config");
  }
  if (grid.num_frames < 1) throw std::invalid_argument("empty grid");

  const std::vector<double> window = sqrt_hann_window(cfg.frame_len);
  std::vector<double> out(static_cast<std::size_t>(grid.num_frames - 1) * cfg.hop +
                              cfg.frame_len,
                          0.0);

  RealFft fft(cfg.fft_size);
  std::vector<Complex> bins(grid.num_bins);
  std::vector<double> time(cfg.fft_size);
  // Frames are independent; the overlap-add accumulation runs in frame order
  // so results are deterministic.
  for (int k = 0; k < grid.num_frames; ++k) {
    for (int b = 0; b < grid.num_bins; ++b) bins[b] = grid.coef(k, b);
    fft.inverse(bins.data(), time.data());
    double* dst = out.data() + static_cast<std::size_t>(k) * cfg.hop;
    for (int n = 0; n < cfg.frame_len; ++n) dst[n] += window[n] * time[n];
  }
  return out;
}

}  // namespace rbb
