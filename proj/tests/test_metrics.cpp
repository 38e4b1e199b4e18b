// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rbb/rng.hpp"
#include "rbb/scene.hpp"

using namespace rbb;

namespace {

// Per-bin filters that multiply the input ITF by a fixed complex factor;
// channel 0 reads the left reference, the last channel the right one.
FilterTable itf_scaling_filters(int bins, int mics, Complex factor) {
  FilterTable table(bins);
  for (auto& fb : table) {
    fb.w_left = CVector::Zero(mics);
    fb.w_right = CVector::Zero(mics);
    fb.w_left(0) = std::conj(factor);
    fb.w_right(mics - 1) = 1.0;
  }
  return table;
}

std::vector<CVector> constant_atf_bins(int bins, const CVector& b) {
  return std::vector<CVector>(bins, b);
}

std::vector<double> constant_power_signal(std::size_t n, double power, std::uint64_t seed) {
  DetRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = std::sqrt(power) * rng.gaussian();
  return x;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("ssnr of a 10x power ratio is 10 dB") {
  const StftConfig cfg;
  const std::size_t n = 16000;
  std::vector<double> target(n), noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Same waveform in both so every frame has an exact 10x energy ratio.
    const double s = std::sin(2.0 * std::numbers::pi * 1000.0 * i / 16000.0);
    target[i] = std::sqrt(10.0) * s;
    noise[i] = s;
  }
  const std::vector<bool> mask(stft_num_frames(n, cfg), true);
  const auto out = ssnr_db(target, noise, mask, cfg);
  REQUIRE(out.has_value());
  CHECK(*out == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("ssnr clamps to 35 dB when the noise is silent") {
  const StftConfig cfg;
  const auto target = constant_power_signal(8000, 1.0, 5);
  const std::vector<double> noise(8000, 0.0);
  const std::vector<bool> mask(stft_num_frames(target.size(), cfg), true);
  const auto out = ssnr_db(target, noise, mask, cfg);
  REQUIRE(out.has_value());
  CHECK(*out == doctest::Approx(35.0));
}

TEST_CASE("halving the noise power raises ssnr by about 3.01 dB") {
  const StftConfig cfg;
  const auto target = constant_power_signal(16000, 1.0, 7);
  const auto noise = constant_power_signal(16000, 0.25, 11);
  std::vector<double> half = noise;
  for (auto& v : half) v *= std::numbers::sqrt2 / 2.0;
  const std::vector<bool> mask(stft_num_frames(target.size(), cfg), true);
  const double a = *ssnr_db(target, noise, mask, cfg);
  const double b = *ssnr_db(target, half, mask, cfg);
  CHECK(b - a == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("ssnr with no marked frames is undefined") {
  const StftConfig cfg;
  const auto target = constant_power_signal(1600, 1.0, 13);
  const auto noise = constant_power_signal(1600, 1.0, 17);
  const std::vector<bool> mask(stft_num_frames(target.size(), cfg), false);
  CHECK_FALSE(ssnr_db(target, noise, mask, cfg).has_value());
}

TEST_CASE("activity mask marks frames within 40 dB of the peak") {
  const StftConfig cfg;
  std::vector<double> x(1600, 0.0);
  // One loud frame and one soft-but-audible frame; the rest silent.
  for (int n = 0; n < cfg.frame_len; ++n) x[n] = 1.0;
  for (int n = 0; n < cfg.frame_len; ++n) x[800 + n] = 0.1;  // -20 dB
  const auto mask = activity_mask(x, cfg);
  CHECK(mask[0]);
  CHECK(mask[10]);  // the -20 dB frame starts at sample 800 = frame 10
  CHECK_FALSE(mask[5]);
}

TEST_CASE("ild error of an itf-preserving filter is zero") {
  const StftConfig cfg;
  CVector b(3);
  b << Complex(1.0, 0.2), Complex(0.4, -0.1), Complex(0.8, 0.5);
  const auto table = itf_scaling_filters(cfg.num_bins(), 3, Complex(1.0, 0.0));
  const auto bins = constant_atf_bins(cfg.num_bins(), b);
  const BandAverage out = ild_error_db(table, bins, cfg, 16000.0);
  CHECK(out.value == doctest::Approx(0.0));
  CHECK(out.bins_used > 0);
}

TEST_CASE("doubling the itf magnitude gives about 6.021 dB ild error") {
  const StftConfig cfg;
  CVector b(3);
  b << Complex(0.9, -0.3), Complex(0.4, 0.0), Complex(0.5, 0.6);
  const auto table = itf_scaling_filters(cfg.num_bins(), 3, Complex(2.0, 0.0));
  const auto bins = constant_atf_bins(cfg.num_bins(), b);
  const BandAverage out = ild_error_db(table, bins, cfg, 16000.0);
  CHECK(out.value == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("ild band covers bins 48..128 inclusive at the default grid") {
  const StftConfig cfg;
  CHECK(cfg.bin_freq_hz(48, 16000.0) == doctest::Approx(3000.0));
  CHECK(cfg.bin_freq_hz(128, 16000.0) == doctest::Approx(8000.0));
  CVector b(2);
  b << 1.0, Complex(0.0, 1.0);
  const auto table = itf_scaling_filters(cfg.num_bins(), 2, Complex(1.0, 0.0));
  const BandAverage out =
      ild_error_db(table, constant_atf_bins(cfg.num_bins(), b), cfg, 16000.0);
  CHECK(out.bins_used == 81);
}

TEST_CASE("bmvdr ild error matches the closed-form expression") {
  const auto array = MicrophoneArray::default_binaural();
  SceneConfig scene;
  scene.target = {0.0, SourceKind::white, 1.0, ""};
  scene.interferers = {{65.0, SourceKind::white, 1.0, ""}};
  const StftConfig cfg;
  AtfOptions opts;
  FilterTable table(cfg.num_bins());
  std::vector<CVector> a_bins(cfg.num_bins()), b_bins(cfg.num_bins());
  for (int k = 0; k < cfg.num_bins(); ++k) {
    const double f = cfg.bin_freq_hz(k, 16000.0);
    a_bins[k] = ratf(synth_atf(array, 0.0, f, opts), array.left_ref);
    b_bins[k] = ratf(synth_atf(array, 65.0, f, opts), array.left_ref);
    table[k] = bmvdr(assemble_noise_cpsd(array, scene, cfg, k).p, a_bins[k]);
  }
  const BandAverage out = ild_error_db(table, b_bins, cfg, 16000.0);
  double expect = 0.0;
  int used = 0;
  for (int k = 48; k <= 128; ++k) {
    const double target_db = 20.0 * std::log10(std::abs(a_bins[k](0) / a_bins[k](3)));
    const double in_db = 20.0 * std::log10(std::abs(b_bins[k](0) / b_bins[k](3)));
    expect += std::abs(target_db - in_db);
    ++used;
  }
  expect /= used;
  CHECK(out.bins_used == used);
  CHECK(out.value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ipd error examples") {
  const StftConfig cfg;
  CVector b(2);
  b << Complex(0.8, 0.1), Complex(0.3, -0.6);
  const auto bins = constant_atf_bins(cfg.num_bins(), b);
  SUBCASE("preserving filter gives zero") {
    const auto table = itf_scaling_filters(cfg.num_bins(), 2, Complex(1.0, 0.0));
    CHECK(ipd_error_rad(table, bins, cfg, 16000.0).value == doctest::Approx(0.0));
  }
  SUBCASE("sign flip gives pi") {
    const auto table = itf_scaling_filters(cfg.num_bins(), 2, Complex(-1.0, 0.0));
    CHECK(ipd_error_rad(table, bins, cfg, 16000.0).value ==
          doctest::Approx(std::numbers::pi));
  }
  SUBCASE("3 pi / 2 wraps to pi / 2") {
    const Complex rot = std::polar(1.0, 3.0 * std::numbers::pi / 2.0);
    const auto table = itf_scaling_filters(cfg.num_bins(), 2, rot);
    CHECK(ipd_error_rad(table, bins, cfg, 16000.0).value ==
          doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
  }
  SUBCASE("band covers bins 0..24 inclusive") {
    CHECK(cfg.bin_freq_hz(24, 16000.0) == doctest::Approx(1500.0));
    const auto table = itf_scaling_filters(cfg.num_bins(), 2, Complex(1.0, 0.0));
    CHECK(ipd_error_rad(table, bins, cfg, 16000.0).bins_used == 25);
  }
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(3.0 * std::numbers::pi / 2.0) ==
        doctest::Approx(-std::numbers::pi / 2.0));
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(0.1) == doctest::Approx(0.1));
}

TEST_CASE("average itf error of bmvdr at c = 1 equals the bound") {
  const auto array = MicrophoneArray::default_binaural();
  SceneConfig scene;
  scene.target = {0.0, SourceKind::white, 1.0, ""};
  scene.interferers = {{40.0, SourceKind::white, 1.0, ""}};
  const StftConfig cfg;
  AtfOptions opts;
  FilterTable table(cfg.num_bins());
  std::vector<CVector> a_bins(cfg.num_bins()), b_bins(cfg.num_bins());
  for (int k = 0; k < cfg.num_bins(); ++k) {
    const double f = cfg.bin_freq_hz(k, 16000.0);
    a_bins[k] = ratf(synth_atf(array, 0.0, f, opts), array.left_ref);
    b_bins[k] = ratf(synth_atf(array, 40.0, f, opts), array.left_ref);
    table[k] = bmvdr(assemble_noise_cpsd(array, scene, cfg, k).p, a_bins[k]);
  }
  const ItfAverage out = avg_itf_error(table, b_bins, a_bins, 1.0);
  CHECK(out.bins_excluded == 0);
  CHECK(out.avg_error == doctest::Approx(out.bound).epsilon(1e-9));
}

TEST_CASE("constant per-bin error averages to itself") {
  const StftConfig cfg;
  CVector b(2);
  b << Complex(1.0, 0.0), Complex(0.5, 0.5);
  // Offset the ITF by a fixed complex shift: error |delta| at every bin.
  const Complex delta(0.25, 0.0);
  const Complex in = b(0) / b(1);
  const Complex factor = (in + delta) / in;
  const auto table = itf_scaling_filters(cfg.num_bins(), 2, factor);
  const auto bins = constant_atf_bins(cfg.num_bins(), b);
  const ItfAverage out = avg_itf_error(table, bins, bins, 0.5);
  CHECK(out.avg_error == doctest::Approx(std::abs(delta)).epsilon(1e-12));
}

TEST_CASE("undefined itf bins are excluded and counted") {
  const StftConfig cfg;
  CVector b(2);
  b << Complex(1.0, 0.0), Complex(0.4, 0.2);
  FilterTable table = itf_scaling_filters(cfg.num_bins(), 2, Complex(1.0, 0.0));
  table[5].w_right.setZero();  // undefined output ITF at bin 5
  const auto bins = constant_atf_bins(cfg.num_bins(), b);
  const ItfAverage out = avg_itf_error(table, bins, bins, 0.3);
  CHECK(out.bins_excluded == 1);
  CHECK(out.bins_used == cfg.num_bins() - 1);
}

}  // TEST_SUITE
