// Copyright 2026 the rbb-toolkit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rbb/scene.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rbb/rng.hpp"

using namespace rbb;

namespace {

AtfOptions free_field() {
  AtfOptions opts;
  opts.head_shadow = false;
  return opts;
}

SceneConfig two_interferer_scene() {
  SceneConfig scene;
  scene.target = {0.0, SourceKind::white, 1.0, ""};
  scene.interferers = {{60.0, SourceKind::white, 1.0, ""},
                       {-45.0, SourceKind::white, 0.5, ""}};
  scene.diffuse_level = 0.02;
  return scene;
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("broadside atf has equal elements") {
  // Array laid out along the interaural axis only, so azimuth 0 is exactly
  // broadside and every relative delay vanishes.
  MicrophoneArray array;
  array.positions.resize(3, 4);
  for (int m = 0; m < 4; ++m) array.positions.col(m) << 0.0, 0.08 - 0.05 * m, 0.0;
  array.left_ref = 0;
  array.right_ref = 3;
  const CVector a = synth_atf(array, 0.0, 3000.0, free_field());
  for (int m = 1; m < array.size(); ++m) {
    CHECK(std::abs(a(m) - a(0)) < 1e-12);
  }
  // The default geometry keeps the two reference mics at the same front
  // offset, so the references agree at azimuth 0 as well.
  const auto deflt = MicrophoneArray::default_binaural();
  const CVector ad = synth_atf(deflt, 0.0, 3000.0, free_field());
  CHECK(std::abs(ad(deflt.left_ref) - ad(deflt.right_ref)) < 1e-12);
}

TEST_CASE("endfire pair at 1 kHz is out of phase by pi") {
  // Two mics 0.1715 m apart along the interaural axis; 2 pi f d / c = pi.
  MicrophoneArray array;
  array.positions.resize(3, 2);
  array.positions.col(0) << 0.0, 0.17150, 0.0;
  array.positions.col(1) << 0.0, 0.0, 0.0;
  array.left_ref = 0;
  array.right_ref = 1;
  const CVector a = synth_atf(array, 90.0, 1000.0, free_field());
  const double phase = std::abs(std::arg(a(0) / a(1)));
  CHECK(phase == doctest::Approx(std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("dc atf is real and equals the gains") {
  const auto array = MicrophoneArray::default_binaural();
  const CVector a = synth_atf(array, 35.0, 0.0, free_field());
  for (int m = 0; m < array.size(); ++m) {
    CHECK(a(m).imag() == 0.0);
    CHECK(a(m).real() == doctest::Approx(1.0));
  }
}

TEST_CASE("atf magnitudes are frequency independent in pure free field") {
  const auto array = MicrophoneArray::default_binaural();
  for (double f : {100.0, 1000.0, 4000.0, 7900.0}) {
    const CVector a = synth_atf(array, -70.0, f, free_field());
    for (int m = 0; m < array.size(); ++m) CHECK(std::abs(a(m)) == doctest::Approx(1.0));
  }
}

TEST_CASE("head shadow attenuates only the far ear") {
  const auto array = MicrophoneArray::default_binaural();
  AtfOptions opts;  // shadow on
  const double f = 6000.0;
  const CVector a = synth_atf(array, 80.0, f, opts);  // source on the right
  const double expected = 1.0 / (1.0 + (f / 4000.0) * std::abs(std::sin(80.0 * std::numbers::pi / 180.0)));
  CHECK(std::abs(a(array.left_ref)) == doctest::Approx(expected));
  CHECK(std::abs(a(array.right_ref)) == doctest::Approx(1.0));
}

TEST_CASE("atf rejects out-of-range frequencies") {
  const auto array = MicrophoneArray::default_binaural();
  CHECK_THROWS_AS(synth_atf(array, 0.0, 9000.0, free_field()), std::invalid_argument);
  CHECK_THROWS_AS(synth_atf(array, 0.0, -1.0, free_field()), std::invalid_argument);
}

TEST_CASE("diffuse coherence limits and zero crossing") {
  CHECK(diffuse_coherence(0.0, 2000.0) == doctest::Approx(1.0));
  CHECK(diffuse_coherence(0.17, 0.0) == doctest::Approx(1.0));
  // 2 pi * 1000 * 0.1715 / 343 = pi, so sinc vanishes.
  CHECK(diffuse_coherence(0.1715, 1000.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("noise cpsd with no sources is the self-noise floor") {
  const auto array = MicrophoneArray::default_binaural();
  SceneConfig scene;
  scene.target = {0.0, SourceKind::white, 1.0, ""};
  scene.diffuse_level = 0.0;
  const StftConfig stft;
  const CrossPsd pn = assemble_noise_cpsd(array, scene, stft, 40);
  // 40 dB SNR at the left reference and a unit-power target: 1e-4 identity.
  const CMatrix expect = 1e-4 * CMatrix::Identity(4, 4);
  CHECK((pn.p - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single interferer without diffuse or self-noise is rank one") {
  const auto array = MicrophoneArray::default_binaural();
  SceneConfig scene;
  scene.target = {0.0, SourceKind::white, 1.0, ""};
  scene.interferers = {{30.0, SourceKind::white, 2.0, ""}};
  scene.diffuse_level = 0.0;
  scene.head_shadow = false;
  MicrophoneArray quiet = array;
  quiet.self_noise_snr_db = 1e9;  // drive the floor to zero
  const StftConfig stft;
  const CrossPsd pn = assemble_noise_cpsd(quiet, scene, stft, 64);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(pn.p, Eigen::EigenvaluesOnly);
  const RVector ev = es.eigenvalues();
  CHECK(ev(3) == doctest::Approx(2.0 * 4.0));  // power x ||b||^2
  CHECK(std::abs(ev(2)) < 1e-10);
}

TEST_CASE("orthogonal interferers give the expected eigenvalues") {
  // Hand-built array geometry so the two ATFs are exactly orthogonal.
  MicrophoneArray array;
  array.positions.resize(3, 2);
  array.positions.col(0) << 0.0, 0.17150, 0.0;
  array.positions.col(1) << 0.0, 0.0, 0.0;
  array.left_ref = 0;
  array.right_ref = 1;
  array.self_noise_snr_db = 40.0;
  SceneConfig scene;
  scene.target = {0.0, SourceKind::white, 1.0, ""};
  scene.diffuse_level = 0.0;
  scene.head_shadow = false;
  // At bin 16 (1 kHz) the endfire phase difference is exactly pi, so the
  // broadside [1, 1] and endfire [-1, 1] steering vectors are orthogonal.
  scene.interferers = {{0.0, SourceKind::white, 1.0, ""},
                       {90.0, SourceKind::white, 1.0, ""}};
  const StftConfig stft;
  const int bin = 16;
  const CrossPsd pn = assemble_noise_cpsd(array, scene, stft, bin);
  AtfOptions opts = free_field();
  const CVector b1 = synth_atf(array, 0.0, stft.bin_freq_hz(bin, 16000.0), opts);
  const CVector b2 = synth_atf(array, 90.0, stft.bin_freq_hz(bin, 16000.0), opts);
  REQUIRE(std::abs(b1.dot(b2)) < 1e-9);
  const CMatrix expected = b1 * b1.adjoint() + b2 * b2.adjoint() +
                           1e-4 * CMatrix::Identity(2, 2);
  CHECK((pn.p - expected).cwiseAbs().maxCoeff() < 1e-12);
  // Eigensolver oracle: eigenvalues are the squared norms plus the floor.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(pn.p, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues()(1) == doctest::Approx(b1.squaredNorm() + 1e-4));
  CHECK(es.eigenvalues()(0) == doctest::Approx(b2.squaredNorm() + 1e-4));
}

TEST_CASE("assembled cpsd matrices are psd and additive") {
  const auto array = MicrophoneArray::default_binaural();
  const SceneConfig scene = two_interferer_scene();
  const StftConfig stft;
  for (int bin : {0, 1, 17, 64, 128}) {
    const CrossPsd pn = assemble_noise_cpsd(array, scene, stft, bin);
    const CrossPsd px = assemble_target_cpsd(array, scene, stft, bin);
    CHECK(linalg::is_psd(pn.p, 1e-9));
    CHECK(linalg::is_psd(px.p, 1e-9));
    // Rank-one target: second eigenvalue below 1e-8 of the first.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(px.p, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(2) <= 1e-8 * es.eigenvalues()(3));
    // P_y = P_x + P_n exactly by construction.
    const CMatrix py = px.p + pn.p;
    CHECK(linalg::is_psd(py, 1e-9));
  }
}

TEST_CASE("estimate from constant frames is the outer product plus loading") {
  CVector v(3);
  v << Complex(1, 0), Complex(0, 1), Complex(2, -1);
  const std::vector<CVector> frames(5, v);
  const CrossPsd est = estimate_cpsd_from_frames(frames, 1e-3);
  const double tr = v.squaredNorm();
  const CMatrix expect = v * v.adjoint() + 1e-3 * (tr / 3.0) * CMatrix::Identity(3, 3);
  CHECK((est.p - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(est.condition_number > 1.0);
}

TEST_CASE("estimate rejects an empty frame list") {
  CHECK_THROWS_AS(estimate_cpsd_from_frames({}, 1e-6), std::invalid_argument);
}

TEST_CASE("white complex noise estimate converges to sigma^2 I") {
  DetRng rng(1234);
  const double sigma2 = 0.5;
  std::vector<CVector> frames;
  frames.reserve(100000);
  for (int t = 0; t < 100000; ++t) {
    CVector y(4);
    for (int m = 0; m < 4; ++m) y(m) = std::sqrt(sigma2) * rng.cgaussian();
    frames.push_back(std::move(y));
  }
  const CrossPsd est = estimate_cpsd_from_frames(frames, 0.0);
  const CMatrix expect = sigma2 * CMatrix::Identity(4, 4);
  CHECK((est.p - expect).cwiseAbs().maxCoeff() < 0.02 * sigma2);
  CHECK(linalg::is_psd(est.p, 1e-9));
}

TEST_CASE("ratf normalizes to the reference element") {
  const auto array = MicrophoneArray::default_binaural();
  const CVector a = synth_atf(array, 25.0, 3100.0, AtfOptions{});
  const CVector r = ratf(a, array.left_ref);
  CHECK(r(array.left_ref) == Complex(1.0, 0.0));
  CHECK(std::abs(r(2) - a(2) / a(array.left_ref)) < 1e-14);
}

TEST_CASE("predetermined grid has 23 azimuths and omits zero") {
  const auto grid = predetermined_grid_azimuths();
  CHECK(grid.size() == 23);
  for (double az : grid) {
    CHECK(az != 0.0);
    CHECK(az >= -180.0);
    CHECK(az < 180.0);
  }
  CHECK(grid.front() == doctest::Approx(-90.0));
}

TEST_CASE("negative powers are rejected") {
  const auto array = MicrophoneArray::default_binaural();
  SceneConfig scene = two_interferer_scene();
  scene.interferers[0].power = -1.0;
  const StftConfig stft;
  CHECK_THROWS_AS(assemble_noise_cpsd(array, scene, stft, 10), std::invalid_argument);
}

TEST_CASE("speech-shaped psd is normalized to the source power") {
  const StftConfig stft;
  SourceSpec spec{0.0, SourceKind::speech_shaped, 2.0, ""};
  double mean = 0.0;
  for (int k = 0; k < stft.num_bins(); ++k) {
    mean += source_psd(spec, stft.bin_freq_hz(k, 16000.0), stft, 16000.0);
  }
  mean /= stft.num_bins();
  CHECK(mean == doctest::Approx(2.0).epsilon(1e-12));
  // Rolls off: PSD at 4 kHz well below PSD at 100 Hz.
  CHECK(source_psd(spec, 4000.0, stft, 16000.0) <
        0.2 * source_psd(spec, 100.0, stft, 16000.0));
}

TEST_CASE("synthesized source signals have roughly unit power") {
  const StftConfig stft;
  for (SourceKind kind : {SourceKind::white, SourceKind::speech_shaped}) {
    SourceSpec spec{0.0, kind, 1.0, ""};
    const auto x = synth_source_signal(spec, 160000, 99, stft, 16000.0);
    double power = 0.0;
    for (double v : x) power += v * v;
    power /= static_cast<double>(x.size());
    CHECK(power == doctest::Approx(1.0).epsilon(0.05));
  }
}

}  // TEST_SUITE
