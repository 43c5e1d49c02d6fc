#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ipsd/data.hpp"
#include "ipsd/errors.hpp"
#include "ipsd/metrics.hpp"
#include "ipsd/rng.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <vector>

using namespace ipsd;

TEST_CASE("period2 family is the exact alternating sequence") {
  CleanSpec spec;
  spec.family = CleanFamily::period2;
  spec.duration_s = 8.0 / 256.0;
  auto rng = derive_rng(71);
  const Signal s = gen_clean(spec, rng);
  CHECK(s.samples == std::vector<double>{1, -1, 1, -1, 1, -1, 1, -1});
}

TEST_CASE("bandmix with zero amplitudes is the zero signal") {
  CleanSpec spec;
  for (auto& c : spec.components) c.amplitude = 0.0;
  auto rng = derive_rng(72);
  const Signal s = gen_clean(spec, rng);
  for (double v : s.samples) CHECK(v == 0.0);
}

TEST_CASE("clean generation is deterministic in the seed") {
  CleanSpec spec;
  auto r1 = derive_rng(73);
  auto r2 = derive_rng(73);
  CHECK(gen_clean(spec, r1).samples == gen_clean(spec, r2).samples);
}

TEST_CASE("mixing at 0 dB with unit-power inputs keeps the noise unscaled") {
  Signal x, n;
  x.samples = {1, -1, 1, -1};
  n.samples = {-1, 1, -1, 1};
  const auto [mixed, c] = mix_at_snr(x, n, 0.0);
  CHECK(c == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mixing at -5 dB boosts the noise power tenfold-rooted") {
  Signal x, n;
  x.samples = {1, 1, 1, 1};
  n.samples = {1, -1, 1, -1};
  const auto [mixed, c] = mix_at_snr(x, n, -5.0);
  CHECK(c * c == doctest::Approx(std::pow(10.0, 0.5)).epsilon(1e-12));
}

TEST_CASE("mixing achieves the requested ratio to nano-dB accuracy") {
  auto rng = derive_rng(74);
  CleanSpec spec;
  spec.duration_s = 1.0;
  for (double target : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
    const Signal x = gen_clean(spec, rng);
    const Signal n = gen_wgn(x.size(), 256.0, rng);
    const auto [mixed, c] = mix_at_snr(x, n, target);
    Signal scaled_noise;
    scaled_noise.samples.resize(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) scaled_noise.samples[i] = c * n.samples[i];
    double px = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      px += x.samples[i] * x.samples[i];
      pn += scaled_noise.samples[i] * scaled_noise.samples[i];
    }
    CHECK(10.0 * std::log10(px / pn) == doctest::Approx(target).epsilon(1e-10));
    CHECK(std::abs(snr_db(x, mixed) - target) < 1e-9);
  }
}

TEST_CASE("mixing rejects zero-power inputs") {
  Signal x, n;
  x.samples = {0, 0};
  n.samples = {1, 1};
  CHECK_THROWS_AS(mix_at_snr(x, n, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mix_at_snr(n, x, 0.0), std::invalid_argument);
}

TEST_CASE("bursty surrogate noise is unit variance and band-limited") {
  WelchConfig welch;
  for (int seed = 0; seed < 20; ++seed) {
    auto rng = derive_rng(75, {static_cast<std::uint64_t>(seed)});
    const Signal s = gen_emg_surrogate(2560, 256.0, rng);
    double mean = 0.0;
    for (double v : s.samples) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size());
    CHECK(var > 0.9);
    CHECK(var < 1.1);

    const Psd psd = welch_psd(s, welch);
    double in_band = 0.0, total = 0.0;
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
      total += psd.power[k];
      if (psd.freq_hz[k] >= 20.0 && psd.freq_hz[k] <= 120.0) in_band += psd.power[k];
    }
    CHECK(in_band / total >= 0.9);
  }
}

TEST_CASE("surrogate noise is deterministic in the seed") {
  auto r1 = derive_rng(76);
  auto r2 = derive_rng(76);
  CHECK(gen_emg_surrogate(512, 256.0, r1).samples == gen_emg_surrogate(512, 256.0, r2).samples);
}

TEST_CASE("snr examples") {
  Signal x, zero, close;
  x.samples = {3.0, 4.0};
  zero.samples = {0.0, 0.0};
  close.samples = {3.0, 4.5};
  CHECK(snr_db(x, zero) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(snr_db(x, close) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::isinf(snr_db(x, x)));
  CHECK(snr_db(x, x) > 0);
}

TEST_CASE("psnr examples and scale invariance") {
  Signal x, xhat;
  x.samples = {1.0, -2.0, 1.0, 0.0};
  xhat.samples = {0.0, -2.0, 1.0, 0.0};  // residual (1,0,0,0)
  CHECK(psnr_db(x, xhat) == doctest::Approx(10.0 * std::log10(16.0)).epsilon(1e-12));
  CHECK(std::isinf(psnr_db(x, x)));

  Signal xs, xhs;
  for (double v : x.samples) xs.samples.push_back(3.0 * v);
  for (double v : xhat.samples) xhs.samples.push_back(3.0 * v);
  CHECK(psnr_db(xs, xhs) == doctest::Approx(psnr_db(x, xhat)).epsilon(1e-12));
}

TEST_CASE("welch satisfies parseval on white noise") {
  WelchConfig cfg;
  for (int seed = 0; seed < 50; ++seed) {
    auto rng = derive_rng(77, {static_cast<std::uint64_t>(seed)});
    const Signal s = gen_wgn(2560, 256.0, rng);
    const Psd psd = welch_psd(s, cfg);
    const double df = psd.freq_hz[1] - psd.freq_hz[0];
    double integral = 0.0;
    for (double p : psd.power) integral += p * df;
    CHECK(integral > 0.9);
    CHECK(integral < 1.1);
  }
}

TEST_CASE("welch localises a pure tone to its bin") {
  Signal s;
  s.sample_rate_hz = 256.0;
  s.samples.resize(2560);
  for (std::size_t i = 0; i < s.size(); ++i)
    s.samples[i] = std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / 256.0);
  WelchConfig cfg;
  const Psd psd = welch_psd(s, cfg);
  std::size_t best = 0;
  for (std::size_t k = 1; k < psd.power.size(); ++k)
    if (psd.power[k] > psd.power[best]) best = k;
  CHECK(std::abs(psd.freq_hz[best] - 10.0) <= 256.0 / 256.0);
}

TEST_CASE("welch floors the zero signal") {
  Signal s;
  s.samples.assign(512, 0.0);
  WelchConfig cfg;
  const Psd psd = welch_psd(s, cfg);
  for (double p : psd.power) CHECK(p == cfg.psd_floor);
}

TEST_CASE("welch of one segment matches a naive dft periodogram") {
  auto rng = derive_rng(78);
  Signal s = gen_wgn(256, 256.0, rng);
  WelchConfig cfg;
  const Psd psd = welch_psd(s, cfg);

  // independent recomputation: O(n^2) dft of the detrended, windowed segment
  const std::size_t n = 256;
  double mean = 0.0;
  for (double v : s.samples) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> w(n), seg(n);
  double win_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
    seg[i] = (s.samples[i] - mean) * w[i];
    win_sq += w[i] * w[i];
  }
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * i) /
                         static_cast<double>(n);
      acc += seg[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    double want = std::norm(acc) / (256.0 * win_sq);
    if (k != 0 && k != n / 2) want *= 2.0;
    want = std::max(want, cfg.psd_floor);
    CHECK(psd.power[k] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("spectral mse is zero at equality and exact under doubling") {
  auto rng = derive_rng(79);
  const Signal x = gen_wgn(2560, 256.0, rng);
  WelchConfig cfg;
  CHECK(spectral_mse(x, x, cfg) == doctest::Approx(0.0));

  Signal doubled;
  doubled.sample_rate_hz = x.sample_rate_hz;
  for (double v : x.samples) doubled.samples.push_back(2.0 * v);
  const double offset = 10.0 * std::log10(4.0);
  CHECK(spectral_mse(x, doubled, cfg) == doctest::Approx(offset * offset).epsilon(1e-9));
  CHECK(spectral_mse(doubled, x, cfg) == doctest::Approx(spectral_mse(x, doubled, cfg)));
}

TEST_CASE("welch rejects too-short signals") {
  Signal s;
  s.samples.assign(100, 1.0);
  WelchConfig cfg;
  CHECK_THROWS_AS(welch_psd(s, cfg), std::invalid_argument);
}

TEST_CASE("text signal files round-trip doubles exactly") {
  auto rng = derive_rng(80);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Signal s;
  s.sample_rate_hz = 128.0;
  s.samples.resize(300);
  for (auto& v : s.samples) v = gauss(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
  s.samples[0] = 0.0;
  s.samples[1] = -0.0;
  s.samples[2] = 1e-300;

  const auto dir = std::filesystem::temp_directory_path() / "ipsd_data_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "sig.txt").string();
  save_signal_text(s, path);
  const Signal back = load_signal_text(path, 128.0);
  CHECK(back.samples == s.samples);
}

TEST_CASE("raw signal files carry float32 samples and sidecar metadata") {
  Signal s;
  s.sample_rate_hz = 512.0;
  s.samples = {1.5, -2.25, 0.125, 3.0};
  const auto dir = std::filesystem::temp_directory_path() / "ipsd_data_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "sig.f32").string();
  save_signal_raw(s, path);
  const Signal back = load_signal(path);
  CHECK(back.sample_rate_hz == 512.0);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(back.samples[i] == s.samples[i]);  // these values are float-exact
}

TEST_CASE("io errors carry the offending path") {
  try {
    load_signal_text("/nonexistent/ipsd.txt");
    CHECK(false);
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/ipsd.txt") != std::string::npos);
  }
}
