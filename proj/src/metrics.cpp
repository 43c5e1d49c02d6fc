#include "ipsd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ipsd {

double snr_db(const Signal& x, const Signal& xhat) {
  if (x.size() != xhat.size()) throw std::invalid_argument("signal lengths differ");
  double px = 0.0, pr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    px += x.samples[i] * x.samples[i];
    const double r = x.samples[i] - xhat.samples[i];
    pr += r * r;
  }
  if (pr == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(px / pr);
}

double psnr_db(const Signal& x, const Signal& xhat) {
  if (x.size() != xhat.size()) throw std::invalid_argument("signal lengths differ");
  double peak = 0.0, pr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    peak = std::max(peak, std::abs(x.samples[i]));
    const double r = x.samples[i] - xhat.samples[i];
    pr += r * r;
  }
  if (pr == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = pr / static_cast<double>(x.size());
  return 10.0 * std::log10(peak * peak / mse);
}

std::string WelchConfig::canonical_string() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "welch;segment=%d;overlap=%.6g;window=hann;floor=%.6g",
                segment_len, overlap, psd_floor);
  return buf;
}

std::string WelchConfig::hash() const {
  // FNV-1a over the canonical description
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical_string()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if ((n & (n - 1)) != 0) throw std::invalid_argument("fft length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace

Psd welch_psd(const Signal& s, const WelchConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(cfg.segment_len);
  if (cfg.segment_len <= 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("welch segment length must be a positive power of two");
  if (cfg.overlap < 0.0 || cfg.overlap >= 1.0)
    throw std::invalid_argument("welch overlap must lie in [0, 1)");
  if (s.size() < n)
    throw std::invalid_argument("signal is shorter than one welch segment");

  const double fs = s.sample_rate_hz;
  const std::size_t hop =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround((1.0 - cfg.overlap) *
                                                                    static_cast<double>(n))));
  // periodic Hann window
  std::vector<double> window(n);
  double win_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n));
    win_sq += window[i] * window[i];
  }

  const std::size_t bins = n / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  std::size_t segments = 0;
  std::vector<std::complex<double>> buf(n);
  for (std::size_t start = 0; start + n <= s.size(); start += hop, ++segments) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += s.samples[start + i];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      buf[i] = std::complex<double>((s.samples[start + i] - mean) * window[i], 0.0);
    fft_radix2(buf);
    for (std::size_t k = 0; k < bins; ++k) {
      double p = std::norm(buf[k]) / (fs * win_sq);
      if (k != 0 && k != n / 2) p *= 2.0;  // one-sided spectrum
      acc[k] += p;
    }
  }

  Psd out;
  out.freq_hz.resize(bins);
  out.power.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out.freq_hz[k] = fs * static_cast<double>(k) / static_cast<double>(n);
    out.power[k] = std::max(acc[k] / static_cast<double>(segments), cfg.psd_floor);
  }
  return out;
}

double spectral_mse(const Signal& x, const Signal& xhat, const WelchConfig& cfg) {
  if (x.size() != xhat.size()) throw std::invalid_argument("signal lengths differ");
  const Psd px = welch_psd(x, cfg);
  const Psd ph = welch_psd(xhat, cfg);
  double acc = 0.0;
  for (std::size_t k = 0; k < px.power.size(); ++k) {
    const double d = 10.0 * std::log10(px.power[k]) - 10.0 * std::log10(ph.power[k]);
    acc += d * d;
  }
  return acc / static_cast<double>(px.power.size());
}

}  // namespace ipsd
