#include "ipsd/data.hpp"

#include "ipsd/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ipsd {

std::vector<CleanComponent> default_bands() {
  return {{0.5, 4.0, 1.0}, {4.0, 8.0, 1.0}, {8.0, 12.0, 1.0}, {12.0, 30.0, 1.0}};
}

std::size_t CleanSpec::length() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

Signal gen_clean(const CleanSpec& spec, std::mt19937_64& rng) {
  if (spec.family == CleanFamily::file) return load_signal(spec.file_path, spec.sample_rate_hz);

  const std::size_t n = spec.length();
  if (n == 0) throw std::invalid_argument("clean signal length must be positive");
  Signal s;
  s.sample_rate_hz = spec.sample_rate_hz;
  s.samples.assign(n, 0.0);

  if (spec.family == CleanFamily::period2) {
    for (std::size_t i = 0; i < n; ++i)
      s.samples[i] = (i % 2 == 0) ? spec.period2_amplitude : -spec.period2_amplitude;
    return s;
  }

  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (const auto& comp : spec.components) {
    if (comp.amplitude < 0.0) throw std::invalid_argument("component amplitude must be >= 0");
    std::uniform_real_distribution<double> freq(comp.freq_lo_hz, comp.freq_hi_hz);
    for (int k = 0; k < spec.sinusoids_per_component; ++k) {
      const double f = freq(rng);
      const double ph = phase(rng);
      const double amp = comp.amplitude / f;  // 1/f spectral decay
      if (amp == 0.0) continue;
      const double w = 2.0 * std::numbers::pi * f / spec.sample_rate_hz;
      for (std::size_t i = 0; i < n; ++i)
        s.samples[i] += amp * std::cos(w * static_cast<double>(i) + ph);
    }
  }
  return s;
}

Signal gen_wgn(std::size_t length, double sample_rate_hz, std::mt19937_64& rng) {
  if (length == 0) throw std::invalid_argument("noise length must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Signal s;
  s.sample_rate_hz = sample_rate_hz;
  s.samples.resize(length);
  for (auto& v : s.samples) v = gauss(rng);
  return s;
}

namespace {

// Windowed-sinc FIR bandpass, Hamming window, odd tap count.
std::vector<double> bandpass_taps(double lo_hz, double hi_hz, double fs, int taps) {
  const int m = taps - 1;
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double f_lo = lo_hz / fs, f_hi = hi_hz / fs;
  for (int i = 0; i < taps; ++i) {
    const int k = i - m / 2;
    double lp_hi, lp_lo;
    if (k == 0) {
      lp_hi = 2.0 * f_hi;
      lp_lo = 2.0 * f_lo;
    } else {
      lp_hi = std::sin(2.0 * std::numbers::pi * f_hi * k) / (std::numbers::pi * k);
      lp_lo = std::sin(2.0 * std::numbers::pi * f_lo * k) / (std::numbers::pi * k);
    }
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / m);
    h[static_cast<std::size_t>(i)] = (lp_hi - lp_lo) * window;
  }
  return h;
}

std::vector<double> convolve_same(const std::vector<double>& x, const std::vector<double>& h) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(h.size());
  const int half = m / 2;
  std::vector<double> y(x.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
      const int j = i + half - k;
      if (j >= 0 && j < n) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

}  // namespace

Signal gen_emg_surrogate(std::size_t length, double sample_rate_hz, std::mt19937_64& rng) {
  if (length < 256) throw std::invalid_argument("surrogate length must be at least 256 samples");

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(length);
  for (auto& v : white) v = gauss(rng);
  const std::vector<double> band =
      convolve_same(white, bandpass_taps(20.0, 120.0, sample_rate_hz, 129));

  // On/off bursts: on 0.2-1.5 s, off drawn so the duty cycle is ~40%, with
  // short raised-cosine ramps at the burst edges.
  std::vector<double> envelope(length, 0.0);
  std::uniform_real_distribution<double> on_dur(0.2, 1.5);
  std::uniform_real_distribution<double> off_dur(0.3, 2.25);
  const std::size_t ramp = static_cast<std::size_t>(0.05 * sample_rate_hz);
  std::size_t pos = 0;
  bool on = rng() % 2 == 0;
  while (pos < length) {
    const double dur_s = on ? on_dur(rng) : off_dur(rng);
    const std::size_t dur = std::max<std::size_t>(1, static_cast<std::size_t>(dur_s * sample_rate_hz));
    if (on) {
      const std::size_t end = std::min(length, pos + dur);
      for (std::size_t i = pos; i < end; ++i) {
        double v = 1.0;
        const std::size_t from_start = i - pos;
        const std::size_t from_end = end - 1 - i;
        if (from_start < ramp)
          v = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(from_start) /
                                   static_cast<double>(ramp));
        if (from_end < ramp)
          v = std::min(v, 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(from_end) /
                                               static_cast<double>(ramp)));
        envelope[i] = v;
      }
    }
    pos += dur;
    on = !on;
  }

  Signal s;
  s.sample_rate_hz = sample_rate_hz;
  s.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) s.samples[i] = band[i] * envelope[i];

  // normalise to unit variance; an all-off envelope would be degenerate, so
  // fall back to the band-limited noise itself
  double mean = 0.0;
  for (double v : s.samples) mean += v;
  mean /= static_cast<double>(length);
  double var = 0.0;
  for (double v : s.samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(length);
  if (var < 1e-12) {
    s.samples = band;
    mean = 0.0;
    for (double v : s.samples) mean += v;
    mean /= static_cast<double>(length);
    var = 0.0;
    for (double v : s.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(length);
  }
  const double inv = 1.0 / std::sqrt(var);
  for (auto& v : s.samples) v = (v - mean) * inv;
  return s;
}

Signal gen_noise(const NoiseSpec& spec, std::size_t length, double sample_rate_hz,
                 std::mt19937_64& rng) {
  switch (spec.kind) {
    case NoiseKind::wgn:
      return gen_wgn(length, sample_rate_hz, rng);
    case NoiseKind::emg_surrogate:
      return gen_emg_surrogate(length, sample_rate_hz, rng);
    case NoiseKind::file: {
      Signal s = load_signal(spec.file_path, sample_rate_hz);
      if (s.size() < length)
        throw std::invalid_argument("noise file is shorter than the requested length");
      s.samples.resize(length);
      return s;
    }
  }
  throw std::invalid_argument("unknown noise kind");
}

std::pair<Signal, double> mix_at_snr(const Signal& x, const Signal& n, double target_db) {
  if (x.size() != n.size()) throw std::invalid_argument("clean and noise lengths differ");
  double px = 0.0, pn = 0.0;
  for (double v : x.samples) px += v * v;
  for (double v : n.samples) pn += v * v;
  if (px <= 0.0 || pn <= 0.0)
    throw std::invalid_argument("mixing requires both inputs to have nonzero power");
  const double c = std::sqrt(px / (pn * std::pow(10.0, target_db / 10.0)));
  Signal mixed;
  mixed.sample_rate_hz = x.sample_rate_hz;
  mixed.samples.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mixed.samples[i] = x.samples[i] + c * n.samples[i];
  return {std::move(mixed), c};
}

// ---------------------------------------------------------------------------
// File I/O

void save_signal_text(const Signal& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open signal file for writing");
  char buf[64];
  for (double v : s.samples) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << '\n';
  }
  if (!out.good()) throw IoError(path, "failed writing signal file");
}

Signal load_signal_text(const std::string& path, double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open signal file");
  Signal s;
  s.sample_rate_hz = sample_rate_hz;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      s.samples.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw IoError(path, "unparsable sample on line " + std::to_string(line_no));
    }
  }
  if (s.samples.empty()) throw IoError(path, "signal file contains no samples");
  return s;
}

void save_signal_raw(const Signal& s, const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw IoError(path, "cannot open signal file for writing");
  for (double v : s.samples) {
    const float f = static_cast<float>(v);
    std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    bin.write(reinterpret_cast<const char*>(bytes), 4);
  }
  if (!bin.good()) throw IoError(path, "failed writing signal file");

  const std::string meta_path = path + ".meta";
  std::ofstream meta(meta_path);
  if (!meta) throw IoError(meta_path, "cannot open sidecar for writing");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", s.sample_rate_hz);
  meta << "sample_rate_hz " << buf << '\n';
  meta << "length " << s.size() << '\n';
  meta << "dtype float32\n";
  if (!meta.good()) throw IoError(meta_path, "failed writing sidecar");
}

Signal load_signal_raw(const std::string& path) {
  const std::string meta_path = path + ".meta";
  std::ifstream meta(meta_path);
  if (!meta) throw IoError(meta_path, "cannot open sidecar");
  double rate = 0.0;
  std::size_t length = 0;
  std::string dtype;
  std::string key;
  while (meta >> key) {
    if (key == "sample_rate_hz")
      meta >> rate;
    else if (key == "length")
      meta >> length;
    else if (key == "dtype")
      meta >> dtype;
    else {
      std::string rest;
      std::getline(meta, rest);
    }
  }
  if (rate <= 0.0 || length == 0 || dtype != "float32")
    throw IoError(meta_path, "sidecar is missing sample_rate_hz, length or dtype");

  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw IoError(path, "cannot open signal file");
  Signal s;
  s.sample_rate_hz = rate;
  s.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    unsigned char bytes[4];
    bin.read(reinterpret_cast<char*>(bytes), 4);
    if (!bin.good()) throw IoError(path, "signal file ended before the declared length");
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
    s.samples[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return s;
}

Signal load_signal(const std::string& path, double sample_rate_hz) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".f32") return load_signal_raw(path);
  return load_signal_text(path, sample_rate_hz);
}

}  // namespace ipsd
