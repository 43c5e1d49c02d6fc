#pragma once

#include "ipsd/signal.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ipsd {

enum class CleanFamily { bandmix, period2, file };

// One frequency band contributing sinusoids to the band-mix family.
struct CleanComponent {
  double freq_lo_hz = 0.5;
  double freq_hi_hz = 4.0;
  double amplitude = 1.0;
};

// Rhythmic-band defaults: delta, theta, alpha, beta.
std::vector<CleanComponent> default_bands();

struct CleanSpec {
  CleanFamily family = CleanFamily::bandmix;
  double duration_s = 10.0;
  double sample_rate_hz = 256.0;
  std::vector<CleanComponent> components = default_bands();
  int sinusoids_per_component = 4;
  double period2_amplitude = 1.0;
  std::string file_path;

  std::size_t length() const;
};

// bandmix: random-phase sinusoids in the given bands with 1/f amplitude
// decay. period2: alternating +-a. file: loaded verbatim.
Signal gen_clean(const CleanSpec& spec, std::mt19937_64& rng);

enum class NoiseKind { wgn, emg_surrogate, file };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::wgn;
  double target_snr_db = 0.0;
  std::string file_path;
};

Signal gen_wgn(std::size_t length, double sample_rate_hz, std::mt19937_64& rng);

// Bursty band-limited (20-120 Hz) noise: Gaussian noise filtered by a
// windowed-sinc bandpass and modulated by on/off burst envelopes of
// 0.2-1.5 s at roughly 40% duty cycle, normalised to unit variance.
Signal gen_emg_surrogate(std::size_t length, double sample_rate_hz, std::mt19937_64& rng);

Signal gen_noise(const NoiseSpec& spec, std::size_t length, double sample_rate_hz,
                 std::mt19937_64& rng);

// Returns x + c*n with c chosen so the power ratio |x|^2 / |c n|^2 equals
// the target in dB exactly. Second element is c.
std::pair<Signal, double> mix_at_snr(const Signal& x, const Signal& n, double target_db);

// --- signal file I/O ---

// Text format: one decimal sample per line; round-trips doubles exactly.
void save_signal_text(const Signal& s, const std::string& path);
Signal load_signal_text(const std::string& path, double sample_rate_hz = 256.0);

// Raw format: little-endian float32 samples plus a text sidecar
// (path + ".meta") holding sample_rate_hz, length and dtype.
void save_signal_raw(const Signal& s, const std::string& path);
Signal load_signal_raw(const std::string& path);

// Dispatches on the ".f32" extension.
Signal load_signal(const std::string& path, double sample_rate_hz = 256.0);

}  // namespace ipsd
