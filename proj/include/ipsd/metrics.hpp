#pragma once

#include "ipsd/signal.hpp"

#include <string>
#include <vector>

namespace ipsd {

// Time-domain power ratio in dB: 10 log10(|x|^2 / |x - xhat|^2).
// An exact reconstruction yields +infinity.
double snr_db(const Signal& x, const Signal& xhat);

// Peak-referenced ratio in dB: 10 log10(max|x|^2 / (|x - xhat|^2 / L)).
double psnr_db(const Signal& x, const Signal& xhat);

struct WelchConfig {
  int segment_len = 256;
  double overlap = 0.5;       // fraction of segment_len
  double psd_floor = 1e-12;   // applied before any dB conversion

  std::string canonical_string() const;
  std::string hash() const;  // short stable identifier for reports
};

struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> power;  // one-sided density; integral approximates variance
};

// Averaged Hann-windowed periodograms over 50%-overlapping segments, each
// segment mean-detrended; one-sided density scaled so sum(power)*df matches
// the signal variance.
Psd welch_psd(const Signal& s, const WelchConfig& cfg);

// Mean over frequency bins of the squared difference of the two PSDs in dB.
double spectral_mse(const Signal& x, const Signal& xhat, const WelchConfig& cfg);

struct MetricRecord {
  std::string id;
  double input_snr_db = 0.0;
  double output_snr_db = 0.0;
  double psnr_db = 0.0;
  double spectral_mse = 0.0;
  std::string welch_hash;
};

}  // namespace ipsd
