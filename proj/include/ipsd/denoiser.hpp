#pragma once

#include "ipsd/nn.hpp"
#include "ipsd/signal.hpp"

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace ipsd {

// Fully convolutional denoiser, channels 1 -> 48 -> 48 -> 1, kernel 3,
// padding 1, LeakyReLU after the first two layers. Accepts any input length.
class DenoiserNet {
 public:
  DenoiserNet();

  struct Trace {
    Conv1d::Cache c1, c2, c3;
    Mat a1, a2;  // pre-activations feeding the LeakyReLUs
  };

  Vec forward(const Vec& x, Trace* trace = nullptr) const;
  void backward(const Trace& trace, const Vec& grad_out);

  void init(std::mt19937_64& rng);
  void zero_grads();
  std::vector<ParamRef> params();

  static std::size_t parameter_count();  // 7297

  Conv1d& layer1() { return c1_; }
  Conv1d& layer2() { return c2_; }
  Conv1d& layer3() { return c3_; }

 private:
  Conv1d c1_, c2_, c3_;
};

// |f(l) - r|^2 + |f(r) - l|^2; symmetric in the two halves.
double n2n_loss(const DenoiserNet& net, const SubSignalPair& pair);

// |f(pi_l(s)) - pi_l(f(s))|^2 + |f(pi_r(s)) - pi_r(f(s))|^2: denoising and
// sub-sampling must commute on the clean content.
double consistency_loss(const DenoiserNet& net, const Signal& s, const PartitionChoice& choice,
                        const PartitionCatalog& catalog);

struct ConvergenceCriterion {
  int window = 10;
  double variance_threshold = 1e-6;
  int max_steps = 2000;
};

struct TrainTrace {
  std::vector<double> n2n;   // per-step pairing loss, normalised per sample
  std::vector<double> full;  // per-step total training loss, same scale
  bool converged = false;
  int steps = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(TrainTrace t)
      : std::runtime_error("denoiser training diverged to a non-finite loss"),
        trace(std::move(t)) {}
  TrainTrace trace;
};

enum class DenoiserLoss { n2n_only, full };

struct TrainedDenoiser {
  DenoiserNet net;
  TrainTrace trace;
  double scale = 1.0;  // the input was divided by this before training
};

// 1/std of the samples, or 1 when the variance is (numerically) zero.
double unit_variance_scale(std::span<const double> samples);

// Trains a freshly initialised denoiser on the pairing loss of an explicit
// pair of noisy realisations until the last-`window` losses have variance
// below the threshold or the step cap is reached. Both halves are divided by
// a common scale that brings them to unit variance.
TrainedDenoiser train_to_convergence(const SubSignalPair& pair,
                                     const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                                     double lr = 1e-3);

// Same, but the pair comes from partitioning `s`, and (in full mode) the
// training loss adds the two consistency terms. `parallel` splits the work
// of each step over two threads; results are identical either way.
TrainedDenoiser train_to_convergence(const Signal& s, const PartitionChoice& choice,
                                     const PartitionCatalog& catalog,
                                     const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                                     DenoiserLoss loss = DenoiserLoss::full, double lr = 1e-3,
                                     bool parallel = false);

// -(1/10) * sum of the last 10 per-step pairing losses.
double reward_from_trace(const TrainTrace& trace);

// Plain forward pass over the full signal, no rescaling.
Signal denoise(const DenoiserNet& net, const Signal& s);

// Forward pass in the trained network's normalised coordinates, with the
// training scale reapplied to the output.
Signal denoise_rescaled(const TrainedDenoiser& trained, const Signal& s);

}  // namespace ipsd
