#pragma once

#include "ipsd/denoiser.hpp"
#include "ipsd/nn.hpp"
#include "ipsd/signal.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ipsd {

// Per-window partition policy: two bidirectional GRU layers over the window
// sequence followed by three per-window fully connected layers producing one
// logit per catalog entry.
//   gru1: W -> 128 (64 per direction)   gru2: 128 -> 128
//   fc1: 128 -> 256 (ReLU)   fc2: 256 -> 256 (ReLU)   fc3: 256 -> actions
class PolicyNet {
 public:
  PolicyNet(int window_len, int num_actions, int gru_hidden = 64, int fc_hidden = 256);

  struct Trace {
    BidirGru::Cache g1, g2;
    Linear::Cache f1, f2, f3;
    Mat p1, p2;  // pre-activations of the ReLUs
  };

  // features: [W x K] -> logits [A x K], one column per window.
  Mat forward(const Mat& features, Trace* trace = nullptr) const;
  void backward(const Trace& trace, const Mat& grad_logits);

  void init(std::mt19937_64& rng);
  void zero_grads();
  std::vector<ParamRef> params();

  int window_len() const { return window_len_; }
  int num_actions() const { return num_actions_; }

 private:
  int window_len_, num_actions_;
  BidirGru g1_, g2_;
  Linear f1_, f2_, f3_;
};

// One column of raw samples per window, after scaling the whole signal to
// unit variance.
Mat window_features(const Signal& s, const WindowGrid& grid);

struct SampledPartition {
  PartitionChoice choice;
  double logprob = 0.0;
};

// Draws each window's entry independently from the softmax of its logits.
SampledPartition sample_partition(const Mat& logits, std::mt19937_64& rng);

// Log-probability the given logits assign to a stored choice. Reproduces the
// value from sample_partition exactly for the same logits and choice.
double logprob_of(const Mat& logits, const PartitionChoice& choice);

// Per-window argmax; ties resolve to the lowest catalog index.
PartitionChoice argmax_choice(const Mat& logits);

struct PolicyRollout {
  PartitionChoice choice;
  double logprob = 0.0;
  double reward = 0.0;
};

enum class PolicyObjective { reinforce, clipped };

struct TrainConfig {
  double policy_lr = 1e-4;
  int batch_size = 64;
  int total_updates = 20000;
  PolicyObjective objective = PolicyObjective::clipped;
  double clip_ratio = 0.2;
  int clip_epochs = 4;
  double denoiser_lr = 1e-3;
  DenoiserLoss denoiser_loss = DenoiserLoss::full;
  // Stop early when the mean reward's relative change over this many
  // iterations falls below the threshold.
  int plateau_window = 50;
  double plateau_rel_change = 1e-3;
  int workers = 0;  // 0 = hardware concurrency

  // Small-budget preset that still learns visibly: fewer updates need a
  // faster policy step than the full-run learning rate.
  static TrainConfig desk_scale();
};

// One policy-gradient update from a batch of rollouts sampled from
// `features`' logits. REINFORCE ascends mean[(R - baseline) log pi]; clipped
// mode runs `clip_epochs` passes of the clipped-ratio surrogate against the
// stored log-probabilities. The baseline is the batch mean reward.
void policy_update(PolicyNet& net, Adam& adam, const Mat& features,
                   std::span<const PolicyRollout> rollouts, const TrainConfig& cfg);

struct IterationStats {
  int iteration = 0;
  double mean_reward = 0.0;
  double reward_std = 0.0;
  double mean_steps = 0.0;
};

struct PolicyTrainReport {
  std::vector<IterationStats> iterations;
  bool plateaued = false;
};

// Alternating optimisation: sample a signal, sample a batch of partitions,
// train one fresh denoiser per partition to convergence (concurrently),
// reward each by its converged pairing loss, update the policy.
std::pair<PolicyNet, PolicyTrainReport> train_ipsd(const std::vector<Signal>& trainset,
                                                   const PartitionCatalog& catalog,
                                                   const TrainConfig& cfg,
                                                   const ConvergenceCriterion& criterion,
                                                   std::uint64_t seed);

// Deterministic inference: argmax partition, train a denoiser to convergence
// on it, denoise the full signal.
Signal denoise_with_policy(const PolicyNet& net, const Signal& s, const PartitionCatalog& catalog,
                           const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                           DenoiserLoss loss = DenoiserLoss::full, double denoiser_lr = 1e-3);

}  // namespace ipsd
