#pragma once

#include "ipsd/denoiser.hpp"
#include "ipsd/signal.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ipsd {

// Best-arm identification settings (lil'UCB confidence bounds).
struct LilUcbConfig {
  double beta = 1.0;
  double sigma = 0.008;   // sub-Gaussian scale of the per-pull reward noise
  double epsilon = 0.01;
  double delta = 0.55e-4;
  int max_rounds = 500;   // selection rounds after the one-pull-per-arm init

  double alpha() const {
    const double a = (2.0 + beta) / beta;
    return a * a;
  }
};

// Pull counts and running reward sums per arm. Means are kept as sum/count
// so the empirical mean is exact.
class BanditState {
 public:
  explicit BanditState(int num_arms);

  void record(int arm, double reward);

  int num_arms() const { return static_cast<int>(counts_.size()); }
  long count(int arm) const { return counts_.at(static_cast<std::size_t>(arm)); }
  double mean(int arm) const;
  long total_pulls() const;
  long rounds_completed() const { return rounds_; }
  void finish_round() { ++rounds_; }
  bool initialized() const;  // every arm pulled at least once

  // Arm with the highest pull count; ties resolve to the lowest index.
  int leader() const;

 private:
  std::vector<long> counts_;
  std::vector<double> sums_;
  long rounds_ = 0;
};

// mean + (1+beta)(1+sqrt(eps)) * sqrt(2 sigma^2 (1+eps) ln(ln((1+eps)T)/delta) / T),
// natural logarithms. The inner logarithm argument is clamped just above 1 so
// the index stays defined for any delta at T = 1.
double ucb_index(const BanditState& state, int arm, const LilUcbConfig& cfg);

// Argmax of the index over arms; ties resolve to the lowest index.
// Requires every arm to have been pulled once.
int select_arm(const BanditState& state, const LilUcbConfig& cfg);

struct StopDecision {
  std::optional<int> winner;
  bool capped = false;
};

// An arm wins once its pull count reaches 1 + alpha * (pulls of all others).
// Hitting the round cap also stops, returning the current leader.
StopDecision stopping_met(const BanditState& state, const LilUcbConfig& cfg);

struct RoundRecord {
  long pull = 0;       // global pull counter, init pulls included
  int arm = 0;
  double reward = 0.0;
  double index_value = 0.0;  // selected arm's index at selection time (0 during init)
  int leader = 0;
};

struct BanditRun {
  int best_arm = 0;
  bool capped = false;
  std::vector<RoundRecord> history;
  BanditState state;
};

// Generic driver: pulls arms via `pull(arm, pull_index)` until the stopping
// rule or the cap fires. Init pulls run in index order.
BanditRun run_lil_ucb(int num_arms, const std::function<double(int, long)>& pull,
                      const LilUcbConfig& cfg);

struct ZeroShotConfig {
  LilUcbConfig bandit;
  ConvergenceCriterion criterion;
  DenoiserLoss loss = DenoiserLoss::full;
  double denoiser_lr = 1e-3;
  int workers = 0;  // parallelises the init pulls and each training step
};

struct ZeroShotResult {
  Signal denoised;
  int best_arm = 0;
  bool capped = false;
  std::vector<RoundRecord> history;
  std::vector<long> pull_counts;
  TrainTrace final_trace;  // from the winning arm's final training
};

// Window-shared partition search over the whole catalog: each arm applies one
// catalog entry to every window. Every pull trains a fresh denoiser to
// convergence on that partition and is rewarded by its converged pairing
// loss; the winner's partition trains the final network that denoises `s`.
ZeroShotResult run_zero_shot(const Signal& s, const PartitionCatalog& catalog,
                             const ZeroShotConfig& cfg, std::uint64_t seed);

}  // namespace ipsd
