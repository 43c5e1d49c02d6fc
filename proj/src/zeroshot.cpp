#include "ipsd/zeroshot.hpp"

#include "ipsd/errors.hpp"
#include "ipsd/rng.hpp"
#include "ipsd/worker_pool.hpp"

#include <cmath>
#include <stdexcept>

namespace ipsd {

BanditState::BanditState(int num_arms) {
  if (num_arms <= 0) throw std::invalid_argument("arm count must be positive");
  counts_.assign(static_cast<std::size_t>(num_arms), 0);
  sums_.assign(static_cast<std::size_t>(num_arms), 0.0);
}

void BanditState::record(int arm, double reward) {
  counts_.at(static_cast<std::size_t>(arm)) += 1;
  sums_.at(static_cast<std::size_t>(arm)) += reward;
}

double BanditState::mean(int arm) const {
  const long c = counts_.at(static_cast<std::size_t>(arm));
  if (c == 0) throw StateError("arm has not been pulled yet");
  return sums_[static_cast<std::size_t>(arm)] / static_cast<double>(c);
}

long BanditState::total_pulls() const {
  long total = 0;
  for (long c : counts_) total += c;
  return total;
}

bool BanditState::initialized() const {
  for (long c : counts_)
    if (c < 1) return false;
  return true;
}

int BanditState::leader() const {
  int best = 0;
  for (int a = 1; a < num_arms(); ++a)
    if (counts_[static_cast<std::size_t>(a)] > counts_[static_cast<std::size_t>(best)]) best = a;
  return best;
}

double ucb_index(const BanditState& state, int arm, const LilUcbConfig& cfg) {
  const long t_a = state.count(arm);
  if (t_a < 1) throw StateError("index is undefined for an unpulled arm");
  const double t = static_cast<double>(t_a);
  double inner = std::log((1.0 + cfg.epsilon) * t) / cfg.delta;
  if (inner < 1.0 + 1e-12) inner = 1.0 + 1e-12;
  const double radicand = 2.0 * cfg.sigma * cfg.sigma * (1.0 + cfg.epsilon) * std::log(inner) / t;
  return state.mean(arm) +
         (1.0 + cfg.beta) * (1.0 + std::sqrt(cfg.epsilon)) * std::sqrt(radicand);
}

int select_arm(const BanditState& state, const LilUcbConfig& cfg) {
  if (!state.initialized())
    throw StateError("every arm must be pulled once before selection");
  int best = 0;
  double best_index = ucb_index(state, 0, cfg);
  for (int a = 1; a < state.num_arms(); ++a) {
    const double idx = ucb_index(state, a, cfg);
    if (idx > best_index) {
      best = a;
      best_index = idx;
    }
  }
  return best;
}

StopDecision stopping_met(const BanditState& state, const LilUcbConfig& cfg) {
  const long total = state.total_pulls();
  for (int a = 0; a < state.num_arms(); ++a) {
    const long t_a = state.count(a);
    const double others = static_cast<double>(total - t_a);
    if (static_cast<double>(t_a) >= 1.0 + cfg.alpha() * others) return {a, false};
  }
  if (state.rounds_completed() >= cfg.max_rounds) return {state.leader(), true};
  return {std::nullopt, false};
}

BanditRun run_lil_ucb(int num_arms, const std::function<double(int, long)>& pull,
                      const LilUcbConfig& cfg) {
  BanditRun run{0, false, {}, BanditState(num_arms)};
  long pull_index = 0;
  for (int a = 0; a < num_arms; ++a, ++pull_index) {
    const double reward = pull(a, pull_index);
    run.state.record(a, reward);
    run.history.push_back({pull_index, a, reward, 0.0, run.state.leader()});
  }
  while (true) {
    const StopDecision stop = stopping_met(run.state, cfg);
    if (stop.winner) {
      run.best_arm = *stop.winner;
      run.capped = stop.capped;
      break;
    }
    const int arm = select_arm(run.state, cfg);
    const double index_value = ucb_index(run.state, arm, cfg);
    const double reward = pull(arm, pull_index);
    run.state.record(arm, reward);
    run.state.finish_round();
    run.history.push_back({pull_index, arm, reward, index_value, run.state.leader()});
    ++pull_index;
  }
  return run;
}

ZeroShotResult run_zero_shot(const Signal& s, const PartitionCatalog& catalog,
                             const ZeroShotConfig& cfg, std::uint64_t seed) {
  const WindowGrid grid(s.size(), catalog.window_len());
  const int num_arms = static_cast<int>(catalog.size());

  std::vector<PartitionChoice> arm_choices;
  arm_choices.reserve(static_cast<std::size_t>(num_arms));
  for (int a = 0; a < num_arms; ++a)
    arm_choices.push_back(shared_choice(grid, catalog, static_cast<std::size_t>(a)));

  const bool parallel_steps = cfg.workers != 1;
  auto pull_reward = [&](int arm, long pull_index) {
    auto rng = derive_rng(seed, {0x51, static_cast<std::uint64_t>(pull_index)});
    const TrainedDenoiser trained =
        train_to_convergence(s, arm_choices[static_cast<std::size_t>(arm)], catalog,
                             cfg.criterion, rng, cfg.loss, cfg.denoiser_lr, parallel_steps);
    return reward_from_trace(trained.trace);
  };

  // The init pulls do not depend on one another, so they can run
  // concurrently; their rewards are derived from the pull index alone.
  std::vector<double> init_rewards(static_cast<std::size_t>(num_arms));
  parallel_for(
      static_cast<std::size_t>(num_arms),
      [&](std::size_t a) {
        auto rng = derive_rng(seed, {0x51, static_cast<std::uint64_t>(a)});
        const TrainedDenoiser trained =
            train_to_convergence(s, arm_choices[a], catalog, cfg.criterion, rng, cfg.loss,
                                 cfg.denoiser_lr, false);
        init_rewards[a] = reward_from_trace(trained.trace);
      },
      cfg.workers);

  auto pull = [&](int arm, long pull_index) {
    if (pull_index < num_arms) return init_rewards[static_cast<std::size_t>(arm)];
    return pull_reward(arm, pull_index);
  };

  const BanditRun run = run_lil_ucb(num_arms, pull, cfg.bandit);

  auto final_rng = derive_rng(seed, {0x52, static_cast<std::uint64_t>(run.best_arm)});
  const TrainedDenoiser final_net =
      train_to_convergence(s, arm_choices[static_cast<std::size_t>(run.best_arm)], catalog,
                           cfg.criterion, final_rng, cfg.loss, cfg.denoiser_lr, parallel_steps);

  ZeroShotResult result;
  result.denoised = denoise_rescaled(final_net, s);
  result.best_arm = run.best_arm;
  result.capped = run.capped;
  result.history = run.history;
  result.final_trace = final_net.trace;
  result.pull_counts.reserve(static_cast<std::size_t>(num_arms));
  for (int a = 0; a < num_arms; ++a) result.pull_counts.push_back(run.state.count(a));
  return result;
}

}  // namespace ipsd
