#include "ipsd/policy.hpp"

#include "ipsd/rng.hpp"
#include "ipsd/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipsd {

PolicyNet::PolicyNet(int window_len, int num_actions, int gru_hidden, int fc_hidden)
    : window_len_(window_len),
      num_actions_(num_actions),
      g1_(window_len, gru_hidden),
      g2_(2 * gru_hidden, gru_hidden),
      f1_(2 * gru_hidden, fc_hidden),
      f2_(fc_hidden, fc_hidden),
      f3_(fc_hidden, num_actions) {
  if (window_len <= 0 || num_actions <= 0)
    throw std::invalid_argument("policy dimensions must be positive");
}

Mat PolicyNet::forward(const Mat& features, Trace* trace) const {
  if (features.rows() != window_len_)
    throw std::invalid_argument("feature rows must equal the window length");
  Trace local;
  Trace& t = trace ? *trace : local;
  Mat h = g1_.forward(features, trace ? &t.g1 : nullptr);
  h = g2_.forward(h, trace ? &t.g2 : nullptr);
  t.p1 = f1_.forward(h, trace ? &t.f1 : nullptr);
  h = relu(t.p1);
  t.p2 = f2_.forward(h, trace ? &t.f2 : nullptr);
  h = relu(t.p2);
  return f3_.forward(h, trace ? &t.f3 : nullptr);
}

void PolicyNet::backward(const Trace& trace, const Mat& grad_logits) {
  Mat g = f3_.backward(grad_logits, trace.f3);
  g = relu_backward(g, trace.p2);
  g = f2_.backward(g, trace.f2);
  g = relu_backward(g, trace.p1);
  g = f1_.backward(g, trace.f1);
  g = g2_.backward(g, trace.g2);
  g1_.backward(g, trace.g1);
}

void PolicyNet::init(std::mt19937_64& rng) {
  g1_.init(rng);
  g2_.init(rng);
  f1_.init(rng);
  f2_.init(rng);
  f3_.init(rng);
}

void PolicyNet::zero_grads() {
  g1_.zero_grads();
  g2_.zero_grads();
  f1_.zero_grads();
  f2_.zero_grads();
  f3_.zero_grads();
}

std::vector<ParamRef> PolicyNet::params() {
  std::vector<ParamRef> out;
  g1_.collect_params(out, "gru1");
  g2_.collect_params(out, "gru2");
  f1_.collect_params(out, "fc1");
  f2_.collect_params(out, "fc2");
  f3_.collect_params(out, "fc3");
  return out;
}

Mat window_features(const Signal& s, const WindowGrid& grid) {
  if (s.size() != grid.signal_len)
    throw std::invalid_argument("signal length does not match the window grid");
  const double scale = unit_variance_scale(s.samples);
  const Eigen::Index w = static_cast<Eigen::Index>(grid.window_len);
  const Eigen::Index k = static_cast<Eigen::Index>(grid.num_windows());
  Mat features(w, k);
  for (Eigen::Index col = 0; col < k; ++col)
    for (Eigen::Index row = 0; row < w; ++row)
      features(row, col) = s.samples[static_cast<std::size_t>(col * w + row)] * scale;
  return features;
}

SampledPartition sample_partition(const Mat& logits, std::mt19937_64& rng) {
  const Mat logp = log_softmax_cols(logits);
  SampledPartition out;
  out.choice.entry_per_window.resize(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index k = 0; k < logits.cols(); ++k) {
    const int a = sample_categorical(logp.col(k), rng);
    out.choice.entry_per_window[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(a);
    out.logprob += logp(a, k);
  }
  return out;
}

double logprob_of(const Mat& logits, const PartitionChoice& choice) {
  if (static_cast<Eigen::Index>(choice.num_windows()) != logits.cols())
    throw std::invalid_argument("choice length does not match the logits");
  const Mat logp = log_softmax_cols(logits);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < logits.cols(); ++k) {
    const std::uint32_t a = choice.entry_per_window[static_cast<std::size_t>(k)];
    if (a >= logits.rows()) throw std::invalid_argument("choice entry out of range");
    sum += logp(static_cast<Eigen::Index>(a), k);
  }
  return sum;
}

PartitionChoice argmax_choice(const Mat& logits) {
  PartitionChoice choice;
  choice.entry_per_window.resize(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index k = 0; k < logits.cols(); ++k) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < logits.rows(); ++a)
      if (logits(a, k) > logits(best, k)) best = a;
    choice.entry_per_window[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(best);
  }
  return choice;
}

TrainConfig TrainConfig::desk_scale() {
  TrainConfig cfg;
  cfg.policy_lr = 5e-3;
  cfg.batch_size = 16;
  cfg.total_updates = 500;
  return cfg;
}

namespace {

// d(-surrogate)/d(logits) for a weighted batch of score-function terms:
// sum_b w_b * (softmax(logits) - onehot(choice_b)) / B per window.
Mat score_grad(const Mat& logits, std::span<const PolicyRollout> rollouts,
               const std::vector<double>& weights) {
  const Mat logp = log_softmax_cols(logits);
  const Mat probs = logp.array().exp().matrix();
  Mat grad = Mat::Zero(logits.rows(), logits.cols());
  const double inv_b = 1.0 / static_cast<double>(rollouts.size());
  for (std::size_t b = 0; b < rollouts.size(); ++b) {
    if (weights[b] == 0.0) continue;
    const double w = weights[b] * inv_b;
    grad += w * probs;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      const auto a = static_cast<Eigen::Index>(
          rollouts[b].choice.entry_per_window[static_cast<std::size_t>(k)]);
      grad(a, k) -= w;
    }
  }
  return grad;
}

std::vector<double> advantages(std::span<const PolicyRollout> rollouts) {
  double mean = 0.0;
  for (const auto& r : rollouts) mean += r.reward;
  mean /= static_cast<double>(rollouts.size());
  std::vector<double> adv(rollouts.size());
  for (std::size_t b = 0; b < rollouts.size(); ++b) adv[b] = rollouts[b].reward - mean;
  return adv;
}

}  // namespace

void policy_update(PolicyNet& net, Adam& adam, const Mat& features,
                   std::span<const PolicyRollout> rollouts, const TrainConfig& cfg) {
  if (rollouts.empty()) throw std::invalid_argument("rollout batch must not be empty");
  const std::vector<double> adv = advantages(rollouts);

  const int epochs = cfg.objective == PolicyObjective::clipped ? cfg.clip_epochs : 1;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    PolicyNet::Trace trace;
    const Mat logits = net.forward(features, &trace);

    std::vector<double> weights(rollouts.size());
    if (cfg.objective == PolicyObjective::reinforce) {
      weights = adv;
    } else {
      for (std::size_t b = 0; b < rollouts.size(); ++b) {
        const double ratio = std::exp(logprob_of(logits, rollouts[b].choice) -
                                      rollouts[b].logprob);
        const bool clipped_out = (adv[b] >= 0.0 && ratio > 1.0 + cfg.clip_ratio) ||
                                 (adv[b] < 0.0 && ratio < 1.0 - cfg.clip_ratio);
        weights[b] = clipped_out ? 0.0 : adv[b] * ratio;
      }
    }

    const Mat grad = score_grad(logits, rollouts, weights);
    if (!grad.allFinite()) throw TrainingDiverged(TrainTrace{});
    net.zero_grads();
    net.backward(trace, grad);
    adam.step();
  }
}

std::pair<PolicyNet, PolicyTrainReport> train_ipsd(const std::vector<Signal>& trainset,
                                                   const PartitionCatalog& catalog,
                                                   const TrainConfig& cfg,
                                                   const ConvergenceCriterion& criterion,
                                                   std::uint64_t seed) {
  if (trainset.empty()) throw std::invalid_argument("training set must not be empty");
  const std::size_t len = trainset.front().size();
  for (const auto& s : trainset)
    if (s.size() != len)
      throw std::invalid_argument("all training signals must share one length");
  const WindowGrid grid(len, catalog.window_len());

  PolicyNet net(static_cast<int>(catalog.window_len()), static_cast<int>(catalog.size()));
  {
    auto init_rng = derive_rng(seed, {0x11});
    net.init(init_rng);
  }
  Adam adam(net.params(), AdamConfig{cfg.policy_lr});

  std::vector<Mat> features;
  features.reserve(trainset.size());
  for (const auto& s : trainset) features.push_back(window_features(s, grid));

  PolicyTrainReport report;
  for (int iter = 0; iter < cfg.total_updates; ++iter) {
    auto iter_rng = derive_rng(seed, {0x22, static_cast<std::uint64_t>(iter)});
    const std::size_t sig_idx =
        std::uniform_int_distribution<std::size_t>(0, trainset.size() - 1)(iter_rng);
    const Signal& s = trainset[sig_idx];
    const Mat& feats = features[sig_idx];

    const Mat logits = net.forward(feats);
    std::vector<PolicyRollout> rollouts(static_cast<std::size_t>(cfg.batch_size));
    for (auto& r : rollouts) {
      auto sampled = sample_partition(logits, iter_rng);
      r.choice = std::move(sampled.choice);
      r.logprob = sampled.logprob;
    }

    std::vector<double> steps(rollouts.size());
    parallel_for(
        rollouts.size(),
        [&](std::size_t b) {
          auto rng = derive_rng(seed, {0x33, static_cast<std::uint64_t>(iter), b});
          const TrainedDenoiser trained = train_to_convergence(
              s, rollouts[b].choice, catalog, criterion, rng, cfg.denoiser_loss, cfg.denoiser_lr);
          rollouts[b].reward = reward_from_trace(trained.trace);
          steps[b] = static_cast<double>(trained.trace.steps);
        },
        cfg.workers);

    policy_update(net, adam, feats, rollouts, cfg);

    IterationStats stats;
    stats.iteration = iter;
    double mean = 0.0, mean_steps = 0.0;
    for (std::size_t b = 0; b < rollouts.size(); ++b) {
      mean += rollouts[b].reward;
      mean_steps += steps[b];
    }
    mean /= static_cast<double>(rollouts.size());
    mean_steps /= static_cast<double>(rollouts.size());
    double var = 0.0;
    for (const auto& r : rollouts) var += (r.reward - mean) * (r.reward - mean);
    stats.mean_reward = mean;
    stats.reward_std = std::sqrt(var / static_cast<double>(rollouts.size()));
    stats.mean_steps = mean_steps;
    report.iterations.push_back(stats);

    if (cfg.plateau_window > 0 &&
        static_cast<int>(report.iterations.size()) > cfg.plateau_window) {
      const double past =
          report.iterations[report.iterations.size() - 1 - cfg.plateau_window].mean_reward;
      const double rel = std::abs(mean - past) / std::max(std::abs(past), 1e-12);
      if (rel < cfg.plateau_rel_change) {
        report.plateaued = true;
        break;
      }
    }
  }
  return {std::move(net), std::move(report)};
}

Signal denoise_with_policy(const PolicyNet& net, const Signal& s, const PartitionCatalog& catalog,
                           const ConvergenceCriterion& criterion, std::mt19937_64& rng,
                           DenoiserLoss loss, double denoiser_lr) {
  const WindowGrid grid(s.size(), catalog.window_len());
  const Mat logits = net.forward(window_features(s, grid));
  const PartitionChoice choice = argmax_choice(logits);
  const TrainedDenoiser trained =
      train_to_convergence(s, choice, catalog, criterion, rng, loss, denoiser_lr);
  return denoise_rescaled(trained, s);
}

}  // namespace ipsd
