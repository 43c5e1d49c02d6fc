#pragma once

#include "ipsd/data.hpp"
#include "ipsd/denoiser.hpp"
#include "ipsd/metrics.hpp"
#include "ipsd/policy.hpp"
#include "ipsd/signal.hpp"
#include "ipsd/zeroshot.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ipsd {

struct DatasetConfig {
  CleanSpec clean;
  NoiseSpec noise;
  int num_signals = 10;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct DatasetEntry {
  std::string id;
  Signal clean;
  Signal noise;
  Signal mixed;
  double mix_scale = 1.0;
  double input_snr_db = 0.0;
  bool is_train = true;
};

struct Dataset {
  DatasetConfig config;
  std::vector<DatasetEntry> entries;

  std::vector<Signal> train_mixed() const;
  std::vector<const DatasetEntry*> test_entries() const;
};

// Deterministic in the seed; the train/test assignment is a seeded shuffle
// with floor(train_fraction * n) training signals.
Dataset generate_dataset(const DatasetConfig& cfg);

MetricRecord compute_metrics(const std::string& id, const Signal& clean, const Signal& mixed,
                             const Signal& denoised, const WelchConfig& welch);

struct MethodSummary {
  std::string method;
  std::vector<MetricRecord> per_signal;
  double snr_mean = 0.0, snr_std = 0.0;
  double psnr_mean = 0.0, psnr_std = 0.0;
  double smse_mean = 0.0, smse_std = 0.0;
};

MethodSummary summarise(const std::string& method, std::vector<MetricRecord> records);

struct AblationConfig {
  DatasetConfig data;
  std::size_t window_len = 8;
  TrainConfig train = TrainConfig::desk_scale();
  ConvergenceCriterion criterion;
  LilUcbConfig bandit;
  WelchConfig welch;
  int workers = 0;
};

// Fixed-rule baseline (interleaved partition), the learned-policy pipeline,
// and the bandit zero-shot pipeline on the same dataset and seeds. Rows come
// back in that order.
std::vector<MethodSummary> run_ablation(const AblationConfig& cfg);

}  // namespace ipsd
