#include "ipsd/experiment.hpp"

#include "ipsd/rng.hpp"
#include "ipsd/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace ipsd {

std::vector<Signal> Dataset::train_mixed() const {
  std::vector<Signal> out;
  for (const auto& e : entries)
    if (e.is_train) out.push_back(e.mixed);
  return out;
}

std::vector<const DatasetEntry*> Dataset::test_entries() const {
  std::vector<const DatasetEntry*> out;
  for (const auto& e : entries)
    if (!e.is_train) out.push_back(&e);
  return out;
}

Dataset generate_dataset(const DatasetConfig& cfg) {
  if (cfg.num_signals <= 0) throw std::invalid_argument("dataset must contain at least one signal");
  if (cfg.train_fraction < 0.0 || cfg.train_fraction > 1.0)
    throw std::invalid_argument("train fraction must lie in [0, 1]");

  Dataset ds;
  ds.config = cfg;
  ds.entries.resize(static_cast<std::size_t>(cfg.num_signals));
  for (int i = 0; i < cfg.num_signals; ++i) {
    auto& e = ds.entries[static_cast<std::size_t>(i)];
    char id[32];
    std::snprintf(id, sizeof(id), "sig_%03d", i);
    e.id = id;
    auto clean_rng = derive_rng(cfg.seed, {0x61, static_cast<std::uint64_t>(i)});
    e.clean = gen_clean(cfg.clean, clean_rng);
    auto noise_rng = derive_rng(cfg.seed, {0x62, static_cast<std::uint64_t>(i)});
    e.noise = gen_noise(cfg.noise, e.clean.size(), cfg.clean.sample_rate_hz, noise_rng);
    auto [mixed, c] = mix_at_snr(e.clean, e.noise, cfg.noise.target_snr_db);
    e.mixed = std::move(mixed);
    e.mix_scale = c;
    e.input_snr_db = snr_db(e.clean, e.mixed);
  }

  // seeded shuffle, first floor(fraction*n) indices train
  std::vector<std::size_t> order(ds.entries.size());
  std::iota(order.begin(), order.end(), 0);
  auto split_rng = derive_rng(cfg.seed, {0x63});
  std::shuffle(order.begin(), order.end(), split_rng);
  const std::size_t n_train =
      static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(ds.entries.size()));
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    ds.entries[order[pos]].is_train = pos < n_train;
  return ds;
}

MetricRecord compute_metrics(const std::string& id, const Signal& clean, const Signal& mixed,
                             const Signal& denoised, const WelchConfig& welch) {
  MetricRecord rec;
  rec.id = id;
  rec.input_snr_db = snr_db(clean, mixed);
  rec.output_snr_db = snr_db(clean, denoised);
  rec.psnr_db = psnr_db(clean, denoised);
  rec.spectral_mse = spectral_mse(clean, denoised, welch);
  rec.welch_hash = welch.hash();
  return rec;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& std_dev) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  std_dev = std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

MethodSummary summarise(const std::string& method, std::vector<MetricRecord> records) {
  if (records.empty()) throw std::invalid_argument("cannot summarise an empty record set");
  MethodSummary s;
  s.method = method;
  std::vector<double> snr, psnr, smse;
  for (const auto& r : records) {
    snr.push_back(r.output_snr_db);
    psnr.push_back(r.psnr_db);
    smse.push_back(r.spectral_mse);
  }
  mean_std(snr, s.snr_mean, s.snr_std);
  mean_std(psnr, s.psnr_mean, s.psnr_std);
  mean_std(smse, s.smse_mean, s.smse_std);
  s.per_signal = std::move(records);
  return s;
}

std::vector<MethodSummary> run_ablation(const AblationConfig& cfg) {
  const Dataset ds = generate_dataset(cfg.data);
  const auto catalog = enumerate_catalog(cfg.window_len);
  const auto test = ds.test_entries();
  if (test.empty()) throw std::invalid_argument("ablation needs at least one test signal");

  // rule-based baseline: the interleaved partition everywhere
  std::vector<MetricRecord> id_records(test.size());
  parallel_for(
      test.size(),
      [&](std::size_t i) {
        const auto& e = *test[i];
        const WindowGrid grid(e.mixed.size(), cfg.window_len);
        auto rng = derive_rng(cfg.data.seed, {0x71, i});
        const auto trained =
            train_to_convergence(e.mixed, interleaved_choice(grid, catalog), catalog,
                                 cfg.criterion, rng, cfg.train.denoiser_loss,
                                 cfg.train.denoiser_lr);
        id_records[i] =
            compute_metrics(e.id, e.clean, e.mixed, denoise_rescaled(trained, e.mixed), cfg.welch);
      },
      cfg.workers);

  // learned partition policy, trained on the train split
  TrainConfig train_cfg = cfg.train;
  train_cfg.workers = cfg.workers;
  auto [policy, report] = train_ipsd(ds.train_mixed(), catalog, train_cfg, cfg.criterion,
                                     derive_rng(cfg.data.seed, {0x72})());
  std::vector<MetricRecord> policy_records(test.size());
  parallel_for(
      test.size(),
      [&](std::size_t i) {
        const auto& e = *test[i];
        auto rng = derive_rng(cfg.data.seed, {0x73, i});
        const Signal denoised = denoise_with_policy(policy, e.mixed, catalog, cfg.criterion, rng,
                                                    cfg.train.denoiser_loss,
                                                    cfg.train.denoiser_lr);
        policy_records[i] = compute_metrics(e.id, e.clean, e.mixed, denoised, cfg.welch);
      },
      cfg.workers);

  // zero-shot bandit per test signal
  std::vector<MetricRecord> zero_records(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& e = *test[i];
    ZeroShotConfig zs;
    zs.bandit = cfg.bandit;
    zs.criterion = cfg.criterion;
    zs.loss = cfg.train.denoiser_loss;
    zs.denoiser_lr = cfg.train.denoiser_lr;
    zs.workers = cfg.workers;
    const auto result = run_zero_shot(e.mixed, catalog, zs, derive_rng(cfg.data.seed, {0x74, i})());
    zero_records[i] = compute_metrics(e.id, e.clean, e.mixed, result.denoised, cfg.welch);
  }

  return {summarise("ID", std::move(id_records)), summarise("iPSD", std::move(policy_records)),
          summarise("iPSD-Zero", std::move(zero_records))};
}

}  // namespace ipsd
