// Command-line driver: synthetic data generation, policy training, policy
// and zero-shot denoising, the partitioning ablation, and metric reports.
#include <CLI11.hpp>
#include <json.hpp>

#include "ipsd/data.hpp"
#include "ipsd/denoiser.hpp"
#include "ipsd/errors.hpp"
#include "ipsd/experiment.hpp"
#include "ipsd/metrics.hpp"
#include "ipsd/policy.hpp"
#include "ipsd/rng.hpp"
#include "ipsd/signal.hpp"
#include "ipsd/zeroshot.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace ipsd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Infinite metric values are legal (exact reconstruction) and must survive
// serialisation, which JSON numbers cannot do.
ordered_json json_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "infinity" : "-infinity";
  return v;
}

std::string csv_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt17(v);
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open file for writing");
  out << contents;
  if (!out.good()) throw IoError(path.string(), "failed writing file");
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string config_comment(const ordered_json& config) {
  return "# config " + config.dump() + "\n";
}

ordered_json metric_record_json(const MetricRecord& rec) {
  return ordered_json{{"id", rec.id},
                      {"input_snr_db", json_metric(rec.input_snr_db)},
                      {"output_snr_db", json_metric(rec.output_snr_db)},
                      {"psnr_db", json_metric(rec.psnr_db)},
                      {"spectral_mse", json_metric(rec.spectral_mse)},
                      {"welch_config", rec.welch_hash}};
}

void write_metric_records(const fs::path& path, const std::string& format,
                          const ordered_json& config, const std::vector<MetricRecord>& records) {
  if (format == "json") {
    ordered_json j{{"config", config}, {"records", ordered_json::array()}};
    for (const auto& r : records) j["records"].push_back(metric_record_json(r));
    write_json(path, j);
    return;
  }
  std::string csv = config_comment(config);
  csv += "id,input_snr_db,output_snr_db,psnr_db,spectral_mse,welch_config\n";
  for (const auto& r : records) {
    csv += r.id + "," + csv_metric(r.input_snr_db) + "," + csv_metric(r.output_snr_db) + "," +
           csv_metric(r.psnr_db) + "," + csv_metric(r.spectral_mse) + "," + r.welch_hash + "\n";
  }
  write_text_file(path, csv);
}

void write_trace_csv(const fs::path& path, const ordered_json& config, const TrainTrace& trace) {
  std::string csv = config_comment(config);
  csv += "step,pair_loss,total_loss\n";
  for (std::size_t i = 0; i < trace.n2n.size(); ++i)
    csv += std::to_string(i + 1) + "," + fmt17(trace.n2n[i]) + "," + fmt17(trace.full[i]) + "\n";
  write_text_file(path, csv);
}

// Shared experiment options

struct CommonOpts {
  std::uint64_t seed = 0;
  std::size_t window_len = 8;
  std::string format = "json";
  std::string out_dir = ".";
  int workers = 0;
  bool truncate = false;
  int max_steps = 2000;
};

struct DataOpts {
  std::string family = "bandmix";
  std::string clean_file;
  double duration_s = 10.0;
  double sample_rate_hz = 256.0;
  double amplitude = 1.0;
  std::string noise = "wgn";
  std::string noise_file;
  std::vector<double> snr_db{0.0};
  int num_signals = 10;
};

CleanSpec make_clean_spec(const DataOpts& d) {
  CleanSpec spec;
  if (d.family == "bandmix")
    spec.family = CleanFamily::bandmix;
  else if (d.family == "period2")
    spec.family = CleanFamily::period2;
  else if (d.family == "file")
    spec.family = CleanFamily::file;
  else
    throw CLI::ValidationError("--family", "unknown clean-signal family: " + d.family);
  spec.duration_s = d.duration_s;
  spec.sample_rate_hz = d.sample_rate_hz;
  spec.period2_amplitude = d.amplitude;
  spec.file_path = d.clean_file;
  return spec;
}

NoiseSpec make_noise_spec(const DataOpts& d, double snr) {
  NoiseSpec spec;
  if (d.noise == "wgn")
    spec.kind = NoiseKind::wgn;
  else if (d.noise == "emg")
    spec.kind = NoiseKind::emg_surrogate;
  else if (d.noise == "file")
    spec.kind = NoiseKind::file;
  else
    throw CLI::ValidationError("--noise", "unknown noise kind: " + d.noise);
  spec.target_snr_db = snr;
  spec.file_path = d.noise_file;
  return spec;
}

ordered_json dataset_config_json(const DatasetConfig& cfg) {
  ordered_json j;
  j["family"] = cfg.clean.family == CleanFamily::bandmix   ? "bandmix"
                : cfg.clean.family == CleanFamily::period2 ? "period2"
                                                           : "file";
  j["duration_s"] = cfg.clean.duration_s;
  j["sample_rate_hz"] = cfg.clean.sample_rate_hz;
  j["amplitude"] = cfg.clean.period2_amplitude;
  j["noise"] = cfg.noise.kind == NoiseKind::wgn             ? "wgn"
               : cfg.noise.kind == NoiseKind::emg_surrogate ? "emg"
                                                            : "file";
  j["target_snr_db"] = cfg.noise.target_snr_db;
  j["num_signals"] = cfg.num_signals;
  j["train_fraction"] = cfg.train_fraction;
  j["seed"] = cfg.seed;
  return j;
}

Signal load_input_signal(const std::string& path, const CommonOpts& common) {
  Signal s = load_signal(path);
  if (s.size() % common.window_len != 0) {
    if (!common.truncate)
      throw std::invalid_argument(
          "signal length " + std::to_string(s.size()) + " is not a multiple of window length " +
          std::to_string(common.window_len) + "; pass --truncate to trim");
    s.samples.resize(s.size() - s.size() % common.window_len);
  }
  return s;
}

// ---------------------------------------------------------------------------
// gen-data

int cmd_gen_data(const CommonOpts& common, const DataOpts& data) {
  DatasetConfig cfg;
  cfg.clean = make_clean_spec(data);
  cfg.noise = make_noise_spec(data, data.snr_db.front());
  cfg.num_signals = data.num_signals;
  cfg.seed = common.seed;
  const Dataset ds = generate_dataset(cfg);

  fs::create_directories(common.out_dir);
  ordered_json config = dataset_config_json(cfg);
  ordered_json manifest{{"command", "gen-data"}, {"config", config}};
  manifest["signals"] = ordered_json::array();
  int n_train = 0;
  for (const auto& e : ds.entries) {
    const std::string clean_path = e.id + ".clean.txt";
    const std::string noise_path = e.id + ".noise.txt";
    const std::string mixed_path = e.id + ".mixed.txt";
    save_signal_text(e.clean, (fs::path(common.out_dir) / clean_path).string());
    save_signal_text(e.noise, (fs::path(common.out_dir) / noise_path).string());
    save_signal_text(e.mixed, (fs::path(common.out_dir) / mixed_path).string());
    manifest["signals"].push_back(ordered_json{{"id", e.id},
                                               {"clean", clean_path},
                                               {"noise", noise_path},
                                               {"mixed", mixed_path},
                                               {"split", e.is_train ? "train" : "test"},
                                               {"input_snr_db", json_metric(e.input_snr_db)},
                                               {"mix_scale", e.mix_scale},
                                               {"sample_rate_hz", e.clean.sample_rate_hz}});
    n_train += e.is_train ? 1 : 0;
  }
  manifest["num_train"] = n_train;
  manifest["num_test"] = static_cast<int>(ds.entries.size()) - n_train;
  write_json(fs::path(common.out_dir) / "manifest.json", manifest);
  std::cout << "wrote " << ds.entries.size() << " signals to " << common.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string data_dir;
  int updates = 500;
  int batch = 16;
  double policy_lr = 5e-3;
  double denoiser_lr = 1e-3;
  std::string mode = "clipped";
  std::string loss = "full";
};

ordered_json load_manifest(const std::string& dir) {
  const fs::path path = fs::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open dataset manifest");
  ordered_json j;
  in >> j;
  return j;
}

TrainConfig make_train_config(const TrainOpts& t, const CommonOpts& common) {
  TrainConfig cfg = TrainConfig::desk_scale();
  cfg.total_updates = t.updates;
  cfg.batch_size = t.batch;
  cfg.policy_lr = t.policy_lr;
  cfg.denoiser_lr = t.denoiser_lr;
  cfg.objective = t.mode == "reinforce" ? PolicyObjective::reinforce : PolicyObjective::clipped;
  cfg.denoiser_loss = t.loss == "n2n" ? DenoiserLoss::n2n_only : DenoiserLoss::full;
  cfg.workers = common.workers;
  return cfg;
}

ordered_json train_config_json(const TrainConfig& cfg, const CommonOpts& common) {
  return ordered_json{
      {"window_len", common.window_len},
      {"policy_lr", cfg.policy_lr},
      {"batch_size", cfg.batch_size},
      {"total_updates", cfg.total_updates},
      {"objective", cfg.objective == PolicyObjective::reinforce ? "reinforce" : "clipped"},
      {"clip_ratio", cfg.clip_ratio},
      {"clip_epochs", cfg.clip_epochs},
      {"denoiser_lr", cfg.denoiser_lr},
      {"denoiser_loss", cfg.denoiser_loss == DenoiserLoss::full ? "full" : "n2n"},
      {"max_steps", common.max_steps},
      {"seed", common.seed}};
}

int cmd_train(const CommonOpts& common, const TrainOpts& opts) {
  const ordered_json manifest = load_manifest(opts.data_dir);
  std::vector<Signal> trainset;
  for (const auto& sig : manifest.at("signals")) {
    if (sig.at("split") != "train") continue;
    const fs::path path = fs::path(opts.data_dir) / sig.at("mixed").get<std::string>();
    Signal s = load_signal_text(path.string(), sig.value("sample_rate_hz", 256.0));
    if (s.size() % common.window_len != 0) {
      if (!common.truncate)
        throw std::invalid_argument("dataset signal length is not a multiple of the window "
                                    "length; pass --truncate to trim");
      s.samples.resize(s.size() - s.size() % common.window_len);
    }
    trainset.push_back(std::move(s));
  }
  if (trainset.empty()) throw std::invalid_argument("dataset contains no training signals");

  const auto catalog = enumerate_catalog(common.window_len);
  const TrainConfig cfg = make_train_config(opts, common);
  ConvergenceCriterion criterion;
  criterion.max_steps = common.max_steps;
  auto [policy, report] = train_ipsd(trainset, catalog, cfg, criterion, common.seed);

  fs::create_directories(common.out_dir);
  const ordered_json config = train_config_json(cfg, common);

  std::string csv = config_comment(config);
  csv += "iteration,mean_reward,reward_std,mean_steps\n";
  for (const auto& it : report.iterations)
    csv += std::to_string(it.iteration) + "," + fmt17(it.mean_reward) + "," +
           fmt17(it.reward_std) + "," + fmt17(it.mean_steps) + "\n";
  write_text_file(fs::path(common.out_dir) / "report.csv", csv);

  auto params = policy.params();
  save_checkpoint(params, (fs::path(common.out_dir) / "policy.bin").string(),
                  (fs::path(common.out_dir) / "policy.manifest").string());
  ordered_json summary{{"command", "train"},
                       {"config", config},
                       {"num_actions", policy.num_actions()},
                       {"window_len", policy.window_len()},
                       {"iterations_run", report.iterations.size()},
                       {"plateaued", report.plateaued}};
  if (!report.iterations.empty())
    summary["final_mean_reward"] = report.iterations.back().mean_reward;
  write_json(fs::path(common.out_dir) / "train.json", summary);
  std::cout << "trained policy over " << report.iterations.size() << " updates\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// denoise / zeroshot

PolicyNet load_policy(const std::string& dir) {
  const fs::path meta_path = fs::path(dir) / "train.json";
  std::ifstream meta(meta_path);
  if (!meta) throw IoError(meta_path.string(), "cannot open policy metadata");
  ordered_json j;
  meta >> j;
  PolicyNet net(j.at("window_len").get<int>(), j.at("num_actions").get<int>());
  auto params = net.params();
  load_checkpoint(params, (fs::path(dir) / "policy.bin").string(),
                  (fs::path(dir) / "policy.manifest").string());
  return net;
}

int cmd_denoise(const CommonOpts& common, const std::string& signal_path,
                const std::string& policy_dir, const std::string& clean_path,
                const std::string& loss_mode, bool dump_trace) {
  const Signal s = load_input_signal(signal_path, common);
  PolicyNet policy = load_policy(policy_dir);
  if (policy.window_len() != static_cast<int>(common.window_len))
    throw std::invalid_argument("checkpoint window length does not match --window-len");

  const auto catalog = enumerate_catalog(common.window_len);
  const WindowGrid grid(s.size(), common.window_len);
  ConvergenceCriterion criterion;
  criterion.max_steps = common.max_steps;
  const DenoiserLoss loss = loss_mode == "n2n" ? DenoiserLoss::n2n_only : DenoiserLoss::full;

  const Mat logits = policy.forward(window_features(s, grid));
  const PartitionChoice choice = argmax_choice(logits);
  auto rng = derive_rng(common.seed, {0x81});
  const TrainedDenoiser trained =
      train_to_convergence(s, choice, catalog, criterion, rng, loss, 1e-3);
  const Signal denoised = denoise_rescaled(trained, s);

  fs::create_directories(common.out_dir);
  const ordered_json config{{"command", "denoise"}, {"signal", signal_path},
                            {"policy", policy_dir}, {"window_len", common.window_len},
                            {"loss", loss_mode},    {"seed", common.seed}};
  save_signal_text(denoised, (fs::path(common.out_dir) / "denoised.txt").string());
  if (dump_trace) write_trace_csv(fs::path(common.out_dir) / "trace.csv", config, trained.trace);

  if (!clean_path.empty()) {
    const Signal clean = load_input_signal(clean_path, common);
    WelchConfig welch;
    const auto rec = compute_metrics("denoise", clean, s, denoised, welch);
    write_metric_records(fs::path(common.out_dir) / ("record." + common.format), common.format,
                         config, {rec});
  } else {
    write_json(fs::path(common.out_dir) / "record.json",
               ordered_json{{"config", config}, {"length", denoised.size()}});
  }
  std::cout << "denoised " << s.size() << " samples\n";
  return kExitOk;
}

int cmd_zeroshot(const CommonOpts& common, const std::string& signal_path,
                 const std::string& clean_path, const std::string& loss_mode, int max_rounds,
                 bool dump_trace) {
  const Signal s = load_input_signal(signal_path, common);
  const auto catalog = enumerate_catalog(common.window_len);

  ZeroShotConfig cfg;
  cfg.bandit.max_rounds = max_rounds;
  cfg.criterion.max_steps = common.max_steps;
  cfg.loss = loss_mode == "n2n" ? DenoiserLoss::n2n_only : DenoiserLoss::full;
  cfg.workers = common.workers;
  const ZeroShotResult result = run_zero_shot(s, catalog, cfg, common.seed);

  fs::create_directories(common.out_dir);
  const ordered_json config{{"command", "zeroshot"},
                            {"signal", signal_path},
                            {"window_len", common.window_len},
                            {"loss", loss_mode},
                            {"max_rounds", max_rounds},
                            {"sigma", cfg.bandit.sigma},
                            {"delta", cfg.bandit.delta},
                            {"epsilon", cfg.bandit.epsilon},
                            {"beta", cfg.bandit.beta},
                            {"seed", common.seed}};

  save_signal_text(result.denoised, (fs::path(common.out_dir) / "denoised.txt").string());

  std::string csv = config_comment(config);
  csv += "round,arm,reward,index_value,winner_so_far\n";
  for (const auto& rec : result.history)
    csv += std::to_string(rec.pull) + "," + std::to_string(rec.arm) + "," + fmt17(rec.reward) +
           "," + fmt17(rec.index_value) + "," + std::to_string(rec.leader) + "\n";
  write_text_file(fs::path(common.out_dir) / "history.csv", csv);
  if (dump_trace)
    write_trace_csv(fs::path(common.out_dir) / "trace.csv", config, result.final_trace);

  ordered_json summary{{"config", config},
                       {"best_arm", result.best_arm},
                       {"capped", result.capped},
                       {"rounds", result.history.size()}};
  if (!clean_path.empty()) {
    const Signal clean = load_input_signal(clean_path, common);
    WelchConfig welch;
    const auto rec = compute_metrics("zeroshot", clean, s, result.denoised, welch);
    write_metric_records(fs::path(common.out_dir) / ("record." + common.format), common.format,
                         config, {rec});
    summary["output_snr_db"] = json_metric(rec.output_snr_db);
  }
  write_json(fs::path(common.out_dir) / "zeroshot.json", summary);
  std::cout << "zero-shot winner arm " << result.best_arm << (result.capped ? " (capped)" : "")
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ablate

int cmd_ablate(const CommonOpts& common, const DataOpts& data, const TrainOpts& train) {
  fs::create_directories(common.out_dir);

  ordered_json table{{"command", "ablate"}, {"conditions", ordered_json::array()}};
  std::string csv;
  csv += "method,condition,snr_mean,snr_std,psnr_mean,psnr_std,smse_mean,smse_std\n";

  for (double snr : data.snr_db) {
    AblationConfig cfg;
    cfg.data.clean = make_clean_spec(data);
    cfg.data.noise = make_noise_spec(data, snr);
    cfg.data.num_signals = data.num_signals;
    cfg.data.seed = common.seed;
    cfg.window_len = common.window_len;
    cfg.train = make_train_config(train, common);
    cfg.criterion.max_steps = common.max_steps;
    cfg.workers = common.workers;

    const auto rows = run_ablation(cfg);
    const std::string condition = data.noise + "@" + fmt17(snr) + "dB";
    ordered_json cond{{"condition", condition},
                      {"config", dataset_config_json(cfg.data)},
                      {"train", train_config_json(cfg.train, common)},
                      {"methods", ordered_json::array()}};
    for (const auto& row : rows) {
      cond["methods"].push_back(ordered_json{{"method", row.method},
                                             {"snr_mean", json_metric(row.snr_mean)},
                                             {"snr_std", row.snr_std},
                                             {"psnr_mean", json_metric(row.psnr_mean)},
                                             {"psnr_std", row.psnr_std},
                                             {"smse_mean", json_metric(row.smse_mean)},
                                             {"smse_std", row.smse_std}});
      csv += row.method + "," + condition + "," + csv_metric(row.snr_mean) + "," +
             fmt17(row.snr_std) + "," + csv_metric(row.psnr_mean) + "," + fmt17(row.psnr_std) +
             "," + csv_metric(row.smse_mean) + "," + fmt17(row.smse_std) + "\n";
    }
    table["conditions"].push_back(cond);
  }

  if (common.format == "json")
    write_json(fs::path(common.out_dir) / "ablation.json", table);
  else
    write_text_file(fs::path(common.out_dir) / "ablation.csv",
                    config_comment(table) .append(csv));
  std::cout << "ablation complete over " << data.snr_db.size() << " condition(s)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const CommonOpts& common, const std::string& clean_path,
             const std::string& denoised_path, const std::string& noisy_path) {
  const Signal clean = load_signal(clean_path);
  const Signal denoised = load_signal(denoised_path);
  const Signal noisy = noisy_path.empty() ? denoised : load_signal(noisy_path);
  WelchConfig welch;
  MetricRecord rec = compute_metrics("eval", clean, noisy, denoised, welch);
  if (noisy_path.empty()) rec.input_snr_db = std::numeric_limits<double>::quiet_NaN();

  fs::create_directories(common.out_dir);
  const ordered_json config{{"command", "eval"},
                            {"clean", clean_path},
                            {"denoised", denoised_path},
                            {"noisy", noisy_path}};
  write_metric_records(fs::path(common.out_dir) / ("record." + common.format), common.format,
                       config, {rec});
  std::cout << "output snr " << csv_metric(rec.output_snr_db) << " dB\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partition-learning self-supervised denoiser"};
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.require_subcommand(1);

  CommonOpts common;
  DataOpts data;
  TrainOpts train;
  app.add_option("--seed", common.seed, "root random seed")->capture_default_str();
  app.add_option("--window-len", common.window_len, "partition window length (even, 2..12)")
      ->capture_default_str();
  app.add_option("--format", common.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
  app.add_option("--workers", common.workers, "worker threads (0 = all cores)")
      ->capture_default_str();
  app.add_flag("--truncate", common.truncate,
               "trim inputs whose length is not a multiple of the window length");
  app.add_option("--max-steps", common.max_steps, "denoiser training step cap")
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--num-signals", data.num_signals)->capture_default_str();
  gen->add_option("--family", data.family, "bandmix|period2|file")->capture_default_str();
  gen->add_option("--clean-file", data.clean_file, "source for --family file");
  gen->add_option("--duration", data.duration_s, "seconds per signal")->capture_default_str();
  gen->add_option("--rate", data.sample_rate_hz, "sample rate in Hz")->capture_default_str();
  gen->add_option("--amplitude", data.amplitude, "period2 amplitude")->capture_default_str();
  gen->add_option("--noise", data.noise, "wgn|emg|file")->capture_default_str();
  gen->add_option("--noise-file", data.noise_file, "source for --noise file");
  gen->add_option("--snr-db", data.snr_db, "target input SNR in dB")->capture_default_str();

  auto* tr = app.add_subcommand("train", "train the partition policy on a dataset");
  tr->add_option("--data", train.data_dir, "gen-data output directory")->required();
  tr->add_option("--updates", train.updates)->capture_default_str();
  tr->add_option("--batch", train.batch)->capture_default_str();
  tr->add_option("--policy-lr", train.policy_lr)->capture_default_str();
  tr->add_option("--denoiser-lr", train.denoiser_lr)->capture_default_str();
  tr->add_option("--mode", train.mode, "reinforce|clipped")
      ->check(CLI::IsMember({"reinforce", "clipped"}))
      ->capture_default_str();
  tr->add_option("--loss", train.loss, "full|n2n denoiser loss")
      ->check(CLI::IsMember({"full", "n2n"}))
      ->capture_default_str();

  std::string signal_path, policy_dir, clean_path, loss_mode = "full";
  bool dump_trace = false;
  auto* den = app.add_subcommand("denoise", "denoise with a trained policy checkpoint");
  den->add_option("--signal", signal_path)->required();
  den->add_option("--policy", policy_dir, "train output directory")->required();
  den->add_option("--clean", clean_path, "clean reference for metrics");
  den->add_option("--loss", loss_mode, "full|n2n")->check(CLI::IsMember({"full", "n2n"}));
  den->add_flag("--trace", dump_trace, "export the training trace CSV");

  int max_rounds = 500;
  auto* zs = app.add_subcommand("zeroshot", "denoise one signal with the bandit search");
  zs->add_option("--signal", signal_path)->required();
  zs->add_option("--clean", clean_path, "clean reference for metrics");
  zs->add_option("--loss", loss_mode, "full|n2n")->check(CLI::IsMember({"full", "n2n"}));
  zs->add_option("--max-rounds", max_rounds)->capture_default_str();
  zs->add_flag("--trace", dump_trace, "export the final training trace CSV");

  auto* ab = app.add_subcommand("ablate", "compare ID, policy, and zero-shot partitioning");
  ab->add_option("--num-signals", data.num_signals)->capture_default_str();
  ab->add_option("--family", data.family, "bandmix|period2")->capture_default_str();
  ab->add_option("--duration", data.duration_s)->capture_default_str();
  ab->add_option("--rate", data.sample_rate_hz)->capture_default_str();
  ab->add_option("--amplitude", data.amplitude)->capture_default_str();
  ab->add_option("--noise", data.noise, "wgn|emg")->capture_default_str();
  ab->add_option("--snr-db", data.snr_db, "one condition per value")->capture_default_str();
  ab->add_option("--updates", train.updates)->capture_default_str();
  ab->add_option("--batch", train.batch)->capture_default_str();
  ab->add_option("--policy-lr", train.policy_lr)->capture_default_str();
  ab->add_option("--mode", train.mode)->check(CLI::IsMember({"reinforce", "clipped"}));

  std::string denoised_path, noisy_path;
  auto* ev = app.add_subcommand("eval", "metrics for an existing denoised signal");
  ev->add_option("--clean", clean_path)->required();
  ev->add_option("--denoised", denoised_path)->required();
  ev->add_option("--noisy", noisy_path, "noisy input, for input SNR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common, data);
    if (tr->parsed()) return cmd_train(common, train);
    if (den->parsed())
      return cmd_denoise(common, signal_path, policy_dir, clean_path, loss_mode, dump_trace);
    if (zs->parsed())
      return cmd_zeroshot(common, signal_path, clean_path, loss_mode, max_rounds, dump_trace);
    if (ab->parsed()) return cmd_ablate(common, data, train);
    if (ev->parsed()) return cmd_eval(common, clean_path, denoised_path, noisy_path);
    std::cerr << "no command given\n";
    return kExitConfig;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed manifest or metadata: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  }
}
