#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWorkRoot = fs::temp_directory_path() / "ipsd_cli_test";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IPSD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = kWorkRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// small dataset: 32-sample period2 signals at 64 Hz
std::string tiny_gen_args(const fs::path& out, int num_signals = 10, unsigned seed = 7) {
  std::ostringstream ss;
  ss << "--seed " << seed << " --out " << out.string()
     << " gen-data --family period2 --duration 0.5 --rate 64 --num-signals " << num_signals;
  return ss.str();
}

}  // namespace

TEST_CASE("gen-data writes an 80/20 split manifest") {
  const auto out = fresh_dir("gen");
  REQUIRE(run_cli(tiny_gen_args(out)) == 0);
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"num_train\": 8") != std::string::npos);
  CHECK(manifest.find("\"num_test\": 2") != std::string::npos);
  CHECK(fs::exists(out / "sig_000.clean.txt"));
  CHECK(fs::exists(out / "sig_009.mixed.txt"));
  CHECK(manifest.find("\"config\"") != std::string::npos);
}

TEST_CASE("gen-data is byte-identical under a repeated seed") {
  const auto a = fresh_dir("gen_a");
  const auto b = fresh_dir("gen_b");
  REQUIRE(run_cli(tiny_gen_args(a, 4, 99)) == 0);
  REQUIRE(run_cli(tiny_gen_args(b, 4, 99)) == 0);
  for (const auto& entry : fs::directory_iterator(a))
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
}

TEST_CASE("gen-data rejects an empty dataset request") {
  const auto out = fresh_dir("gen_zero");
  CHECK(run_cli(tiny_gen_args(out, 0)) == 2);
}

TEST_CASE("unknown flags are configuration errors") {
  CHECK(run_cli("--no-such-flag gen-data") == 2);
}

TEST_CASE("missing input files are io errors") {
  const auto out = fresh_dir("missing");
  CHECK(run_cli("--out " + out.string() + " --window-len 4 zeroshot --signal /nonexistent.txt") ==
        4);
}

TEST_CASE("train, denoise and zeroshot round-trip on a tiny dataset") {
  const auto data = fresh_dir("pipeline_data");
  REQUIRE(run_cli(tiny_gen_args(data, 4, 11)) == 0);

  const auto train_out = fresh_dir("pipeline_train");
  const std::string train_args = "--seed 5 --window-len 4 --max-steps 60 --out " +
                                 train_out.string() + " train --data " + data.string() +
                                 " --updates 2 --batch 2";
  REQUIRE(run_cli(train_args) == 0);
  CHECK(fs::exists(train_out / "policy.bin"));
  CHECK(fs::exists(train_out / "policy.manifest"));
  CHECK(fs::exists(train_out / "train.json"));
  const std::string report = slurp(train_out / "report.csv");
  CHECK(report.find("# config") == 0);
  CHECK(report.find("iteration,mean_reward,reward_std,mean_steps") != std::string::npos);

  // find one generated signal file to denoise
  const std::string signal = (data / "sig_000.mixed.txt").string();
  const std::string clean = (data / "sig_000.clean.txt").string();

  const auto den_a = fresh_dir("pipeline_denoise_a");
  const auto den_b = fresh_dir("pipeline_denoise_b");
  const std::string den_args = "--seed 5 --window-len 4 --max-steps 60 --format csv";
  REQUIRE(run_cli(den_args + " --out " + den_a.string() + " denoise --signal " + signal +
                  " --policy " + train_out.string() + " --clean " + clean + " --trace") == 0);
  REQUIRE(run_cli(den_args + " --out " + den_b.string() + " denoise --signal " + signal +
                  " --policy " + train_out.string() + " --clean " + clean + " --trace") == 0);
  CHECK(slurp(den_a / "denoised.txt") == slurp(den_b / "denoised.txt"));
  CHECK(slurp(den_a / "record.csv") == slurp(den_b / "record.csv"));
  CHECK(slurp(den_a / "trace.csv").find("step,pair_loss,total_loss") != std::string::npos);

  const auto zs_a = fresh_dir("pipeline_zs_a");
  const auto zs_b = fresh_dir("pipeline_zs_b");
  const std::string zs_args = "--seed 5 --window-len 4 --max-steps 60";
  REQUIRE(run_cli(zs_args + " --out " + zs_a.string() + " zeroshot --signal " + signal +
                  " --clean " + clean + " --max-rounds 25") == 0);
  REQUIRE(run_cli(zs_args + " --out " + zs_b.string() + " zeroshot --signal " + signal +
                  " --clean " + clean + " --max-rounds 25") == 0);
  CHECK(slurp(zs_a / "denoised.txt") == slurp(zs_b / "denoised.txt"));
  CHECK(slurp(zs_a / "history.csv") == slurp(zs_b / "history.csv"));
  const std::string history = slurp(zs_a / "history.csv");
  CHECK(history.find("round,arm,reward,index_value,winner_so_far") != std::string::npos);
  CHECK(slurp(zs_a / "zeroshot.json").find("best_arm") != std::string::npos);

  const auto ev = fresh_dir("pipeline_eval");
  REQUIRE(run_cli("--out " + ev.string() + " eval --clean " + clean + " --denoised " +
                  (zs_a / "denoised.txt").string() + " --noisy " + signal) == 0);
  const std::string record = slurp(ev / "record.json");
  CHECK(record.find("output_snr_db") != std::string::npos);
  CHECK(record.find("welch_config") != std::string::npos);
}

TEST_CASE("training reports are identical across worker counts") {
  const auto data = fresh_dir("workers_data");
  REQUIRE(run_cli(tiny_gen_args(data, 3, 21)) == 0);
  const auto w1 = fresh_dir("workers_1");
  const auto w2 = fresh_dir("workers_2");
  const std::string base = "--seed 3 --window-len 4 --max-steps 50 ";
  REQUIRE(run_cli(base + "--workers 1 --out " + w1.string() + " train --data " + data.string() +
                  " --updates 2 --batch 3") == 0);
  REQUIRE(run_cli(base + "--workers 2 --out " + w2.string() + " train --data " + data.string() +
                  " --updates 2 --batch 3") == 0);
  CHECK(slurp(w1 / "report.csv") == slurp(w2 / "report.csv"));
  CHECK(slurp(w1 / "policy.bin") == slurp(w2 / "policy.bin"));
}

TEST_CASE("ablate emits one row per method with mean and std columns") {
  const auto out = fresh_dir("ablate");
  const std::string args =
      "--seed 13 --window-len 4 --max-steps 60 --out " + out.string() +
      " ablate --family period2 --duration 0.5 --rate 64 --num-signals 3 --snr-db 0 "
      "--updates 2 --batch 2";
  REQUIRE(run_cli(args) == 0);
  const std::string table = slurp(out / "ablation.json");
  CHECK(table.find("\"ID\"") != std::string::npos);
  CHECK(table.find("\"iPSD\"") != std::string::npos);
  CHECK(table.find("\"iPSD-Zero\"") != std::string::npos);
  CHECK(table.find("snr_mean") != std::string::npos);
  CHECK(table.find("snr_std") != std::string::npos);
  CHECK(table.find("smse_std") != std::string::npos);
}

TEST_CASE("signals not divisible by the window length need --truncate") {
  const auto dir = fresh_dir("trunc");
  {
    std::ofstream sig(dir / "odd.txt");
    for (int i = 0; i < 130; ++i) sig << (i % 2 ? -1.0 : 1.0) << "\n";
  }
  const std::string base = "--window-len 4 --max-steps 50 --out " + dir.string();
  CHECK(run_cli(base + " zeroshot --signal " + (dir / "odd.txt").string() +
                " --max-rounds 5") == 2);
  CHECK(run_cli(base + " --truncate zeroshot --signal " + (dir / "odd.txt").string() +
                " --max-rounds 5") == 0);
}
