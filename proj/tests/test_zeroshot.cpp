#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ipsd/data.hpp"
#include "ipsd/errors.hpp"
#include "ipsd/metrics.hpp"
#include "ipsd/rng.hpp"
#include "ipsd/zeroshot.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace ipsd;

TEST_CASE("index hyperparameters tie together as specified") {
  LilUcbConfig cfg;
  CHECK(cfg.alpha() == doctest::Approx(9.0));
  CHECK(cfg.sigma == 0.008);
  CHECK(cfg.epsilon == 0.01);
  CHECK(cfg.delta == 0.55e-4);
}

TEST_CASE("exploration bonus of a once-pulled arm under default settings") {
  BanditState state(2);
  state.record(0, 0.0);
  state.record(1, -1.0);
  LilUcbConfig cfg;
  // frozen from a high-precision evaluation of the index formula
  CHECK(ucb_index(state, 0, cfg) == doctest::Approx(0.05703056254776859).epsilon(1e-12));
}

TEST_CASE("the exploration term vanishes for heavily pulled arms") {
  BanditState state(1);
  for (int i = 0; i < 2000000; ++i) state.record(0, 0.25);
  LilUcbConfig cfg;
  CHECK(ucb_index(state, 0, cfg) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("with equal pulls the higher mean wins") {
  BanditState state(2);
  state.record(0, 0.3);
  state.record(1, 0.1);
  LilUcbConfig cfg;
  CHECK(ucb_index(state, 0, cfg) > ucb_index(state, 1, cfg));
  CHECK(select_arm(state, cfg) == 0);
}

TEST_CASE("the index decreases monotonically in the pull count") {
  LilUcbConfig cfg;
  double prev = 0.0;
  for (int t = 2; t <= 1000; ++t) {
    BanditState state(1);
    for (int i = 0; i < t; ++i) state.record(0, 0.0);
    const double idx = ucb_index(state, 0, cfg);
    if (t > 2) CHECK(idx < prev);
    prev = idx;
  }
}

TEST_CASE("selection breaks ties toward the lowest arm") {
  BanditState state(4);
  for (int a = 0; a < 4; ++a) state.record(a, 0.5);
  LilUcbConfig cfg;
  CHECK(select_arm(state, cfg) == 0);
}

TEST_CASE("selection requires full initialisation") {
  BanditState state(3);
  state.record(0, 0.5);
  LilUcbConfig cfg;
  CHECK_THROWS_AS(select_arm(state, cfg), StateError);
  CHECK_THROWS_AS(ucb_index(state, 2, cfg), StateError);
}

TEST_CASE("stopping rule arithmetic") {
  LilUcbConfig cfg;
  BanditState state(2);
  for (int i = 0; i < 100; ++i) state.record(0, 0.0);
  for (int i = 0; i < 10; ++i) state.record(1, 0.0);
  const auto stop = stopping_met(state, cfg);
  REQUIRE(stop.winner.has_value());
  CHECK(*stop.winner == 0);
  CHECK_FALSE(stop.capped);

  BanditState not_yet(2);
  for (int i = 0; i < 90; ++i) not_yet.record(0, 0.0);
  for (int i = 0; i < 10; ++i) not_yet.record(1, 0.0);
  CHECK_FALSE(stopping_met(not_yet, cfg).winner.has_value());
}

TEST_CASE("hitting the round cap returns the leader, flagged as capped") {
  LilUcbConfig cfg;
  cfg.max_rounds = 5;
  BanditState state(3);
  for (int a = 0; a < 3; ++a) state.record(a, 0.0);
  state.record(1, 0.0);
  for (int i = 0; i < 5; ++i) state.finish_round();
  const auto stop = stopping_met(state, cfg);
  REQUIRE(stop.winner.has_value());
  CHECK(*stop.winner == 1);
  CHECK(stop.capped);
}

TEST_CASE("empirical means are exact running means") {
  auto rng = derive_rng(61);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  BanditState state(1);
  std::vector<double> values;
  for (int i = 0; i < 57; ++i) {
    const double r = reward(rng);
    values.push_back(r);
    state.record(0, r);
    double sum = 0.0;
    for (double v : values) sum += v;
    CHECK(state.mean(0) == sum / static_cast<double>(values.size()));
  }
}

TEST_CASE("exactly one arm count increments per selection round") {
  auto rng = derive_rng(62);
  std::normal_distribution<double> noise(0.0, 0.008);
  LilUcbConfig cfg;
  cfg.max_rounds = 40;
  std::vector<long> last_counts;
  auto pull = [&](int arm, long) { return (arm == 2 ? 0.1 : 0.0) + noise(rng); };
  const BanditRun run = run_lil_ucb(5, pull, cfg);
  std::vector<long> totals(5, 0);
  for (std::size_t i = 0; i < run.history.size(); ++i) {
    totals[static_cast<std::size_t>(run.history[i].arm)] += 1;
    if (i >= 5) {
      long sum = 0;
      for (long t : totals) sum += t;
      CHECK(sum == static_cast<long>(i + 1));
    }
  }
}

TEST_CASE("deterministic rewards always identify the true best arm") {
  LilUcbConfig cfg;
  const std::vector<double> means{-0.3, 0.4, -0.1, 0.39};
  auto pull = [&](int arm, long) { return means[static_cast<std::size_t>(arm)]; };
  const BanditRun run = run_lil_ucb(4, pull, cfg);
  CHECK(run.best_arm == 1);
  CHECK_FALSE(run.capped);
}

TEST_CASE("gaussian-reward oracle: the best of 35 arms is found almost always") {
  LilUcbConfig cfg;
  int correct = 0;
  int uncapped = 0;
  for (int seed = 0; seed < 20; ++seed) {
    auto rng = derive_rng(63, {static_cast<std::uint64_t>(seed)});
    std::normal_distribution<double> noise(0.0, cfg.sigma);
    const int best = static_cast<int>(rng() % 35);
    auto pull = [&](int arm, long) { return (arm == best ? 0.0 : -0.1) + noise(rng); };
    const BanditRun run = run_lil_ucb(35, pull, cfg);
    if (run.best_arm == best) ++correct;
    if (!run.capped) ++uncapped;
  }
  CHECK(correct >= 18);
  CHECK(uncapped >= 18);
}

TEST_CASE("zero-shot search on alternating content picks an exact split arm") {
  auto rng = derive_rng(64);
  CleanSpec spec;
  spec.family = CleanFamily::period2;
  spec.duration_s = 0.5;  // 128 samples
  const Signal clean = gen_clean(spec, rng);
  const Signal noise = gen_wgn(clean.size(), 256.0, rng);
  const auto [mixed, c] = mix_at_snr(clean, noise, 0.0);

  const auto catalog = enumerate_catalog(4);
  const WindowGrid grid(mixed.size(), 4);
  ZeroShotConfig cfg;
  cfg.criterion.max_steps = 400;
  cfg.workers = 2;
  const ZeroShotResult result = run_zero_shot(mixed, catalog, cfg, 4242);

  CHECK(result.pull_counts.size() == catalog.size());
  CHECK(result.denoised.size() == mixed.size());
  // only entry {0,1} splits alternating content exactly
  CHECK(result.best_arm == 0);
  CHECK(pair_mismatch(clean, shared_choice(grid, catalog, result.best_arm), catalog) ==
        doctest::Approx(0.0));

  // and its output clearly beats the interleaved-rule output
  ConvergenceCriterion criterion;
  criterion.max_steps = 400;
  auto id_rng = derive_rng(65);
  const TrainedDenoiser id_trained = train_to_convergence(
      mixed, interleaved_choice(grid, catalog), catalog, criterion, id_rng);
  const Signal id_out = denoise_rescaled(id_trained, mixed);
  CHECK(snr_db(clean, result.denoised) >= snr_db(clean, id_out) + 1.0);
}

TEST_CASE("zero-shot runs are deterministic in the seed") {
  auto rng = derive_rng(66);
  CleanSpec spec;
  spec.family = CleanFamily::period2;
  spec.duration_s = 0.25;
  const Signal clean = gen_clean(spec, rng);
  const Signal noise = gen_wgn(clean.size(), 256.0, rng);
  const auto [mixed, c] = mix_at_snr(clean, noise, 0.0);
  const auto catalog = enumerate_catalog(4);

  ZeroShotConfig cfg;
  cfg.criterion.max_steps = 120;
  cfg.bandit.max_rounds = 25;
  cfg.workers = 1;
  const ZeroShotResult a = run_zero_shot(mixed, catalog, cfg, 31415);
  cfg.workers = 2;
  const ZeroShotResult b = run_zero_shot(mixed, catalog, cfg, 31415);
  CHECK(a.best_arm == b.best_arm);
  CHECK(a.denoised.samples == b.denoised.samples);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].arm == b.history[i].arm);
    CHECK(a.history[i].reward == b.history[i].reward);
  }
}

TEST_CASE("arm space size equals the catalog size") {
  CHECK(enumerate_catalog(8).size() == 35);
  CHECK(enumerate_catalog(4).size() == 3);
}
