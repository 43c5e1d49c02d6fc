#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ipsd/rng.hpp"
#include "ipsd/signal.hpp"

#include <algorithm>
#include <set>
#include <vector>

using namespace ipsd;

namespace {

int binomial(int n, int k) {
  double acc = 1.0;
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
  return static_cast<int>(acc + 0.5);
}

Signal ramp_signal(std::size_t n) {
  Signal s;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = static_cast<double>(i);
  return s;
}

}  // namespace

TEST_CASE("catalog size is C(W, W/2)/2 for every supported window length") {
  for (std::size_t w : {2, 4, 6, 8, 10, 12}) {
    const auto catalog = enumerate_catalog(w);
    CHECK(catalog.size() ==
          static_cast<std::size_t>(binomial(static_cast<int>(w), static_cast<int>(w) / 2) / 2));
  }
  CHECK(enumerate_catalog(8).size() == 35);
  CHECK(enumerate_catalog(2).size() == 1);
  CHECK(enumerate_catalog(4).size() == 3);
}

TEST_CASE("catalog entries are canonical, sorted, distinct, complement-free") {
  for (std::size_t w : {2, 4, 6, 8, 10, 12}) {
    const auto catalog = enumerate_catalog(w);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      const auto& e = catalog.entry(i);
      REQUIRE(e.size() == w / 2);
      CHECK(e.front() == 0);
      CHECK(std::is_sorted(e.begin(), e.end()));
      CHECK(seen.insert(e).second);
      // the complement starts at some index > 0, so it can never equal
      // another canonical entry
      const auto comp = catalog.complement(i);
      CHECK(comp.front() != 0);
      CHECK(seen.count(comp) == 0);
    }
    // lexicographic order
    for (std::size_t i = 1; i < catalog.size(); ++i)
      CHECK(catalog.entry(i - 1) < catalog.entry(i));
  }
}

TEST_CASE("catalog for W=4 is exactly {0,1},{0,2},{0,3}") {
  const auto catalog = enumerate_catalog(4);
  REQUIRE(catalog.size() == 3);
  CHECK(catalog.entry(0) == std::vector<int>{0, 1});
  CHECK(catalog.entry(1) == std::vector<int>{0, 2});
  CHECK(catalog.entry(2) == std::vector<int>{0, 3});
}

TEST_CASE("catalog always contains the interleaved subset") {
  for (std::size_t w : {2, 4, 6, 8, 10, 12}) {
    const auto catalog = enumerate_catalog(w);
    std::vector<int> expected;
    for (std::size_t i = 0; i < w / 2; ++i) expected.push_back(static_cast<int>(2 * i));
    CHECK(catalog.entry(catalog.interleaved_index()) == expected);
  }
}

TEST_CASE("catalog rejects odd and out-of-range window lengths") {
  CHECK_THROWS_AS(enumerate_catalog(3), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_catalog(0), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_catalog(14), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_catalog(1), std::invalid_argument);
}

TEST_CASE("interleaved choice picks the even subset in every window") {
  const auto catalog = enumerate_catalog(8);
  const WindowGrid grid(16, 8);
  const auto choice = interleaved_choice(grid, catalog);
  REQUIRE(choice.num_windows() == 2);
  CHECK(choice.entry_per_window[0] == choice.entry_per_window[1]);
  CHECK(catalog.entry(choice.entry_per_window[0]) == std::vector<int>{0, 2, 4, 6});

  const auto catalog4 = enumerate_catalog(4);
  const auto choice4 = interleaved_choice(WindowGrid(8, 4), catalog4);
  CHECK(catalog4.entry(choice4.entry_per_window[0]) == std::vector<int>{0, 2});
}

TEST_CASE("window grid validates divisibility and evenness") {
  CHECK_THROWS_AS(WindowGrid(10, 8), std::invalid_argument);
  CHECK_THROWS_AS(WindowGrid(12, 3), std::invalid_argument);
  CHECK_THROWS_AS(WindowGrid(0, 4), std::invalid_argument);
  CHECK(WindowGrid(16, 8).num_windows() == 2);
}

TEST_CASE("partition of the alternating window") {
  const auto catalog = enumerate_catalog(4);
  const Signal s = make_signal({1.0, -1.0, 1.0, -1.0});
  const WindowGrid grid(4, 4);

  // entry {0,1} pairs adjacent samples: both halves carry the same content
  const auto adjacent = shared_choice(grid, catalog, 0);
  const auto pair_adj = apply_partition(s, adjacent, catalog);
  CHECK(pair_adj.left.samples == std::vector<double>{1.0, -1.0});
  CHECK(pair_adj.right.samples == std::vector<double>{1.0, -1.0});

  // the interleaved entry {0,2} separates the signs
  const auto inter = shared_choice(grid, catalog, 1);
  const auto pair_int = apply_partition(s, inter, catalog);
  CHECK(pair_int.left.samples == std::vector<double>{1.0, 1.0});
  CHECK(pair_int.right.samples == std::vector<double>{-1.0, -1.0});

  CHECK(pair_mismatch(s, adjacent, catalog) == doctest::Approx(0.0));
  CHECK(pair_mismatch(s, inter, catalog) == doctest::Approx(16.0));
}

TEST_CASE("partition of a two-sample window") {
  const auto catalog = enumerate_catalog(2);
  const Signal s = make_signal({3.5, -2.25});
  const auto choice = shared_choice(WindowGrid(2, 2), catalog, 0);
  const auto pair = apply_partition(s, choice, catalog);
  CHECK(pair.left.samples == std::vector<double>{3.5});
  CHECK(pair.right.samples == std::vector<double>{-2.25});
}

TEST_CASE("merge is the exact inverse of apply") {
  const auto catalog = enumerate_catalog(4);
  const auto choice = shared_choice(WindowGrid(4, 4), catalog, 0);
  SubSignalPair pair;
  pair.left = make_signal({1.0, -1.0});
  pair.right = make_signal({1.0, -1.0});
  const Signal merged = merge_partition(pair, choice, catalog);
  CHECK(merged.samples == std::vector<double>{1.0, -1.0, 1.0, -1.0});
}

TEST_CASE("apply followed by merge is the identity on random choices") {
  auto rng = derive_rng(2024);
  const auto catalog = enumerate_catalog(8);
  std::uniform_int_distribution<std::uint32_t> entry(0, static_cast<std::uint32_t>(catalog.size() - 1));
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  for (int rep = 0; rep < 1000; ++rep) {
    Signal s;
    s.samples.resize(16);
    for (auto& v : s.samples) v = value(rng);
    PartitionChoice choice;
    choice.entry_per_window = {entry(rng), entry(rng)};
    const Signal back = merge_partition(apply_partition(s, choice, catalog), choice, catalog);
    REQUIRE(back.samples == s.samples);  // bitwise
  }
}

TEST_CASE("zero signal round-trips to the zero signal") {
  const auto catalog = enumerate_catalog(8);
  const auto choice = shared_choice(WindowGrid(16, 8), catalog, 7);
  Signal zero;
  zero.samples.assign(16, 0.0);
  const Signal back = merge_partition(apply_partition(zero, choice, catalog), choice, catalog);
  CHECK(back.samples == zero.samples);
}

TEST_CASE("project returns the matching half of the partition") {
  auto rng = derive_rng(99);
  const auto catalog = enumerate_catalog(8);
  std::uniform_int_distribution<std::uint32_t> entry(0, static_cast<std::uint32_t>(catalog.size() - 1));
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Signal s;
    s.samples.resize(24);
    for (auto& v : s.samples) v = value(rng);
    PartitionChoice choice;
    choice.entry_per_window = {entry(rng), entry(rng), entry(rng)};
    const auto pair = apply_partition(s, choice, catalog);
    CHECK(project(s, choice, catalog, Side::left).samples == pair.left.samples);
    CHECK(project(s, choice, catalog, Side::right).samples == pair.right.samples);
  }
}

TEST_CASE("projection of the identity ramp under interleaving") {
  const auto catalog = enumerate_catalog(8);
  const Signal s = ramp_signal(16);
  const auto choice = interleaved_choice(WindowGrid(16, 8), catalog);
  CHECK(project(s, choice, catalog, Side::left).samples ==
        std::vector<double>{0, 2, 4, 6, 8, 10, 12, 14});
  CHECK(project(s, choice, catalog, Side::right).samples ==
        std::vector<double>{1, 3, 5, 7, 9, 11, 13, 15});
}

TEST_CASE("length mismatches are rejected") {
  const auto catalog = enumerate_catalog(8);
  const Signal s = ramp_signal(12);  // not a multiple of 8
  PartitionChoice choice;
  choice.entry_per_window = {0};
  CHECK_THROWS_AS(apply_partition(s, choice, catalog), std::invalid_argument);

  const Signal ok = ramp_signal(16);
  PartitionChoice short_choice;
  short_choice.entry_per_window = {0};  // needs 2 windows
  CHECK_THROWS_AS(apply_partition(ok, short_choice, catalog), std::invalid_argument);
}

TEST_CASE("signal validation") {
  CHECK_THROWS_AS(make_signal({}), std::invalid_argument);
  CHECK_THROWS_AS(make_signal({1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_signal({std::numeric_limits<double>::quiet_NaN()}),
                  std::invalid_argument);
}
