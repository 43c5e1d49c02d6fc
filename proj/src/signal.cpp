#include "ipsd/signal.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ipsd {

void validate_signal(const Signal& s) {
  if (s.samples.empty()) throw std::invalid_argument("signal must contain at least one sample");
  if (!(s.sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  for (double v : s.samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("signal contains a non-finite sample");
  }
}

Signal make_signal(std::vector<double> samples, double sample_rate_hz) {
  Signal s{std::move(samples), sample_rate_hz};
  validate_signal(s);
  return s;
}

WindowGrid::WindowGrid(std::size_t signal_len_in, std::size_t window_len_in)
    : signal_len(signal_len_in), window_len(window_len_in) {
  if (window_len < 2 || window_len % 2 != 0)
    throw std::invalid_argument("window length must be even and at least 2");
  if (signal_len == 0 || signal_len % window_len != 0)
    throw std::invalid_argument("window length must divide the signal length");
}

PartitionCatalog PartitionCatalog::enumerate(std::size_t window_len) {
  if (window_len % 2 != 0 || window_len < 2 || window_len > 12)
    throw std::invalid_argument("window length must be even and in [2, 12], got " +
                                std::to_string(window_len));
  const int w = static_cast<int>(window_len);
  const int half = w / 2;

  PartitionCatalog catalog;
  catalog.window_len_ = window_len;

  // Every canonical entry contains index 0, so enumerating subsets of
  // {1,..,W-1} of size W/2 - 1 in lexicographic order yields all
  // C(W-1, W/2-1) = C(W, W/2)/2 entries, already sorted and free of
  // complement duplicates (a complement never contains 0).
  std::vector<int> rest(half - 1);
  for (int i = 0; i < half - 1; ++i) rest[i] = i + 1;
  while (true) {
    std::vector<int> entry;
    entry.reserve(half);
    entry.push_back(0);
    entry.insert(entry.end(), rest.begin(), rest.end());
    catalog.entries_.push_back(std::move(entry));
    // next combination of `rest` in lexicographic order
    int i = half - 2;
    while (i >= 0 && rest[i] == w - (half - 1 - i)) --i;
    if (i < 0) break;
    ++rest[i];
    for (int j = i + 1; j < half - 1; ++j) rest[j] = rest[j - 1] + 1;
  }

  std::vector<int> interleaved(half);
  for (int i = 0; i < half; ++i) interleaved[i] = 2 * i;
  auto it = std::find(catalog.entries_.begin(), catalog.entries_.end(), interleaved);
  assert(it != catalog.entries_.end() && "catalog is missing the interleaved subset");
  catalog.interleaved_index_ = static_cast<std::size_t>(it - catalog.entries_.begin());
  return catalog;
}

std::vector<int> PartitionCatalog::complement(std::size_t i) const {
  const auto& e = entries_.at(i);
  std::vector<int> comp;
  comp.reserve(window_len_ / 2);
  std::size_t pos = 0;
  for (int v = 0; v < static_cast<int>(window_len_); ++v) {
    if (pos < e.size() && e[pos] == v) {
      ++pos;
    } else {
      comp.push_back(v);
    }
  }
  return comp;
}

PartitionCatalog enumerate_catalog(std::size_t window_len) {
  return PartitionCatalog::enumerate(window_len);
}

PartitionChoice interleaved_choice(const WindowGrid& grid, const PartitionCatalog& catalog) {
  return shared_choice(grid, catalog, catalog.interleaved_index());
}

PartitionChoice shared_choice(const WindowGrid& grid, const PartitionCatalog& catalog,
                              std::size_t entry_index) {
  if (catalog.window_len() != grid.window_len)
    throw std::invalid_argument("catalog window length does not match the grid");
  if (entry_index >= catalog.size()) throw std::invalid_argument("catalog entry out of range");
  PartitionChoice choice;
  choice.entry_per_window.assign(grid.num_windows(), static_cast<std::uint32_t>(entry_index));
  return choice;
}

PartitionIndexMap build_index_map(std::size_t signal_len, const PartitionChoice& choice,
                                  const PartitionCatalog& catalog) {
  const std::size_t w = catalog.window_len();
  if (signal_len == 0 || signal_len % w != 0)
    throw std::invalid_argument("signal length must be a positive multiple of the window length");
  const std::size_t num_windows = signal_len / w;
  if (choice.entry_per_window.size() != num_windows)
    throw std::invalid_argument("partition choice length does not match the window count");

  PartitionIndexMap map;
  map.left.reserve(signal_len / 2);
  map.right.reserve(signal_len / 2);
  for (std::size_t k = 0; k < num_windows; ++k) {
    const std::uint32_t e = choice.entry_per_window[k];
    if (e >= catalog.size()) throw std::invalid_argument("partition choice entry out of range");
    const auto& subset = catalog.entry(e);
    const std::uint32_t base = static_cast<std::uint32_t>(k * w);
    std::size_t pos = 0;
    for (std::uint32_t v = 0; v < w; ++v) {
      if (pos < subset.size() && subset[pos] == static_cast<int>(v)) {
        map.left.push_back(base + v);
        ++pos;
      } else {
        map.right.push_back(base + v);
      }
    }
  }
  return map;
}

SubSignalPair apply_partition(const Signal& s, const PartitionChoice& choice,
                              const PartitionCatalog& catalog) {
  const PartitionIndexMap map = build_index_map(s.size(), choice, catalog);
  SubSignalPair pair;
  pair.left.sample_rate_hz = s.sample_rate_hz;
  pair.right.sample_rate_hz = s.sample_rate_hz;
  pair.left.samples.reserve(map.left.size());
  pair.right.samples.reserve(map.right.size());
  for (std::uint32_t i : map.left) pair.left.samples.push_back(s.samples[i]);
  for (std::uint32_t i : map.right) pair.right.samples.push_back(s.samples[i]);
  return pair;
}

Signal merge_partition(const SubSignalPair& pair, const PartitionChoice& choice,
                       const PartitionCatalog& catalog) {
  if (pair.left.size() != pair.right.size())
    throw std::invalid_argument("sub-signal halves must have equal length");
  const std::size_t total = pair.left.size() + pair.right.size();
  const PartitionIndexMap map = build_index_map(total, choice, catalog);

  Signal merged;
  merged.sample_rate_hz = pair.left.sample_rate_hz;
  merged.samples.resize(total);
  for (std::size_t i = 0; i < map.left.size(); ++i)
    merged.samples[map.left[i]] = pair.left.samples[i];
  for (std::size_t i = 0; i < map.right.size(); ++i)
    merged.samples[map.right[i]] = pair.right.samples[i];
  return merged;
}

Signal project(const Signal& s, const PartitionChoice& choice, const PartitionCatalog& catalog,
               Side side) {
  const PartitionIndexMap map = build_index_map(s.size(), choice, catalog);
  const auto& idx = side == Side::left ? map.left : map.right;
  Signal out;
  out.sample_rate_hz = s.sample_rate_hz;
  out.samples.reserve(idx.size());
  for (std::uint32_t i : idx) out.samples.push_back(s.samples[i]);
  return out;
}

double pair_mismatch(const Signal& s, const PartitionChoice& choice,
                     const PartitionCatalog& catalog) {
  const PartitionIndexMap map = build_index_map(s.size(), choice, catalog);
  double sq = 0.0;
  for (std::size_t i = 0; i < map.left.size(); ++i) {
    const double d = s.samples[map.left[i]] - s.samples[map.right[i]];
    sq += d * d;
  }
  return 2.0 * sq;
}

}  // namespace ipsd
