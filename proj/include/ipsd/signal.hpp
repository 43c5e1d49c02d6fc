#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ipsd {

// A finite single-channel sequence of real samples.
struct Signal {
  std::vector<double> samples;
  double sample_rate_hz = 256.0;

  std::size_t size() const { return samples.size(); }
};

// Throws std::invalid_argument unless the signal is non-empty, finite,
// and has a positive sample rate.
void validate_signal(const Signal& s);

Signal make_signal(std::vector<double> samples, double sample_rate_hz = 256.0);

// Non-overlapping segmentation of a length-L signal into windows of even
// length W, with W dividing L.
struct WindowGrid {
  std::size_t signal_len = 0;
  std::size_t window_len = 0;

  WindowGrid(std::size_t signal_len, std::size_t window_len);
  std::size_t num_windows() const { return signal_len / window_len; }
};

// Canonical enumeration of the C(W, W/2)/2 ways to split a length-W window
// into two equal halves. Each stored entry is the half containing index 0;
// the other half is its complement. Entries are lexicographically sorted,
// which fixes stable action indices across runs.
class PartitionCatalog {
 public:
  static PartitionCatalog enumerate(std::size_t window_len);

  std::size_t window_len() const { return window_len_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<int>& entry(std::size_t i) const { return entries_[i]; }
  std::vector<int> complement(std::size_t i) const;

  // Index of the even-sample subset {0, 2, ..., W-2}.
  std::size_t interleaved_index() const { return interleaved_index_; }

 private:
  PartitionCatalog() = default;
  std::size_t window_len_ = 0;
  std::vector<std::vector<int>> entries_;
  std::size_t interleaved_index_ = 0;
};

PartitionCatalog enumerate_catalog(std::size_t window_len);

// One catalog entry per window.
struct PartitionChoice {
  std::vector<std::uint32_t> entry_per_window;

  std::size_t num_windows() const { return entry_per_window.size(); }
};

// Choice that assigns alternating samples to the two sub-signals.
PartitionChoice interleaved_choice(const WindowGrid& grid, const PartitionCatalog& catalog);

// Choice that uses the same catalog entry in every window.
PartitionChoice shared_choice(const WindowGrid& grid, const PartitionCatalog& catalog,
                              std::size_t entry_index);

struct SubSignalPair {
  Signal left;
  Signal right;
};

// Flat sample indices selected by a choice, in signal order. left holds the
// chosen subsets, right their complements; together they cover 0..L-1.
struct PartitionIndexMap {
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
};

PartitionIndexMap build_index_map(std::size_t signal_len, const PartitionChoice& choice,
                                  const PartitionCatalog& catalog);

SubSignalPair apply_partition(const Signal& s, const PartitionChoice& choice,
                              const PartitionCatalog& catalog);

// Exact inverse of apply_partition for the same choice and catalog.
Signal merge_partition(const SubSignalPair& pair, const PartitionChoice& choice,
                       const PartitionCatalog& catalog);

enum class Side { left, right };

// The requested half of apply_partition(s, choice, catalog).
Signal project(const Signal& s, const PartitionChoice& choice, const PartitionCatalog& catalog,
               Side side);

// Symmetric mismatch between the two halves of a signal under a choice:
// |l - r|^2 + |r - l|^2. Zero exactly when both halves carry the same
// sequence, i.e. when the split is exact for that content.
double pair_mismatch(const Signal& s, const PartitionChoice& choice,
                     const PartitionCatalog& catalog);

}  // namespace ipsd
