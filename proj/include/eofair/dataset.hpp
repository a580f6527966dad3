#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eofair/matrix.hpp"

namespace eofair {

/// Labeled examples with a binary protected attribute.
///
/// Invariants (checked by validate()): one feature row, label and attribute
/// per example; labels in [0, num_classes); attributes in {0, 1}.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<int> attributes;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

/// m_{y,a}: number of examples per (label, attribute) cell.
struct GroupCounts {
  std::vector<std::array<std::size_t, 2>> counts;
  std::size_t total = 0;

  int num_classes() const noexcept { return static_cast<int>(counts.size()); }
  std::size_t at(int y, int a) const { return counts.at(static_cast<std::size_t>(y))[a]; }
  std::size_t class_total(int y) const { return at(y, 0) + at(y, 1); }

  bool operator==(const GroupCounts&) const = default;
};

/// Parameters of the Gaussian-cluster generator.
///
/// Class means lie on dedicated axes: for two classes, +-separation/2 along
/// axis 0; for more classes, separation/sqrt(2) along axis y (so every pair
/// of means is `class_separation` apart). The last axis carries
/// attribute_leak * (a - 0.5). Every coordinate gets N(0, noise_std^2).
struct SynthSpec {
  std::size_t n = 0;
  int num_classes = 2;
  std::vector<std::array<double, 2>> joint;  // P(y, a), rows indexed by y
  double class_separation = 2.0;
  double attribute_leak = 0.0;
  double noise_std = 1.0;
  std::size_t dim = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two-class spec with the skewed 10/40/40/10 joint of the sentiment/dialect task.
SynthSpec moji_like_spec(std::size_t n, std::uint64_t seed);
/// 28 classes, power-law class frequencies and seeded per-class attribute skews.
/// An approximation of an occupation/gender corpus, not a reproduction.
SynthSpec bios_like_spec(std::size_t n, std::uint64_t seed);
/// Same generator settings with every (y, a) cell equally likely.
SynthSpec balanced_variant(const SynthSpec& spec, std::size_t n, std::uint64_t seed);

Dataset generate_synthetic(const SynthSpec& spec);

struct CsvSchema {
  std::string label_column = "y";
  std::string attribute_column = "a";
  std::optional<int> num_classes;  // default: max label + 1
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
void save_csv(const Dataset& ds, const std::filesystem::path& path);

GroupCounts group_counts(const Dataset& ds);

/// Per class, subsample both attribute groups without replacement to the
/// smaller group's size. Row order of the input is kept.
Dataset downsample_balanced(const Dataset& ds, std::uint64_t seed);

/// w_i = 1 / (C * |A| * P(y_i, a_i)) with P the empirical joint.
std::vector<double> rw_weights(const Dataset& ds);

/// Index sets of a stratified split: every (y, a) cell is shuffled and cut
/// in proportion to `fractions` with largest-remainder rounding. Each part
/// is returned in ascending index order.
std::vector<std::vector<std::size_t>> stratified_partition(const Dataset& ds,
                                                           std::span<const double> fractions,
                                                           std::uint64_t seed);

struct Split {
  Dataset train;
  Dataset dev;
  Dataset test;
};

Split stratified_split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed);

}  // namespace eofair
