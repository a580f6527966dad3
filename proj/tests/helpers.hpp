#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "eofair/dataset.hpp"
#include "eofair/matrix.hpp"

namespace testing {

inline eofair::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                    double scale = 1.0) {
  eofair::Matrix m(rows, cols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

inline std::vector<int> random_ints(std::size_t n, int bound, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, bound - 1);
  std::vector<int> out(n);
  for (int& v : out) v = dist(rng);
  return out;
}

inline eofair::Dataset make_dataset(std::vector<int> labels, std::vector<int> attrs, int classes,
                                    std::size_t dim = 2, std::uint64_t seed = 7) {
  eofair::Dataset ds;
  ds.features = random_matrix(labels.size(), dim, seed);
  ds.labels = std::move(labels);
  ds.attributes = std::move(attrs);
  ds.num_classes = classes;
  return ds;
}

// Dataset with counts[y][a] rows of each cell, cells laid out in order.
inline eofair::Dataset dataset_with_counts(const std::vector<std::array<std::size_t, 2>>& counts,
                                           std::size_t dim = 2, std::uint64_t seed = 7) {
  std::vector<int> labels, attrs;
  for (std::size_t y = 0; y < counts.size(); ++y)
    for (int a = 0; a < 2; ++a)
      for (std::size_t i = 0; i < counts[y][a]; ++i) {
        labels.push_back(static_cast<int>(y));
        attrs.push_back(a);
      }
  return make_dataset(std::move(labels), std::move(attrs), static_cast<int>(counts.size()), dim,
                      seed);
}

}  // namespace testing
