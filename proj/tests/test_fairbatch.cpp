#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "eofair/error.hpp"
#include "eofair/fairbatch.hpp"
#include "eofair/objectives.hpp"

using namespace eofair;

namespace {

GroupCounts counts_of(std::vector<std::array<std::size_t, 2>> c) {
  GroupCounts g;
  g.counts = std::move(c);
  for (const auto& row : g.counts) g.total += row[0] + row[1];
  return g;
}

GroupLossTable table_with(const std::vector<std::array<double, 2>>& means) {
  std::vector<double> ce;
  std::vector<int> labels, attrs;
  for (std::size_t y = 0; y < means.size(); ++y)
    for (int a = 0; a < 2; ++a) {
      ce.push_back(means[y][a]);
      labels.push_back(static_cast<int>(y));
      attrs.push_back(a);
    }
  return group_losses(ce, labels, attrs, static_cast<int>(means.size()));
}

}  // namespace

TEST_CASE("init_sampler") {
  auto s = init_sampler(counts_of({{10, 40}, {40, 10}}), 0.1, 1);
  CHECK(s.probs == std::vector<std::array<double, 2>>{{0.1, 0.4}, {0.4, 0.1}});
  CHECK(s.class_marginals == std::vector<double>{0.5, 0.5});
  s = init_sampler(counts_of({{5, 5}, {5, 5}}), 0.1, 1);
  for (const auto& row : s.probs) CHECK(row == std::array<double, 2>{0.25, 0.25});
  CHECK_THROWS_AS(init_sampler(counts_of({{5, 5}, {5, 5}}), 1.5, 1), Error);
  CHECK_THROWS_AS(init_sampler(counts_of({{5, 5}, {5, 5}}), 0.0, 1), Error);
  CHECK_THROWS_AS(init_sampler(counts_of({{0, 0}, {5, 5}}), 0.1, 1), Error);
}

TEST_CASE("update_probs moves mass toward the worse group") {
  auto s = init_sampler(counts_of({{10, 40}, {40, 10}}), 0.1, 1);
  update_probs(s, table_with({{0.3, 0.3}, {0.5, 0.9}}));
  CHECK(s.probs[0] == std::array<double, 2>{0.1, 0.4});
  CHECK(s.probs[1][0] == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(s.probs[1][1] == doctest::Approx(0.15).epsilon(1e-15));

  s = init_sampler(counts_of({{10, 40}, {40, 10}}), 0.1, 1);
  const auto before = s.probs;
  update_probs(s, table_with({{0.7, 0.7}, {0.2, 0.2}}));
  CHECK(s.probs == before);

  s = init_sampler(counts_of({{2, 48}, {25, 25}}), 0.1, 1);
  update_probs(s, table_with({{0.1, 0.9}, {0.4, 0.4}}));
  CHECK(s.probs[0][1] == doctest::Approx(0.48 + 0.02).epsilon(1e-15));
  s.probs[0] = {0.02, 0.48};
  update_probs(s, table_with({{0.1, 0.9}, {0.4, 0.4}}));
  CHECK(s.probs[0][0] == 0.0);
  CHECK(s.probs[0][1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("random update sequences keep a valid distribution") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> loss(0, 2);
  auto s = init_sampler(counts_of({{3, 30}, {17, 9}, {40, 1}}), 0.3, 2);
  const auto marginals = s.class_marginals;
  for (int step = 0; step < 500; ++step) {
    std::vector<std::array<double, 2>> means(3);
    for (auto& row : means) row = {loss(rng), loss(rng)};
    const auto prev = s.probs;
    update_probs(s, table_with(means));
    double total = 0;
    for (std::size_t y = 0; y < 3; ++y) {
      CHECK(s.probs[y][0] >= 0.0);
      CHECK(s.probs[y][1] >= 0.0);
      CHECK(std::abs(s.probs[y][0] + s.probs[y][1] - marginals[y]) <= 1e-15);
      total += s.probs[y][0] + s.probs[y][1];
      const int up = means[y][1] > means[y][0] ? 1 : 0;
      CHECK(s.probs[y][up] >= prev[y][up]);
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(s.class_marginals == marginals);
  }
}

TEST_CASE("sample_batch") {
  const Dataset ds = testing::dataset_with_counts({{50, 50}, {50, 50}});
  const auto index = GroupIndex::build(ds);

  auto s = init_sampler(group_counts(ds), 0.1, 3);
  s.probs = {{0.0, 1.0}, {0.0, 0.0}};
  for (auto i : sample_batch(s, index, 200)) {
    CHECK(ds.labels[i] == 0);
    CHECK(ds.attributes[i] == 1);
  }

  s = init_sampler(group_counts(ds), 0.1, 3);
  std::array<std::size_t, 4> hits{};
  for (auto i : sample_batch(s, index, 100000)) ++hits[ds.labels[i] * 2 + ds.attributes[i]];
  for (auto h : hits) CHECK(std::abs(h / 100000.0 - 0.25) <= 0.01);

  auto a = init_sampler(group_counts(ds), 0.1, 9), b = init_sampler(group_counts(ds), 0.1, 9);
  CHECK(sample_batch(a, index, 500) == sample_batch(b, index, 500));

  const Dataset missing = testing::dataset_with_counts({{50, 0}, {50, 50}});
  auto m = init_sampler(group_counts(ds), 0.1, 3);
  CHECK_THROWS_AS(sample_batch(m, GroupIndex::build(missing), 10), Error);
}
