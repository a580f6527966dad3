#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "eofair/error.hpp"
#include "eofair/model.hpp"
#include "eofair/objectives.hpp"

using namespace eofair;

namespace {

struct Batch {
  std::vector<double> ce;
  std::vector<int> labels, attrs;
};

// means[y][a] repeated counts[y][a] times.
Batch batch_from(const std::vector<std::array<double, 2>>& means,
                 const std::vector<std::array<std::size_t, 2>>& counts) {
  Batch b;
  for (std::size_t y = 0; y < means.size(); ++y)
    for (int a = 0; a < 2; ++a)
      for (std::size_t i = 0; i < counts[y][a]; ++i) {
        b.ce.push_back(means[y][a]);
        b.labels.push_back(static_cast<int>(y));
        b.attrs.push_back(a);
      }
  return b;
}

GroupLossTable table_of(const Batch& b, int classes) {
  return group_losses(b.ce, b.labels, b.attrs, classes);
}

double weighted_sum(const EffectiveWeights& w, const GroupLossTable& t) {
  double s = 0;
  for (int y = 0; y < t.num_classes(); ++y)
    for (int a = 0; a < 2; ++a)
      if (t.group_mean[y][a]) s += w.group_weight[y][a] * *t.group_mean[y][a];
  return s;
}

constexpr ObjectiveKind kAll[] = {ObjectiveKind::ce,         ObjectiveKind::eo_cla,
                                  ObjectiveKind::eo_glb,     ObjectiveKind::eo_cla_max,
                                  ObjectiveKind::eo_cla_min, ObjectiveKind::eo_glb_max,
                                  ObjectiveKind::eo_glb_min};

}  // namespace

TEST_CASE("group_losses means") {
  Batch b{{1, 3}, {1, 1}, {0, 1}};
  auto t = group_losses(b.ce, b.labels, b.attrs, 2);
  CHECK(*t.group_mean[1][0] == 1);
  CHECK(*t.group_mean[1][1] == 3);
  CHECK(*t.class_mean[1] == 2);
  CHECK_FALSE(t.group_mean[0][0].has_value());
  CHECK_FALSE(t.class_mean[0].has_value());
  CHECK_FALSE(t.occupied(0, 1));

  b = {{1, 1, 1, 5}, {1, 1, 1, 1}, {0, 0, 0, 1}};
  t = group_losses(b.ce, b.labels, b.attrs, 2);
  CHECK(*t.class_mean[1] == 2);
  CHECK(t.overall == 2);

  b = batch_from({{0.7, 0.7}, {0.7, 0.7}}, {{3, 1}, {2, 5}});
  t = table_of(b, 2);
  for (int y = 0; y < 2; ++y) {
    CHECK(*t.class_mean[y] == doctest::Approx(0.7));
    for (int a = 0; a < 2; ++a) CHECK(*t.group_mean[y][a] == doctest::Approx(0.7));
  }
  CHECK(t.overall == doctest::Approx(0.7));

  const std::vector<int> three = {0, 2, 1};
  CHECK_THROWS_AS(group_losses(std::vector<double>{1, 1, 1}, std::vector<int>{0, 0, 0}, three, 1),
                  Error);
  try {
    group_losses(std::vector<double>{1, 1, 1}, std::vector<int>{0, 0, 0}, three, 1);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::unsupported);
  }
}

TEST_CASE("objective_value hand example") {
  const Batch b = batch_from({{2, 2}, {1, 3}}, {{2, 2}, {2, 2}});
  const auto t = table_of(b, 2);
  CHECK(t.overall == 2);
  CHECK(objective_value(t, {ObjectiveKind::eo_cla, 0.5}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(objective_value(t, {ObjectiveKind::eo_glb, 0.5}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(objective_value(t, {ObjectiveKind::eo_cla_max, 0.5}) == doctest::Approx(2 + 0.5 * 5));
  CHECK(objective_value(t, {ObjectiveKind::eo_cla_min, 0.5}) == doctest::Approx(2 - 0.5 * 3));
  CHECK(objective_value(t, {ObjectiveKind::eo_glb_max, 0.5}) == doctest::Approx(2 + 0.5 * 1));
  CHECK(objective_value(t, {ObjectiveKind::eo_glb_min, 0.5}) == doctest::Approx(2 + 0.5 * 1));

  const auto w = effective_weights(t, {ObjectiveKind::eo_cla, 0.5}, b.labels, b.attrs);
  CHECK(w.group_weight[1][0] == doctest::Approx(0.25 - 0.5));
  CHECK(w.group_weight[1][1] == doctest::Approx(0.25 + 0.5));
  CHECK(w.group_weight[0][0] == doctest::Approx(0.25));
  CHECK(w.group_weight[0][1] == doctest::Approx(0.25));
  CHECK(weighted_sum(w, t) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("lambda zero and equalised groups reduce to CE") {
  const Batch b = batch_from({{0.3, 1.2}, {0.9, 0.4}}, {{5, 2}, {3, 7}});
  const auto t = table_of(b, 2);
  for (auto kind : kAll) {
    CHECK(objective_value(t, {kind, 0.0}) == t.overall);
    const auto w = effective_weights(t, {kind, 0.0}, b.labels, b.attrs);
    for (std::size_t i = 0; i < b.ce.size(); ++i)
      CHECK(w.per_example[i] == doctest::Approx(1.0 / 17).epsilon(1e-15));
  }
  const Batch eq = batch_from({{0.5, 0.5}, {0.5, 0.5}}, {{5, 2}, {3, 7}});
  const auto te = table_of(eq, 2);
  CHECK(objective_value(te, {ObjectiveKind::eo_cla, 2.0}) == doctest::Approx(te.overall));
  CHECK(objective_value(te, {ObjectiveKind::eo_glb, 2.0}) == doctest::Approx(te.overall));
}

TEST_CASE("effective weights arithmetic and CE weights") {
  const Batch b = batch_from({{1.0, 0.5}, {0.2, 0.4}}, {{25, 25}, {25, 25}});
  const auto t = table_of(b, 2);
  const auto w = effective_weights(t, {ObjectiveKind::eo_cla, 0.5}, b.labels, b.attrs);
  CHECK(w.group_weight[0][0] == doctest::Approx(0.75));
  CHECK(w.group_weight[0][1] == doctest::Approx(-0.25));
  CHECK(w.per_example[0] == doctest::Approx(0.75 / 25));

  const auto ce = effective_weights(t, {ObjectiveKind::ce, 0.0}, b.labels, b.attrs);
  for (const auto& row : ce.group_weight)
    for (double g : row) CHECK(g == 0.25);

  const std::vector<int> bad_attrs(b.attrs.size(), 2);
  CHECK_THROWS_AS(effective_weights(t, {ObjectiveKind::eo_cla, 0.5}, b.labels, bad_attrs), Error);
}

TEST_CASE("weighted group sums reproduce every objective on random tables") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> loss(0.0, 3.0);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int classes = 2 + trial % 4;
    std::vector<std::array<double, 2>> means(classes);
    std::vector<std::array<std::size_t, 2>> counts(classes);
    for (int y = 0; y < classes; ++y)
      for (int a = 0; a < 2; ++a) {
        means[y][a] = trial % 5 == 0 ? std::round(loss(rng)) : loss(rng);  // ties every 5th table
        counts[y][a] = static_cast<std::size_t>(count(rng));
      }
    counts[0][0] = std::max<std::size_t>(counts[0][0], 1);
    const Batch b = batch_from(means, counts);
    const auto t = table_of(b, classes);

    double n_overall = 0, sum_mL = 0;
    for (int y = 0; y < classes; ++y)
      for (int a = 0; a < 2; ++a)
        if (t.group_mean[y][a]) sum_mL += counts[y][a] * *t.group_mean[y][a];
    n_overall = t.overall * static_cast<double>(t.counts.total);
    CHECK(std::abs(n_overall - sum_mL) <= 1e-9);

    for (int y = 0; y < classes; ++y) {
      const auto& g = t.group_mean[y];
      if (g[0] && g[1]) {
        const double c = *t.class_mean[y];
        CHECK(sign_of(*g[0] - c) * sign_of(*g[1] - c) <= 0);
      }
    }

    for (auto kind : kAll) {
      const ObjectiveSpec spec{kind, 0.1 + 0.2 * (trial % 4)};
      const auto w = effective_weights(t, spec, b.labels, b.attrs);
      CHECK(std::abs(weighted_sum(w, t) - objective_value(t, spec)) <= 1e-9);
      for (std::size_t i = 0; i < b.ce.size(); ++i)
        CHECK(w.per_example[i] ==
              w.group_weight[b.labels[i]][b.attrs[i]] /
                  static_cast<double>(counts[b.labels[i]][b.attrs[i]]));
    }

    double range = 0, penalty = 0;
    for (int y = 0; y < classes; ++y) {
      const auto& g = t.group_mean[y];
      if (!g[0] && !g[1]) continue;
      range += std::max(g[0].value_or(*g[1]), g[1].value_or(*g[0])) -
               std::min(g[0].value_or(*g[1]), g[1].value_or(*g[0]));
      for (const auto& l : g)
        if (l) penalty += std::abs(*l - *t.class_mean[y]);
    }
    CHECK(std::abs(range - penalty) <= 1e-9);
  }
}

TEST_CASE("effective weights give the gradient of the objective") {
  ModelParams p = init_params(5, 8, 3, 4);
  const Matrix x = testing::random_matrix(30, 5, 8);
  const auto labels = testing::random_ints(30, 3, 9), attrs = testing::random_ints(30, 2, 10);
  for (auto kind : kAll) {
    const ObjectiveSpec spec{kind, 0.7};
    const auto loss = [&](const ModelParams& q) {
      const auto f = forward(q, x, labels);
      return objective_value(group_losses(f.per_example_ce, labels, attrs, 3), spec);
    };
    const auto f = forward(p, x, labels);
    const auto t = group_losses(f.per_example_ce, labels, attrs, 3);
    const auto w = effective_weights(t, spec, labels, attrs);
    const auto g = backward(p, x, labels, f, w.per_example);
    CHECK(gradient_check(p, g, loss) < 1e-4);
  }
}

TEST_CASE("bce_positive_group") {
  Matrix probs(3, 2);
  probs(0, 1) = 0.5;
  probs(1, 1) = 0.25;
  probs(2, 1) = 1.0;
  const std::vector<int> labels = {1, 1, 1}, attrs = {0, 0, 1};
  CHECK(bce_positive_group(probs, labels, attrs, 1, 0) == doctest::Approx(1.5 * std::log(2.0)));
  CHECK(bce_positive_group(probs, labels, attrs, 1, 1) == 0.0);
  CHECK_THROWS_AS(bce_positive_group(probs, labels, attrs, 0, 0), Error);

  const ModelParams p = init_params(3, 4, 2, 2);
  const Matrix x = testing::random_matrix(40, 3, 3);
  const auto y = testing::random_ints(40, 2, 4), a = testing::random_ints(40, 2, 5);
  const auto f = forward(p, x, y);
  const auto t = group_losses(f.per_example_ce, y, a, 2);
  for (int yy = 0; yy < 2; ++yy)
    for (int aa = 0; aa < 2; ++aa)
      CHECK(std::abs(bce_positive_group(f.probabilities, y, a, yy, aa) - *t.group_mean[yy][aa]) <=
            1e-12);
}

TEST_CASE("objective names round trip") {
  for (auto kind : kAll) CHECK(parse_objective_kind(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_objective_kind("eo"), Error);
  CHECK_THROWS_AS(ObjectiveSpec({ObjectiveKind::eo_cla, -1.0}).validate(), Error);
}
