#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "eofair/dataset.hpp"
#include "eofair/error.hpp"

using namespace eofair;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("eofair_test_" + name);
  std::ofstream(p) << text;
  return p;
}

ErrorCategory category_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::internal;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// P(X > 0) for X ~ N(mu, 1), by composite Simpson over [0, mu + 12].
double gaussian_tail_simpson(double mu) {
  const int n = 20000;
  const double lo = 0.0, hi = mu + 12.0, h = (hi - lo) / n;
  const auto pdf = [&](double x) { return std::exp(-0.5 * (x - mu) * (x - mu)) / std::sqrt(2 * M_PI); };
  double s = pdf(lo) + pdf(hi);
  for (int i = 1; i < n; ++i) s += pdf(lo + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("generate_synthetic realises the skewed joint") {
  SynthSpec spec = moji_like_spec(100000, 3);
  const Dataset ds = generate_synthetic(spec);
  REQUIRE(ds.size() == 100000);
  const auto c = group_counts(ds);
  // Multinomial sd for p=0.4 is ~155, for p=0.1 ~95; allow 5 sd.
  CHECK(std::abs(static_cast<double>(c.at(0, 0)) - 10000) < 500);
  CHECK(std::abs(static_cast<double>(c.at(0, 1)) - 40000) < 800);
  CHECK(std::abs(static_cast<double>(c.at(1, 0)) - 40000) < 800);
  CHECK(std::abs(static_cast<double>(c.at(1, 1)) - 10000) < 500);
  CHECK(generate_synthetic(spec) == ds);
  spec.seed = 4;
  CHECK_FALSE(generate_synthetic(spec) == ds);
}

TEST_CASE("uniform joint gives balanced, uncorrelated groups") {
  SynthSpec spec;
  spec.n = 4000;
  spec.joint = {{0.25, 0.25}, {0.25, 0.25}};
  spec.seed = 11;
  const Dataset ds = generate_synthetic(spec);
  const auto c = group_counts(ds);
  for (int y = 0; y < 2; ++y)
    for (int a = 0; a < 2; ++a) CHECK(std::abs(static_cast<double>(c.at(y, a)) - 1000) < 140);
  double my = 0, ma = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) my += ds.labels[i], ma += ds.attributes[i];
  my /= ds.size(), ma /= ds.size();
  double cov = 0, vy = 0, va = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    cov += (ds.labels[i] - my) * (ds.attributes[i] - ma);
    vy += (ds.labels[i] - my) * (ds.labels[i] - my);
    va += (ds.attributes[i] - ma) * (ds.attributes[i] - ma);
  }
  CHECK(std::abs(cov / std::sqrt(vy * va)) < 0.06);
}

TEST_CASE("Bayes rule accuracy matches the Gaussian error integral") {
  const double oracle = gaussian_tail_simpson(1.0);
  CHECK(oracle == doctest::Approx(0.841344746).epsilon(1e-8));

  SynthSpec spec;
  spec.n = 200000;
  spec.joint = {{0.25, 0.25}, {0.25, 0.25}};
  spec.class_separation = 2.0;
  spec.attribute_leak = 0.0;
  spec.noise_std = 1.0;
  spec.dim = 2;
  spec.seed = 5;
  const Dataset ds = generate_synthetic(spec);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    correct += (ds.features(i, 0) > 0 ? 1 : 0) == ds.labels[i];
  // Binomial sd at n=200000 is ~0.0008.
  CHECK(static_cast<double>(correct) / ds.size() == doctest::Approx(oracle).epsilon(0.005));
}

TEST_CASE("multi-class preset is valid and seeded") {
  const SynthSpec s = bios_like_spec(5000, 2);
  CHECK(s.num_classes == 28);
  CHECK_NOTHROW(s.validate());
  const Dataset ds = generate_synthetic(s);
  CHECK(ds.num_classes == 28);
  CHECK(ds.size() == 5000);
  CHECK_FALSE(bios_like_spec(5000, 3).joint == s.joint);

  const SynthSpec b = balanced_variant(s, 2800, 9);
  for (const auto& row : b.joint) {
    CHECK(row[0] == doctest::Approx(1.0 / 56));
    CHECK(row[1] == doctest::Approx(1.0 / 56));
  }
}

TEST_CASE("invalid synthetic specs are rejected") {
  SynthSpec s = moji_like_spec(100, 1);
  s.joint[0][0] = -0.1;
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::validation);
  s = moji_like_spec(100, 1);
  s.joint[0][0] = 0.2;
  CHECK(category_of([&] { generate_synthetic(s); }) == ErrorCategory::validation);
  s = moji_like_spec(100, 1);
  s.noise_std = 0.0;
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::validation);
  s = moji_like_spec(100, 1);
  s.dim = 1;
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::validation);
}

TEST_CASE("load_csv parses and reports bad lines") {
  const auto ok = temp_file("ok.csv", "y,a,f0,f1\n0,1,0.5,-1\n1,0,2,3e-1\n");
  const Dataset ds = load_csv(ok);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.attributes == std::vector<int>{1, 0});
  CHECK(ds.features(1, 1) == 0.3);

  const auto bad_attr = temp_file("attr.csv", "y,a,f0\n0,1,0.5\n1,2,0.1\n");
  CHECK(category_of([&] { load_csv(bad_attr); }) == ErrorCategory::parse);
  CHECK(message_of([&] { load_csv(bad_attr); }).find(":3:") != std::string::npos);

  const auto empty = temp_file("empty.csv", "y,a,f0\n");
  CHECK(message_of([&] { load_csv(empty); }).find("no examples") != std::string::npos);

  const auto ragged = temp_file("ragged.csv", "y,a,f0,f1\n0,1,0.5\n");
  CHECK(message_of([&] { load_csv(ragged); }).find(":2:") != std::string::npos);

  const auto text = temp_file("text.csv", "y,a,f0\n0,1,abc\n");
  CHECK(category_of([&] { load_csv(text); }) == ErrorCategory::parse);

  CHECK(category_of([&] { load_csv("/nonexistent/x.csv"); }) == ErrorCategory::io);

  const auto reordered = temp_file("cols.csv", "f0,label,g\n1.5,2,1\n");
  const Dataset r = load_csv(reordered, {"label", "g", {}});
  CHECK(r.labels == std::vector<int>{2});
  CHECK(r.num_classes == 3);
  CHECK(r.features(0, 0) == 1.5);
}

TEST_CASE("save_csv round-trips exactly") {
  const Dataset ds = generate_synthetic(moji_like_spec(300, 8));
  const fs::path p = fs::temp_directory_path() / "eofair_test_roundtrip.csv";
  save_csv(ds, p);
  CHECK(load_csv(p) == ds);
}

TEST_CASE("group_counts") {
  auto c = group_counts(testing::make_dataset({0, 0, 1, 1}, {0, 1, 0, 1}, 2));
  CHECK(c.counts == std::vector<std::array<std::size_t, 2>>{{1, 1}, {1, 1}});
  CHECK(c.total == 4);
  c = group_counts(testing::make_dataset({1, 1, 1}, {0, 0, 1}, 2));
  CHECK(c.counts == std::vector<std::array<std::size_t, 2>>{{0, 0}, {2, 1}});
  CHECK(c.total == 3);
}

TEST_CASE("downsample_balanced") {
  auto check_counts = [](std::vector<std::array<std::size_t, 2>> in,
                         std::vector<std::array<std::size_t, 2>> expected) {
    const Dataset ds = testing::dataset_with_counts(in);
    const Dataset out = downsample_balanced(ds, 3);
    CHECK(group_counts(out).counts == expected);
    return std::pair(ds, out);
  };
  check_counts({{400, 100}, {100, 400}}, {{100, 100}, {100, 100}});
  check_counts({{3, 7}, {9, 2}}, {{3, 3}, {2, 2}});
  auto [ds, out] = check_counts({{50, 50}, {50, 50}}, {{50, 50}, {50, 50}});
  CHECK(out == ds);

  const Dataset skew = testing::dataset_with_counts({{5, 0}, {3, 3}});
  CHECK(category_of([&] { downsample_balanced(skew, 1); }) == ErrorCategory::validation);

  const Dataset big = generate_synthetic(moji_like_spec(5000, 4));
  const auto c = group_counts(downsample_balanced(big, 9));
  for (int y = 0; y < 2; ++y) CHECK(c.at(y, 0) == c.at(y, 1));
  CHECK(downsample_balanced(big, 9) == downsample_balanced(big, 9));
}

TEST_CASE("rw_weights") {
  const auto balanced = rw_weights(testing::dataset_with_counts({{5, 5}, {5, 5}}));
  for (double w : balanced) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));

  const Dataset ds = testing::dataset_with_counts({{10, 40}, {40, 10}});
  const auto w = rw_weights(ds);
  std::array<std::array<double, 2>, 2> mass{};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.attributes[i] == 0 && ds.labels[i] == 0) CHECK(w[i] == doctest::Approx(2.5));
    if (ds.attributes[i] == 1 && ds.labels[i] == 0) CHECK(w[i] == doctest::Approx(0.625));
    mass[ds.labels[i]][ds.attributes[i]] += w[i];
  }
  for (auto& row : mass)
    for (double m : row) CHECK(std::abs(m - 25.0) <= 1e-9);

  const Dataset gen = generate_synthetic(bios_like_spec(3000, 6));
  const auto gw = rw_weights(gen);
  const auto gc = group_counts(gen);
  std::vector<std::array<double, 2>> gm(28);
  for (std::size_t i = 0; i < gen.size(); ++i) gm[gen.labels[i]][gen.attributes[i]] += gw[i];
  for (int y = 0; y < 28; ++y)
    for (int a = 0; a < 2; ++a)
      if (gc.at(y, a) > 0) CHECK(std::abs(gm[y][a] - 3000.0 / 56) <= 1e-9);
}

TEST_CASE("stratified_partition sizes and exhaustiveness") {
  const Dataset eight = testing::dataset_with_counts({{8, 0}});
  const double f1[] = {0.5, 0.25, 0.25};
  auto parts = stratified_partition(eight, f1, 1);
  CHECK(parts[0].size() == 4);
  CHECK(parts[1].size() == 2);
  CHECK(parts[2].size() == 2);

  const Dataset five = testing::dataset_with_counts({{5, 0}});
  const double f2[] = {0.6, 0.2, 0.2};
  parts = stratified_partition(five, f2, 1);
  CHECK(parts[0].size() == 3);
  CHECK(parts[1].size() == 1);
  CHECK(parts[2].size() == 1);

  const double bad[] = {0.9, 0.2, 0.1};
  CHECK(category_of([&] { stratified_partition(five, bad, 1); }) == ErrorCategory::validation);

  const Dataset two = testing::dataset_with_counts({{2, 4}});
  CHECK(category_of([&] { stratified_partition(two, f2, 1); }) == ErrorCategory::validation);

  const Dataset ds = generate_synthetic(bios_like_spec(20000, 12));
  const double f3[] = {0.8, 0.1, 0.1};
  parts = stratified_partition(ds, f3, 77);
  std::set<std::size_t> all;
  std::size_t total = 0;
  for (const auto& p : parts) {
    CHECK(std::is_sorted(p.begin(), p.end()));
    all.insert(p.begin(), p.end());
    total += p.size();
  }
  CHECK(total == ds.size());
  CHECK(all.size() == ds.size());
  CHECK(stratified_partition(ds, f3, 77) == parts);

  const Split s = stratified_split(ds, {0.8, 0.1, 0.1}, 77);
  CHECK(s.train.size() + s.dev.size() + s.test.size() == ds.size());
  CHECK(s.dev.num_classes == 28);
}
