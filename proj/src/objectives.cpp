#include "eofair/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eofair/error.hpp"

namespace eofair {

namespace {

constexpr std::array<std::pair<ObjectiveKind, std::string_view>, 7> kNames = {{
    {ObjectiveKind::ce, "ce"},
    {ObjectiveKind::eo_cla, "eo_cla"},
    {ObjectiveKind::eo_glb, "eo_glb"},
    {ObjectiveKind::eo_cla_max, "eo_cla_max"},
    {ObjectiveKind::eo_cla_min, "eo_cla_min"},
    {ObjectiveKind::eo_glb_max, "eo_glb_max"},
    {ObjectiveKind::eo_glb_min, "eo_glb_min"},
}};

void check_groups(std::span<const int> labels, std::span<const int> attributes, int num_classes) {
  require(labels.size() == attributes.size(), ErrorCategory::validation,
          "labels and attributes differ in length");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(attributes[i] == 0 || attributes[i] == 1, ErrorCategory::unsupported,
            "only binary protected attributes are supported (got " +
                std::to_string(attributes[i]) + ")");
    require(labels[i] >= 0 && labels[i] < num_classes, ErrorCategory::validation,
            "label out of range");
  }
}

// Attribute index with the larger (or smaller) mean loss in class y; -1 if
// the class is empty. Ties go to attribute 0.
int extreme_group(const GroupLossTable& t, int y, bool want_max) {
  const auto& g = t.group_mean[static_cast<std::size_t>(y)];
  if (!g[0] && !g[1]) return -1;
  if (!g[0]) return 1;
  if (!g[1]) return 0;
  if (want_max) return *g[1] > *g[0] ? 1 : 0;
  return *g[1] < *g[0] ? 1 : 0;
}

}  // namespace

std::string_view to_string(ObjectiveKind k) noexcept {
  for (const auto& [kind, name] : kNames)
    if (kind == k) return name;
  return "ce";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  for (const auto& [kind, n] : kNames)
    if (n == name) return kind;
  fail(ErrorCategory::config, "unknown objective '" + std::string(name) + "'");
}

void ObjectiveSpec::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCategory::validation,
          "lambda must be finite and non-negative");
}

int sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

GroupLossTable group_losses(std::span<const double> per_example_ce, std::span<const int> labels,
                            std::span<const int> attributes, int num_classes) {
  require(per_example_ce.size() == labels.size(), ErrorCategory::validation,
          "losses and labels differ in length");
  require(!labels.empty(), ErrorCategory::validation, "group_losses needs a non-empty batch");
  check_groups(labels, attributes, num_classes);

  const auto classes = static_cast<std::size_t>(num_classes);
  std::vector<std::array<double, 2>> sum(classes, {0.0, 0.0});
  GroupLossTable t;
  t.counts.counts.assign(classes, {0, 0});
  t.counts.total = labels.size();
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    sum[y][attributes[i]] += per_example_ce[i];
    ++t.counts.counts[y][attributes[i]];
    total += per_example_ce[i];
  }
  t.overall = total / static_cast<double>(labels.size());

  t.group_mean.resize(classes);
  t.class_mean.resize(classes);
  for (std::size_t y = 0; y < classes; ++y) {
    const auto& m = t.counts.counts[y];
    for (int a = 0; a < 2; ++a)
      if (m[a] > 0) t.group_mean[y][a] = sum[y][a] / static_cast<double>(m[a]);
    if (m[0] + m[1] == 0) continue;
    // The class mean is a convex combination of the two group means; clamp
    // so rounding cannot push it outside their range.
    const auto& g = t.group_mean[y];
    if (!g[0] || !g[1]) {
      t.class_mean[y] = g[0] ? g[0] : g[1];
      continue;
    }
    const double mean = (sum[y][0] + sum[y][1]) / static_cast<double>(m[0] + m[1]);
    t.class_mean[y] = std::clamp(mean, std::min(*g[0], *g[1]), std::max(*g[0], *g[1]));
  }
  return t;
}

double objective_value(const GroupLossTable& t, const ObjectiveSpec& spec) {
  spec.validate();
  require(t.counts.total > 0, ErrorCategory::validation, "objective needs an occupied group");
  const double lambda = spec.lambda;
  const double overall = t.overall;
  double penalty = 0.0;
  for (int y = 0; y < t.num_classes(); ++y) {
    const auto& g = t.group_mean[static_cast<std::size_t>(y)];
    switch (spec.kind) {
      case ObjectiveKind::ce:
        break;
      case ObjectiveKind::eo_cla:
        for (const auto& l : g)
          if (l) penalty += std::abs(*l - *t.class_mean[static_cast<std::size_t>(y)]);
        break;
      case ObjectiveKind::eo_glb:
        for (const auto& l : g)
          if (l) penalty += std::abs(*l - overall);
        break;
      case ObjectiveKind::eo_cla_max:
      case ObjectiveKind::eo_cla_min:
      case ObjectiveKind::eo_glb_max:
      case ObjectiveKind::eo_glb_min: {
        const bool want_max =
            spec.kind == ObjectiveKind::eo_cla_max || spec.kind == ObjectiveKind::eo_glb_max;
        const int a = extreme_group(t, y, want_max);
        if (a < 0) break;
        const bool global =
            spec.kind == ObjectiveKind::eo_glb_max || spec.kind == ObjectiveKind::eo_glb_min;
        const double v = *g[a] - (global ? overall : 0.0);
        penalty += want_max ? v : -v;
        break;
      }
    }
  }
  return overall + lambda * penalty;
}

EffectiveWeights effective_weights(const GroupLossTable& t, const ObjectiveSpec& spec,
                                   std::span<const int> labels, std::span<const int> attributes) {
  spec.validate();
  check_groups(labels, attributes, t.num_classes());
  require(labels.size() == t.counts.total, ErrorCategory::validation,
          "batch size does not match the loss table");

  const auto classes = static_cast<std::size_t>(t.num_classes());
  const double n = static_cast<double>(t.counts.total);
  const double lambda = spec.lambda;
  auto share = [&](std::size_t y, int a) { return static_cast<double>(t.counts.counts[y][a]) / n; };

  EffectiveWeights w;
  w.group_weight.assign(classes, {0.0, 0.0});
  for (std::size_t y = 0; y < classes; ++y)
    for (int a = 0; a < 2; ++a) w.group_weight[y][a] = share(y, a);

  // Coefficient on L in the objective, redistributed onto groups by m/N.
  double overall_coef = 0.0;

  switch (spec.kind) {
    case ObjectiveKind::ce:
      break;
    case ObjectiveKind::eo_cla:
      for (std::size_t y = 0; y < classes; ++y) {
        const auto& g = t.group_mean[y];
        if (!g[0] || !g[1]) continue;  // lone group sits at its class mean
        // sign(L^{y,a} - L^y) == sign(L^{y,a} - L^{y,not a}) for binary a.
        const int s0 = sign_of(*g[0] - *g[1]);
        w.group_weight[y][0] += lambda * s0;
        w.group_weight[y][1] -= lambda * s0;
      }
      break;
    case ObjectiveKind::eo_glb:
      for (std::size_t y = 0; y < classes; ++y) {
        for (int a = 0; a < 2; ++a) {
          const auto& l = t.group_mean[y][a];
          if (!l) continue;
          const int s = sign_of(*l - t.overall);
          w.group_weight[y][a] += lambda * s;
          overall_coef -= lambda * s;
        }
      }
      break;
    case ObjectiveKind::eo_cla_max:
    case ObjectiveKind::eo_cla_min:
    case ObjectiveKind::eo_glb_max:
    case ObjectiveKind::eo_glb_min: {
      const bool want_max =
          spec.kind == ObjectiveKind::eo_cla_max || spec.kind == ObjectiveKind::eo_glb_max;
      const bool global =
          spec.kind == ObjectiveKind::eo_glb_max || spec.kind == ObjectiveKind::eo_glb_min;
      const double delta = want_max ? lambda : -lambda;
      for (std::size_t y = 0; y < classes; ++y) {
        const int a = extreme_group(t, static_cast<int>(y), want_max);
        if (a < 0) continue;
        w.group_weight[y][a] += delta;
        if (global) overall_coef -= delta;
      }
      break;
    }
  }

  if (overall_coef != 0.0) {
    for (std::size_t y = 0; y < classes; ++y)
      for (int a = 0; a < 2; ++a) w.group_weight[y][a] += overall_coef * share(y, a);
  }

  w.per_example.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const int a = attributes[i];
    w.per_example[i] = w.group_weight[y][a] / static_cast<double>(t.counts.counts[y][a]);
  }
  return w;
}

double bce_positive_group(const Matrix& probabilities, std::span<const int> labels,
                          std::span<const int> attributes, int y, int a) {
  require(probabilities.cols() == 2, ErrorCategory::unsupported,
          "bce_positive_group requires a two-class task");
  require(probabilities.rows() == labels.size() && labels.size() == attributes.size(),
          ErrorCategory::validation, "probabilities, labels and attributes differ in length");
  require(y == 0 || y == 1, ErrorCategory::validation, "label must be 0 or 1");
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != y || attributes[i] != a) continue;
    sum += std::log(probabilities(i, static_cast<std::size_t>(y)));
    ++m;
  }
  require(m > 0, ErrorCategory::validation,
          "group (y=" + std::to_string(y) + ", a=" + std::to_string(a) + ") is empty");
  return -sum / static_cast<double>(m);
}

}  // namespace eofair
