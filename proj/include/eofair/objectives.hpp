#pragma once

// Group-decomposed cross-entropy and the equal-opportunity objectives.
//
// Every objective here is a piecewise-linear function of the per-group mean
// losses L^{y,a}. Inside one linear piece the objective equals
//     sum_{y,a} group_weight[y][a] * L^{y,a}
// so training on per-example weights group_weight[y][a] / m_{y,a} gives the
// exact (sub)gradient of the objective. Group means appearing inside sign()
// and max/min selections are held fixed for the batch.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eofair/dataset.hpp"
#include "eofair/matrix.hpp"

namespace eofair {

/// Per-(label, attribute) loss means for one batch. Empty cells are
/// std::nullopt, never zero.
struct GroupLossTable {
  std::vector<std::array<std::optional<double>, 2>> group_mean;
  std::vector<std::optional<double>> class_mean;
  double overall = 0.0;
  GroupCounts counts;

  int num_classes() const noexcept { return static_cast<int>(group_mean.size()); }
  bool occupied(int y, int a) const { return counts.at(y, a) > 0; }
};

enum class ObjectiveKind {
  ce,
  eo_cla,
  eo_glb,
  eo_cla_max,
  eo_cla_min,
  eo_glb_max,
  eo_glb_min,
};

std::string_view to_string(ObjectiveKind k) noexcept;
ObjectiveKind parse_objective_kind(std::string_view name);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::ce;
  double lambda = 0.0;

  void validate() const;
  bool operator==(const ObjectiveSpec&) const = default;
};

struct EffectiveWeights {
  std::vector<std::array<double, 2>> group_weight;
  std::vector<double> per_example;
};

/// -1, 0 or +1.
int sign_of(double x) noexcept;

GroupLossTable group_losses(std::span<const double> per_example_ce, std::span<const int> labels,
                            std::span<const int> attributes, int num_classes);

/// CE:       L
/// EO_CLA:   L + lambda * sum_{y,a} |L^{y,a} - L^y|
/// EO_GLB:   L + lambda * sum_{y,a} |L^{y,a} - L|
/// CLA_MAX:  L + lambda * sum_y max_a L^{y,a}
/// CLA_MIN:  L - lambda * sum_y min_a L^{y,a}
/// GLB_MAX:  L + lambda * sum_y max_a (L^{y,a} - L)
/// GLB_MIN:  L - lambda * sum_y min_a (L^{y,a} - L)
/// Sums run over occupied groups only.
double objective_value(const GroupLossTable& table, const ObjectiveSpec& spec);

/// Group weights whose weighted group-mean sum reproduces objective_value()
/// on the current linear piece; per_example[i] = group_weight / m_{y_i,a_i}.
/// Ties resolve with sign(0) = 0 (EO_CLA/EO_GLB) or to the lower attribute
/// index (max/min variants).
EffectiveWeights effective_weights(const GroupLossTable& table, const ObjectiveSpec& spec,
                                   std::span<const int> labels, std::span<const int> attributes);

/// -(1/m_{y,a}) sum_{i in (y,a)} log p_i(y) for a two-class probability matrix.
double bce_positive_group(const Matrix& probabilities, std::span<const int> labels,
                          std::span<const int> attributes, int y, int a);

}  // namespace eofair
