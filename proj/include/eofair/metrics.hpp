#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace eofair {

/// Per-group recall counts plus the full confusion matrix (rows gold, columns predicted).
struct ConfusionByGroup {
  int num_classes = 0;
  std::vector<std::array<std::size_t, 2>> group_total;
  std::vector<std::array<std::size_t, 2>> group_correct;
  std::vector<std::size_t> matrix;  // num_classes x num_classes, row-major
  std::size_t n = 0;

  std::size_t at(int gold, int pred) const {
    return matrix[static_cast<std::size_t>(gold) * static_cast<std::size_t>(num_classes) +
                  static_cast<std::size_t>(pred)];
  }
  /// P(pred = y | gold = y, attribute = a); nullopt for an empty group.
  std::optional<double> tpr(int y, int a) const;
};

ConfusionByGroup confusion(std::span<const int> preds, std::span<const int> labels,
                           std::span<const int> attributes, int num_classes);

struct GapResult {
  std::vector<std::optional<double>> per_class_gap;  // nullopt: class excluded
  double gap = 0.0;
  std::vector<int> excluded_classes;
};

/// RMS over classes of |TPR_{y,0} - TPR_{y,1}|. Classes missing either group
/// are excluded; throws if none remain.
GapResult gap_rms(const ConfusionByGroup& conf);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Per-class F1 = 2TP / (2TP + FP + FN), 0 when that denominator is 0.
/// Macro averages over classes present in the gold labels.
F1Scores f1_scores(const ConfusionByGroup& conf);

/// Metrics in [0, 1]. per_class_gap holds nullopt for excluded classes.
struct FairnessReport {
  std::vector<std::optional<double>> per_class_gap;
  double gap = 0.0;
  double f1_micro = 0.0;
  double f1_macro = 0.0;
  double accuracy = 0.0;

  bool operator==(const FairnessReport&) const = default;
};

FairnessReport evaluate(std::span<const int> preds, std::span<const int> labels,
                        std::span<const int> attributes, int num_classes);

void to_json(nlohmann::json& j, const FairnessReport& r);
void from_json(const nlohmann::json& j, FairnessReport& r);

}  // namespace eofair
