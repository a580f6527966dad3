#include "eofair/metrics.hpp"

#include <cmath>
#include <string>

#include "eofair/error.hpp"

namespace eofair {

std::optional<double> ConfusionByGroup::tpr(int y, int a) const {
  const auto total = group_total.at(static_cast<std::size_t>(y))[a];
  if (total == 0) return std::nullopt;
  return static_cast<double>(group_correct[static_cast<std::size_t>(y)][a]) /
         static_cast<double>(total);
}

ConfusionByGroup confusion(std::span<const int> preds, std::span<const int> labels,
                           std::span<const int> attributes, int num_classes) {
  require(preds.size() == labels.size() && labels.size() == attributes.size(),
          ErrorCategory::validation, "predictions, labels and attributes differ in length");
  require(num_classes >= 1, ErrorCategory::validation, "need at least one class");
  const auto classes = static_cast<std::size_t>(num_classes);
  ConfusionByGroup c;
  c.num_classes = num_classes;
  c.group_total.assign(classes, {0, 0});
  c.group_correct.assign(classes, {0, 0});
  c.matrix.assign(classes * classes, 0);
  c.n = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int y = labels[i], p = preds[i], a = attributes[i];
    require(y >= 0 && y < num_classes && p >= 0 && p < num_classes, ErrorCategory::validation,
            "label or prediction out of range at example " + std::to_string(i));
    require(a == 0 || a == 1, ErrorCategory::unsupported, "attribute must be 0 or 1");
    ++c.group_total[static_cast<std::size_t>(y)][a];
    if (p == y) ++c.group_correct[static_cast<std::size_t>(y)][a];
    ++c.matrix[static_cast<std::size_t>(y) * classes + static_cast<std::size_t>(p)];
  }
  return c;
}

GapResult gap_rms(const ConfusionByGroup& conf) {
  GapResult r;
  r.per_class_gap.resize(static_cast<std::size_t>(conf.num_classes));
  double sq = 0.0;
  std::size_t included = 0;
  for (int y = 0; y < conf.num_classes; ++y) {
    const auto t0 = conf.tpr(y, 0), t1 = conf.tpr(y, 1);
    if (!t0 || !t1) {
      r.excluded_classes.push_back(y);
      continue;
    }
    const double g = std::abs(*t0 - *t1);
    r.per_class_gap[static_cast<std::size_t>(y)] = g;
    sq += g * g;
    ++included;
  }
  require(included > 0, ErrorCategory::validation,
          "GAP undefined: no class has examples from both attribute groups");
  r.gap = std::sqrt(sq / static_cast<double>(included));
  return r;
}

F1Scores f1_scores(const ConfusionByGroup& conf) {
  F1Scores s;
  if (conf.n == 0) return s;
  std::size_t correct = 0;
  double macro_sum = 0.0;
  std::size_t present = 0;
  for (int y = 0; y < conf.num_classes; ++y) {
    std::size_t gold = 0, predicted = 0;
    for (int k = 0; k < conf.num_classes; ++k) {
      gold += conf.at(y, k);
      predicted += conf.at(k, y);
    }
    const std::size_t tp = conf.at(y, y);
    correct += tp;
    if (gold == 0) continue;
    const std::size_t denom = gold + predicted;  // 2TP + FP + FN
    macro_sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    ++present;
  }
  s.micro = static_cast<double>(correct) / static_cast<double>(conf.n);
  s.macro = present == 0 ? 0.0 : macro_sum / static_cast<double>(present);
  return s;
}

FairnessReport evaluate(std::span<const int> preds, std::span<const int> labels,
                        std::span<const int> attributes, int num_classes) {
  const auto conf = confusion(preds, labels, attributes, num_classes);
  const auto gap = gap_rms(conf);
  const auto f1 = f1_scores(conf);
  FairnessReport r;
  r.per_class_gap = gap.per_class_gap;
  r.gap = gap.gap;
  r.f1_micro = f1.micro;
  r.f1_macro = f1.macro;
  r.accuracy = f1.micro;
  return r;
}

void to_json(nlohmann::json& j, const FairnessReport& r) {
  auto per_class = nlohmann::json::array();
  for (const auto& g : r.per_class_gap) per_class.push_back(g ? nlohmann::json(*g) : nullptr);
  j = nlohmann::json{{"gap", r.gap},
                     {"f1_micro", r.f1_micro},
                     {"f1_macro", r.f1_macro},
                     {"per_class_gap", per_class},
                     {"accuracy", r.accuracy}};
}

void from_json(const nlohmann::json& j, FairnessReport& r) {
  j.at("gap").get_to(r.gap);
  j.at("f1_micro").get_to(r.f1_micro);
  j.at("f1_macro").get_to(r.f1_macro);
  j.at("accuracy").get_to(r.accuracy);
  r.per_class_gap.clear();
  for (const auto& g : j.at("per_class_gap"))
    r.per_class_gap.push_back(g.is_null() ? std::nullopt : std::optional<double>(g.get<double>()));
}

}  // namespace eofair
