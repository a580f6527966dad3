#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eofair/dataset.hpp"
#include "eofair/metrics.hpp"
#include "eofair/model.hpp"
#include "eofair/objectives.hpp"

namespace eofair {

/// Debiasing method applied around the objective. Exactly one per run:
/// ds/rw/fairbatch runs train on plain CE.
enum class Method { plain, ds, rw, fairbatch };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);

enum class FairBatchSchedule { per_epoch, per_batch };

struct TrainConfig {
  ObjectiveKind objective = ObjectiveKind::ce;
  std::optional<double> lambda;
  Method method = Method::plain;
  std::optional<double> alpha;
  FairBatchSchedule fairbatch_schedule = FairBatchSchedule::per_epoch;
  double lr = 3e-3;
  std::size_t batch_size = 2048;
  int max_epochs = 60;
  int patience = 5;
  std::uint64_t seed = 0;
  std::size_t hidden = 300;
  Activation activation = Activation::tanh;
  double selection_slack = 0.01;

  void validate() const;
  ObjectiveSpec objective_spec() const { return {objective, lambda.value_or(0.0)}; }
  /// Short run label: "ce", "eo_cla", "ds", "rw", "fairbatch", ...
  std::string label() const;

  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  double train_objective = 0.0;  // mean over batches
  FairnessReport dev;

  bool operator==(const EpochRecord&) const = default;
};

struct RunResult {
  TrainConfig config;
  std::size_t train_size = 0;
  std::vector<EpochRecord> history;
  FairnessReport dev;
  FairnessReport test;
  int epochs_run = 0;
  int selected_epoch = 0;

  bool operator==(const RunResult&) const = default;
};

/// Stops once the tracked metric has failed to strictly improve for
/// `patience` consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Records one epoch's metric; true when it is the new best.
  bool observe(int epoch, double metric);
  bool should_stop() const noexcept { return stale_ >= patience_; }
  int best_epoch() const noexcept { return best_epoch_; }
  double best_metric() const noexcept { return best_; }

 private:
  int patience_;
  int stale_ = 0;
  int best_epoch_ = 0;
  double best_ = 0.0;
  bool seen_ = false;
};

/// Trains one model with early stopping on dev micro-F1 and evaluates the
/// dev-best checkpoint on test. `best_model`, when given, receives it.
RunResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& dev_set,
                const Dataset& test_set, ModelParams* best_model = nullptr);

/// Among runs within `slack` of the best dev micro-F1, the one with the
/// lowest dev GAP (ties: higher dev F1, then lower lambda).
const RunResult& select_run(std::span<const RunResult> results, double slack);

enum class SweepParam { lambda, alpha };

std::string_view to_string(SweepParam p) noexcept;
SweepParam parse_sweep_param(std::string_view name);

/// One train() per (value, repeat); repeat r uses seed base.seed + r.
/// Results are ordered value-major, then repeat.
std::vector<RunResult> sweep(const TrainConfig& base, SweepParam param,
                             std::span<const double> values, int repeats,
                             const Dataset& train_set, const Dataset& dev_set,
                             const Dataset& test_set);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation (divides by n)
};

MeanStd mean_std(std::span<const double> xs);

struct Aggregate {
  std::string label;
  double lambda = 0.0;
  double alpha = 0.0;
  std::size_t runs = 0;
  MeanStd test_f1_micro, test_f1_macro, test_gap;
  MeanStd dev_f1_micro, dev_gap;
};

/// Groups runs sharing (label, lambda, alpha), in first-seen order.
std::vector<Aggregate> aggregate(std::span<const RunResult> results);

struct ParetoPoint {
  double performance = 0.0;  // F1, higher is better
  double gap = 0.0;          // lower is better
  std::string key;

  bool operator==(const ParetoPoint&) const = default;
};

/// True when `a` is at least as good on both axes and strictly better on one.
bool dominates(const ParetoPoint& a, const ParetoPoint& b) noexcept;

/// Non-dominated subset, sorted by ascending performance (stable for ties).
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

struct SizeRow {
  double fraction = 1.0;
  std::size_t train_size = 0;
  RunResult result;
};

/// Stratified subsample of round(fraction * n) examples: each (label, attribute)
/// cell keeps floor(fraction * |cell|), and the leftover slots go to the cells
/// with the largest remainders. Fraction 1 returns the whole set; an emptied
/// cell is an error.
Dataset stratified_subsample(const Dataset& train_set, double fraction, std::uint64_t seed);

std::vector<SizeRow> size_sweep(const TrainConfig& base, std::span<const double> fractions,
                                const Dataset& train_set, const Dataset& dev_set,
                                const Dataset& test_set);

}  // namespace eofair
