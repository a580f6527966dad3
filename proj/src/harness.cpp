#include "eofair/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "eofair/error.hpp"
#include "eofair/fairbatch.hpp"

namespace eofair {

namespace {

// splitmix64 finalizer: independent streams from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kInit = 1, kShuffle, kDownsample, kSampler, kSubsample };

FairnessReport evaluate_model(const ModelParams& params, const Dataset& ds) {
  return evaluate(predict(params, ds.features), ds.labels, ds.attributes, ds.num_classes);
}

void check_datasets(const Dataset& train_set, const Dataset& dev_set, const Dataset& test_set) {
  for (const Dataset* ds : {&train_set, &dev_set, &test_set}) {
    require(ds->size() > 0, ErrorCategory::validation, "training needs non-empty datasets");
    ds->validate();
  }
  require(dev_set.dim() == train_set.dim() && test_set.dim() == train_set.dim(),
          ErrorCategory::validation, "train, dev and test feature widths differ");
  require(dev_set.num_classes == train_set.num_classes &&
              test_set.num_classes == train_set.num_classes,
          ErrorCategory::validation, "train, dev and test class counts differ");
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::plain: return "plain";
    case Method::ds: return "ds";
    case Method::rw: return "rw";
    case Method::fairbatch: return "fairbatch";
  }
  return "plain";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::plain, Method::ds, Method::rw, Method::fairbatch})
    if (to_string(m) == name) return m;
  fail(ErrorCategory::config, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(SweepParam p) noexcept {
  return p == SweepParam::lambda ? "lambda" : "alpha";
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "lambda") return SweepParam::lambda;
  if (name == "alpha") return SweepParam::alpha;
  fail(ErrorCategory::config, "sweep parameter must be lambda or alpha, got '" +
                                  std::string(name) + "'");
}

void TrainConfig::validate() const {
  const auto bad = [](const std::string& m) { fail(ErrorCategory::config, m); };
  if (patience < 1) bad("patience must be at least 1");
  if (max_epochs < 1) bad("max_epochs must be at least 1");
  if (batch_size < 1) bad("batch_size must be at least 1");
  if (hidden < 1) bad("hidden must be at least 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) bad("lr must be positive");
  if (!(selection_slack >= 0.0)) bad("selection slack must be non-negative");
  if (objective != ObjectiveKind::ce && !lambda) bad("objective " + std::string(to_string(objective)) + " requires lambda");
  if (lambda && !(std::isfinite(*lambda) && *lambda >= 0.0)) bad("lambda must be non-negative");
  if (method == Method::fairbatch && !alpha) bad("method fairbatch requires alpha");
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) bad("alpha must lie in (0, 1)");
  if (method != Method::plain && objective != ObjectiveKind::ce)
    bad("method " + std::string(to_string(method)) + " runs on the ce objective; got " +
        std::string(to_string(objective)));
}

std::string TrainConfig::label() const {
  if (method != Method::plain) return std::string(to_string(method));
  return std::string(to_string(objective));
}

bool EarlyStopping::observe(int epoch, double metric) {
  if (!seen_ || metric > best_) {
    seen_ = true;
    best_ = metric;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

RunResult train(const TrainConfig& config, const Dataset& train_input, const Dataset& dev_set,
                const Dataset& test_set, ModelParams* best_model) {
  config.validate();
  check_datasets(train_input, dev_set, test_set);

  const Dataset train_set = config.method == Method::ds
                                ? downsample_balanced(train_input, derive_seed(config.seed, kDownsample))
                                : train_input;
  require(train_set.size() > 0, ErrorCategory::validation, "training set is empty");
  const std::vector<double> instance_weight =
      config.method == Method::rw ? rw_weights(train_set) : std::vector<double>{};
  const int classes = train_set.num_classes;
  const ObjectiveSpec spec = config.objective_spec();

  ModelParams params = init_params(train_set.dim(), config.hidden,
                                   static_cast<std::size_t>(classes),
                                   derive_seed(config.seed, kInit), config.activation);
  OptimState state = OptimState::for_params(params);
  const AdamOptions adam{.lr = config.lr};
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffle));

  std::optional<SamplerState> sampler;
  GroupIndex index;
  if (config.method == Method::fairbatch) {
    sampler = init_sampler(group_counts(train_set), *config.alpha,
                           derive_seed(config.seed, kSampler));
    index = GroupIndex::build(train_set);
  }

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::vector<int> yb, ab;
  EarlyStopping stopper(config.patience);
  ModelParams best = params;
  RunResult result;
  result.config = config;
  result.train_size = n;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (!sampler) std::shuffle(order.begin(), order.end(), shuffle_rng);

    double objective_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, n - start);
      std::vector<std::size_t> idx =
          sampler ? sample_batch(*sampler, index, b)
                  : std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                             order.begin() + static_cast<std::ptrdiff_t>(start + b));
      const Matrix xb = train_set.features.gather_rows(idx);
      yb.resize(b);
      ab.resize(b);
      for (std::size_t i = 0; i < b; ++i) {
        yb[i] = train_set.labels[idx[i]];
        ab[i] = train_set.attributes[idx[i]];
      }

      const auto fwd = forward(params, xb, yb);
      const auto table = group_losses(fwd.per_example_ce, yb, ab, classes);
      objective_sum += objective_value(table, spec);
      auto weights = effective_weights(table, spec, yb, ab).per_example;
      if (!instance_weight.empty())
        for (std::size_t i = 0; i < b; ++i) weights[i] *= instance_weight[idx[i]];
      adam_step(params, backward(params, xb, yb, fwd, weights), state, adam);

      if (sampler && config.fairbatch_schedule == FairBatchSchedule::per_batch)
        update_probs(*sampler, table);
      ++batches;
    }

    if (sampler && config.fairbatch_schedule == FairBatchSchedule::per_epoch) {
      const auto fwd = forward(params, train_set.features, train_set.labels);
      update_probs(*sampler, group_losses(fwd.per_example_ce, train_set.labels,
                                          train_set.attributes, classes));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_objective = objective_sum / static_cast<double>(batches);
    rec.dev = evaluate_model(params, dev_set);
    if (stopper.observe(epoch, rec.dev.f1_micro)) best = params;
    result.history.push_back(std::move(rec));
    if (stopper.should_stop()) break;
  }

  result.epochs_run = static_cast<int>(result.history.size());
  result.selected_epoch = stopper.best_epoch();
  result.dev = result.history[static_cast<std::size_t>(result.selected_epoch - 1)].dev;
  result.test = evaluate_model(best, test_set);
  if (best_model) *best_model = std::move(best);
  return result;
}

const RunResult& select_run(std::span<const RunResult> results, double slack) {
  require(!results.empty(), ErrorCategory::validation, "select_run needs at least one result");
  constexpr double kTol = 1e-12;
  double best_f1 = -1.0;
  for (const auto& r : results) best_f1 = std::max(best_f1, r.dev.f1_micro);

  const RunResult* chosen = nullptr;
  for (const auto& r : results) {
    if (r.dev.f1_micro < best_f1 - slack - kTol) continue;
    if (!chosen) {
      chosen = &r;
      continue;
    }
    const auto key = [](const RunResult& x) {
      return std::make_tuple(x.dev.gap, -x.dev.f1_micro, x.config.lambda.value_or(0.0));
    };
    if (key(r) < key(*chosen)) chosen = &r;
  }
  return *chosen;
}

std::vector<RunResult> sweep(const TrainConfig& base, SweepParam param,
                             std::span<const double> values, int repeats,
                             const Dataset& train_set, const Dataset& dev_set,
                             const Dataset& test_set) {
  require(!values.empty(), ErrorCategory::config, "sweep needs at least one value");
  require(repeats >= 1, ErrorCategory::config, "sweep repeats must be at least 1");

  std::vector<TrainConfig> configs;
  for (double v : values) {
    for (int r = 0; r < repeats; ++r) {
      TrainConfig c = base;
      (param == SweepParam::lambda ? c.lambda : c.alpha) = v;
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      c.validate();
      configs.push_back(c);
    }
  }

  // Runs are independent; nested kernel regions run single-threaded inside.
  std::vector<RunResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const auto count = static_cast<std::ptrdiff_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      results[static_cast<std::size_t>(i)] =
          train(configs[static_cast<std::size_t>(i)], train_set, dev_set, test_set);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return r;
}

std::vector<Aggregate> aggregate(std::span<const RunResult> results) {
  using Key = std::tuple<std::string, double, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunResult*>> groups;
  for (const auto& r : results) {
    Key k{r.config.label(), r.config.lambda.value_or(0.0), r.config.alpha.value_or(0.0)};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(&r);
  }

  std::vector<Aggregate> out;
  for (const auto& k : order) {
    const auto& runs = groups[k];
    auto collect = [&](auto field) {
      std::vector<double> xs;
      for (const auto* r : runs) xs.push_back(field(*r));
      return mean_std(xs);
    };
    Aggregate a;
    std::tie(a.label, a.lambda, a.alpha) = k;
    a.runs = runs.size();
    a.test_f1_micro = collect([](const RunResult& r) { return r.test.f1_micro; });
    a.test_f1_macro = collect([](const RunResult& r) { return r.test.f1_macro; });
    a.test_gap = collect([](const RunResult& r) { return r.test.gap; });
    a.dev_f1_micro = collect([](const RunResult& r) { return r.dev.f1_micro; });
    a.dev_gap = collect([](const RunResult& r) { return r.dev.gap; });
    out.push_back(std::move(a));
  }
  return out;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) noexcept {
  return a.performance >= b.performance && a.gap <= b.gap &&
         (a.performance > b.performance || a.gap < b.gap);
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Best performance first; within equal performance, lowest gap first.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].performance != points[b].performance)
      return points[a].performance > points[b].performance;
    return points[a].gap < points[b].gap;
  });

  std::vector<std::size_t> kept;
  double best_gap_above = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && points[idx[j]].performance == points[idx[i]].performance) ++j;
    const double tier_min = points[idx[i]].gap;
    if (tier_min < best_gap_above) {
      for (std::size_t k = i; k < j && points[idx[k]].gap == tier_min; ++k) kept.push_back(idx[k]);
    }
    best_gap_above = std::min(best_gap_above, tier_min);
    i = j;
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].performance != points[b].performance)
      return points[a].performance < points[b].performance;
    return a < b;
  });
  std::vector<ParetoPoint> front;
  for (auto k : kept) front.push_back(points[k]);
  return front;
}

Dataset stratified_subsample(const Dataset& train_set, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCategory::validation,
          "size fraction must lie in (0, 1]");
  if (fraction == 1.0) return train_set;

  // Largest-remainder quotas across all cells, so the total is round(fraction * n).
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(train_set.num_classes) * 2);
  for (std::size_t i = 0; i < train_set.size(); ++i)
    cells[static_cast<std::size_t>(train_set.labels[i]) * 2 + train_set.attributes[i]].push_back(i);
  const auto target = static_cast<std::size_t>(std::llround(fraction * train_set.size()));
  std::vector<std::size_t> take(cells.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double quota = fraction * static_cast<double>(cells[c].size());
    take[c] = static_cast<std::size_t>(std::floor(quota));
    assigned += take[c];
    remainders.emplace_back(-(quota - std::floor(quota)), c);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t r = 0; assigned < target && r < remainders.size(); ++r) {
    ++take[remainders[r].second];
    ++assigned;
  }

  std::mt19937_64 rng(derive_seed(seed, kSubsample));
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& members = cells[c];
    require(members.empty() || take[c] > 0, ErrorCategory::validation,
            "fraction " + std::to_string(fraction) + " empties group (y=" + std::to_string(c / 2) +
                ", a=" + std::to_string(c % 2) + ")");
    std::shuffle(members.begin(), members.end(), rng);
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(keep.begin(), keep.end());
  return train_set.subset(keep);
}

std::vector<SizeRow> size_sweep(const TrainConfig& base, std::span<const double> fractions,
                                const Dataset& train_set, const Dataset& dev_set,
                                const Dataset& test_set) {
  require(!fractions.empty(), ErrorCategory::config, "size sweep needs at least one fraction");
  std::vector<Dataset> subsets;
  for (double f : fractions) subsets.push_back(stratified_subsample(train_set, f, base.seed));

  std::vector<SizeRow> rows(fractions.size());
  std::vector<std::exception_ptr> errors(fractions.size());
  const auto count = static_cast<std::ptrdiff_t>(fractions.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      rows[k].fraction = fractions[k];
      rows[k].train_size = subsets[k].size();
      rows[k].result = train(base, subsets[k], dev_set, test_set);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace eofair
