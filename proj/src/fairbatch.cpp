#include "eofair/fairbatch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eofair/error.hpp"

namespace eofair {

GroupIndex GroupIndex::build(const Dataset& ds) {
  GroupIndex g;
  g.members.resize(static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.size(); ++i)
    g.members[static_cast<std::size_t>(ds.labels[i])][ds.attributes[i]].push_back(i);
  return g;
}

SamplerState init_sampler(const GroupCounts& counts, double alpha, std::uint64_t seed) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCategory::validation, "alpha must lie in (0, 1)");
  require(counts.total > 0, ErrorCategory::validation, "sampler needs a non-empty dataset");
  SamplerState s;
  s.alpha = alpha;
  s.rng.seed(seed);
  const double n = static_cast<double>(counts.total);
  for (int y = 0; y < counts.num_classes(); ++y) {
    require(counts.class_total(y) > 0, ErrorCategory::validation,
            "sampler: class " + std::to_string(y) + " has no examples");
    s.probs.push_back({static_cast<double>(counts.at(y, 0)) / n,
                       static_cast<double>(counts.at(y, 1)) / n});
    s.class_marginals.push_back(static_cast<double>(counts.class_total(y)) / n);
  }
  return s;
}

void update_probs(SamplerState& state, const GroupLossTable& table) {
  require(table.num_classes() == static_cast<int>(state.probs.size()), ErrorCategory::validation,
          "loss table and sampler disagree on the number of classes");
  for (std::size_t y = 0; y < state.probs.size(); ++y) {
    const auto& g = table.group_mean[y];
    if (!g[0] || !g[1]) continue;
    if (std::abs(*g[0] - *g[1]) <= 1e-12) continue;
    const int up = *g[1] > *g[0] ? 1 : 0;
    const int down = 1 - up;
    auto& p = state.probs[y];
    const double marginal = state.class_marginals[y];
    const double delta = std::min(state.alpha * marginal, p[down]);
    p[down] -= delta;
    p[up] = std::max(p[up], marginal - p[down]);
  }
}

std::vector<std::size_t> sample_batch(SamplerState& state, const GroupIndex& index,
                                      std::size_t batch_size) {
  require(batch_size >= 1, ErrorCategory::validation, "batch size must be positive");
  require(index.members.size() == state.probs.size(), ErrorCategory::validation,
          "group index and sampler disagree on the number of classes");

  std::vector<double> cdf;
  std::vector<std::pair<std::size_t, int>> cells;
  double acc = 0.0;
  for (std::size_t y = 0; y < state.probs.size(); ++y) {
    for (int a = 0; a < 2; ++a) {
      if (state.probs[y][a] <= 0.0) continue;
      require(!index.members[y][a].empty(), ErrorCategory::validation,
              "sampler: group (y=" + std::to_string(y) + ", a=" + std::to_string(a) +
                  ") has positive probability but no examples");
      acc += state.probs[y][a];
      cdf.push_back(acc);
      cells.emplace_back(y, a);
    }
  }
  require(!cells.empty(), ErrorCategory::validation, "sampler has no probability mass");

  std::uniform_real_distribution<double> unit(0.0, acc);
  std::vector<std::size_t> out(batch_size);
  for (auto& slot : out) {
    const double u = unit(state.rng);
    const auto pos = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                              cdf.begin());
    const auto [y, a] = cells[std::min(pos, cells.size() - 1)];
    const auto& members = index.members[y][a];
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    slot = members[pick(state.rng)];
  }
  return out;
}

}  // namespace eofair
