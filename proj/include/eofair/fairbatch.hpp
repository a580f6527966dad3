#pragma once

// FairBatch-style adaptive sampler. Sampling mass lives on (label, attribute)
// cells; each update moves mass inside a class from the group with the lower
// mean loss to the one with the higher loss, so the label distribution
// never changes.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "eofair/dataset.hpp"
#include "eofair/objectives.hpp"

namespace eofair {

struct SamplerState {
  std::vector<std::array<double, 2>> probs;
  double alpha = 0.1;
  std::vector<double> class_marginals;
  std::mt19937_64 rng;
};

/// Example indices of each (label, attribute) cell.
struct GroupIndex {
  std::vector<std::array<std::vector<std::size_t>, 2>> members;

  static GroupIndex build(const Dataset& ds);
};

SamplerState init_sampler(const GroupCounts& counts, double alpha, std::uint64_t seed);

/// For each class with both groups in `table`: move
/// min(alpha * marginal, donor prob) to the higher-loss group. Classes whose
/// group losses differ by at most 1e-12 are left alone.
void update_probs(SamplerState& state, const GroupLossTable& table);

/// Cell drawn from probs, then an example uniformly (with replacement) from that cell.
std::vector<std::size_t> sample_batch(SamplerState& state, const GroupIndex& index,
                                      std::size_t batch_size);

}  // namespace eofair
