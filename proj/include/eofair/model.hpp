#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "eofair/matrix.hpp"

namespace eofair {

enum class Activation : std::uint32_t { tanh = 0, relu = 1 };

/// Weights of the classification head: input -> hidden -> hidden -> logits.
struct ModelParams {
  Matrix w1;  // d x h
  std::vector<double> b1;
  Matrix w2;  // h x h
  std::vector<double> b2;
  Matrix w3;  // h x C
  std::vector<double> b3;
  Activation activation = Activation::tanh;

  std::size_t input_dim() const noexcept { return w1.rows(); }
  std::size_t hidden() const noexcept { return w1.cols(); }
  std::size_t num_classes() const noexcept { return w3.cols(); }
  std::size_t parameter_count() const noexcept;

  /// All six tensors in serialization order (w1, b1, w2, b2, w3, b3).
  std::array<std::span<double>, 6> tensors();
  std::array<std::span<const double>, 6> tensors() const;

  /// Same shapes, all zeros.
  ModelParams zeros_like() const;

  bool operator==(const ModelParams&) const = default;
};

using Gradients = ModelParams;

struct OptimState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  static OptimState for_params(const ModelParams& p);
};

struct AdamOptions {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Forward pass output. hidden1/hidden2 are the post-activation caches used
/// by backward().
struct ForwardResult {
  Matrix logits;
  Matrix probabilities;
  std::vector<double> per_example_ce;
  Matrix hidden1;
  Matrix hidden2;
};

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
ModelParams init_params(std::size_t d, std::size_t h, std::size_t num_classes,
                        std::uint64_t seed, Activation activation = Activation::tanh);

/// Throws on non-finite features or out-of-range labels.
ForwardResult forward(const ModelParams& params, const Matrix& features,
                      std::span<const int> labels);

/// Gradient of sum_i weights[i] * ce_i, reusing the activations of `fwd`.
Gradients backward(const ModelParams& params, const Matrix& features,
                   std::span<const int> labels, const ForwardResult& fwd,
                   std::span<const double> weights);

Gradients backward(const ModelParams& params, const Matrix& features,
                   std::span<const int> labels, std::span<const double> weights);

std::vector<int> predict(const ModelParams& params, const Matrix& features);

/// Bias-corrected Adam; increments state.step.
void adam_step(ModelParams& params, const Gradients& grads, OptimState& state,
               const AdamOptions& opts);

struct GradCheckOptions {
  double step = 1e-5;
  // Coordinates checked; 0 means every parameter. Otherwise a seeded random
  // subset (with replacement) of this many coordinates.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  // Gradient magnitudes below this are compared in absolute terms.
  double floor = 1e-6;
};

/// max over checked coordinates of |analytic - numeric| / max(|analytic|, |numeric|, floor),
/// where numeric is the central difference of `loss`. Returns 0 when both
/// sides vanish everywhere.
double gradient_check(const ModelParams& params, const Gradients& analytic,
                      const std::function<double(const ModelParams&)>& loss,
                      const GradCheckOptions& opts = {});

/// gradient_check of backward() against sum_i weights[i] * ce_i.
double finite_diff_check(const ModelParams& params, const Matrix& features,
                         std::span<const int> labels, std::span<const double> weights,
                         const GradCheckOptions& opts = {});

/// Binary checkpoint: "EOFAIRM1", u32 d, h, C, activation, then the six
/// tensors as little-endian float64 in tensors() order.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace eofair
