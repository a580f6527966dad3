#include "eofair/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "eofair/error.hpp"
#include "eofair/kernels.hpp"

namespace eofair {

namespace kern = kernels::parallel;

namespace {

constexpr char kMagic[8] = {'E', 'O', 'F', 'A', 'I', 'R', 'M', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void activate(Matrix& m, Activation act) {
  auto v = m.values();
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  if (act == Activation::tanh) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) v[i] = std::tanh(v[i]);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
  }
}

// grad *= act'(pre-activation), expressed through the activation output.
void scale_by_derivative(Matrix& grad, const Matrix& activated, Activation act) {
  auto g = grad.values();
  auto a = activated.values();
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  if (act == Activation::tanh) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) g[i] *= 1.0 - a[i] * a[i];
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) g[i] = a[i] > 0.0 ? g[i] : 0.0;
  }
}

void check_inputs(const ModelParams& params, const Matrix& features, std::span<const int> labels) {
  require(features.cols() == params.input_dim(), ErrorCategory::validation,
          "feature width " + std::to_string(features.cols()) + " does not match model input " +
              std::to_string(params.input_dim()));
  require(labels.size() == features.rows(), ErrorCategory::validation,
          "label count does not match feature rows");
  const int classes = static_cast<int>(params.num_classes());
  for (int y : labels)
    require(y >= 0 && y < classes, ErrorCategory::validation, "label out of range for model");
  for (double v : features.values())
    require(std::isfinite(v), ErrorCategory::validation, "non-finite feature value");
}

}  // namespace

std::size_t ModelParams::parameter_count() const noexcept {
  return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
}

std::array<std::span<double>, 6> ModelParams::tensors() {
  return {w1.values(), std::span<double>(b1), w2.values(),
          std::span<double>(b2), w3.values(), std::span<double>(b3)};
}

std::array<std::span<const double>, 6> ModelParams::tensors() const {
  return {w1.values(), std::span<const double>(b1), w2.values(),
          std::span<const double>(b2), w3.values(), std::span<const double>(b3)};
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.w1 = Matrix(w1.rows(), w1.cols());
  z.b1.assign(b1.size(), 0.0);
  z.w2 = Matrix(w2.rows(), w2.cols());
  z.b2.assign(b2.size(), 0.0);
  z.w3 = Matrix(w3.rows(), w3.cols());
  z.b3.assign(b3.size(), 0.0);
  z.activation = activation;
  return z;
}

OptimState OptimState::for_params(const ModelParams& p) {
  return {p.zeros_like(), p.zeros_like(), 0};
}

ModelParams init_params(std::size_t d, std::size_t h, std::size_t num_classes,
                        std::uint64_t seed, Activation activation) {
  require(d >= 1 && h >= 1 && num_classes >= 1, ErrorCategory::validation,
          "model dimensions must be positive");
  ModelParams p;
  p.activation = activation;
  p.w1 = Matrix(d, h);
  p.w2 = Matrix(h, h);
  p.w3 = Matrix(h, num_classes);
  p.b1.assign(h, 0.0);
  p.b2.assign(h, 0.0);
  p.b3.assign(num_classes, 0.0);

  std::mt19937_64 rng(seed);
  for (Matrix* w : {&p.w1, &p.w2, &p.w3}) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w->rows() + w->cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : w->values()) v = dist(rng);
  }
  return p;
}

ForwardResult forward(const ModelParams& params, const Matrix& features,
                      std::span<const int> labels) {
  check_inputs(params, features, labels);
  const std::size_t n = features.rows();
  ForwardResult r;
  r.hidden1 = Matrix(n, params.hidden());
  kern::matmul_bias(features, params.w1, params.b1, r.hidden1);
  activate(r.hidden1, params.activation);
  r.hidden2 = Matrix(n, params.hidden());
  kern::matmul_bias(r.hidden1, params.w2, params.b2, r.hidden2);
  activate(r.hidden2, params.activation);
  r.logits = Matrix(n, params.num_classes());
  kern::matmul_bias(r.hidden2, params.w3, params.b3, r.logits);
  r.probabilities = Matrix(n, params.num_classes());
  r.per_example_ce.assign(n, 0.0);
  kern::softmax_ce(r.logits, labels, r.probabilities, r.per_example_ce);
  return r;
}

Gradients backward(const ModelParams& params, const Matrix& features,
                   std::span<const int> labels, const ForwardResult& fwd,
                   std::span<const double> weights) {
  const std::size_t n = features.rows();
  require(weights.size() == n, ErrorCategory::validation, "one weight per example required");
  for (double w : weights)
    require(std::isfinite(w), ErrorCategory::validation, "non-finite example weight");

  // d(sum w_i ce_i)/dz_i = w_i (p_i - onehot(y_i))
  Matrix dz(n, params.num_classes());
  for (std::size_t i = 0; i < n; ++i) {
    auto p = fwd.probabilities.row(i);
    auto g = dz.row(i);
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double target = static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0;
      g[c] = weights[i] * (p[c] - target);
    }
  }

  Gradients g = params.zeros_like();
  kern::matmul_at_b(fwd.hidden2, dz, g.w3);
  kern::column_sums(dz, g.b3);

  Matrix d2(n, params.hidden());
  kern::matmul_a_bt(dz, params.w3, d2);
  scale_by_derivative(d2, fwd.hidden2, params.activation);
  kern::matmul_at_b(fwd.hidden1, d2, g.w2);
  kern::column_sums(d2, g.b2);

  Matrix d1(n, params.hidden());
  kern::matmul_a_bt(d2, params.w2, d1);
  scale_by_derivative(d1, fwd.hidden1, params.activation);
  kern::matmul_at_b(features, d1, g.w1);
  kern::column_sums(d1, g.b1);
  return g;
}

Gradients backward(const ModelParams& params, const Matrix& features,
                   std::span<const int> labels, std::span<const double> weights) {
  return backward(params, features, labels, forward(params, features, labels), weights);
}

std::vector<int> predict(const ModelParams& params, const Matrix& features) {
  std::vector<int> dummy(features.rows(), 0);
  const auto fwd = forward(params, features, dummy);
  std::vector<int> out(features.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto z = fwd.logits.row(i);
    out[i] = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

void adam_step(ModelParams& params, const Gradients& grads, OptimState& state,
               const AdamOptions& opts) {
  require(opts.lr > 0.0, ErrorCategory::validation, "learning rate must be positive");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);

  auto theta = params.tensors();
  auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    require(g[k].size() == theta[k].size(), ErrorCategory::validation,
            "gradient shape does not match parameters");
    for (std::size_t i = 0; i < theta[k].size(); ++i) {
      m[k][i] = opts.beta1 * m[k][i] + (1.0 - opts.beta1) * g[k][i];
      v[k][i] = opts.beta2 * v[k][i] + (1.0 - opts.beta2) * g[k][i] * g[k][i];
      const double mhat = m[k][i] / c1;
      const double vhat = v[k][i] / c2;
      theta[k][i] -= opts.lr * mhat / (std::sqrt(vhat) + opts.eps);
    }
  }
}

double gradient_check(const ModelParams& params, const Gradients& analytic,
                      const std::function<double(const ModelParams&)>& loss,
                      const GradCheckOptions& opts) {
  ModelParams probe = params;
  auto theta = probe.tensors();
  auto grad = analytic.tensors();

  // Flattened coordinate list: (tensor, offset).
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  std::size_t total = 0;
  for (const auto& t : theta) total += t.size();
  if (opts.max_coords == 0 || opts.max_coords >= total) {
    for (std::size_t k = 0; k < theta.size(); ++k)
      for (std::size_t i = 0; i < theta[k].size(); ++i) coords.emplace_back(k, i);
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    for (std::size_t c = 0; c < opts.max_coords; ++c) {
      std::size_t flat = pick(rng);
      std::size_t k = 0;
      while (flat >= theta[k].size()) flat -= theta[k++].size();
      coords.emplace_back(k, flat);
    }
  }

  double worst = 0.0;
  for (auto [k, i] : coords) {
    const double saved = theta[k][i];
    theta[k][i] = saved + opts.step;
    const double up = loss(probe);
    theta[k][i] = saved - opts.step;
    const double down = loss(probe);
    theta[k][i] = saved;
    const double numeric = (up - down) / (2.0 * opts.step);
    const double exact = grad[k][i];
    const double scale = std::max({std::abs(exact), std::abs(numeric), opts.floor});
    worst = std::max(worst, std::abs(exact - numeric) / scale);
  }
  return worst;
}

double finite_diff_check(const ModelParams& params, const Matrix& features,
                         std::span<const int> labels, std::span<const double> weights,
                         const GradCheckOptions& opts) {
  const auto analytic = backward(params, features, labels, weights);
  auto loss = [&](const ModelParams& p) {
    const auto fwd = forward(p, features, labels);
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * fwd.per_example_ce[i];
    return s;
  };
  return gradient_check(params, analytic, loss, opts);
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCategory::io, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t header[4] = {static_cast<std::uint32_t>(params.input_dim()),
                                   static_cast<std::uint32_t>(params.hidden()),
                                   static_cast<std::uint32_t>(params.num_classes()),
                                   static_cast<std::uint32_t>(params.activation)};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (auto t : params.tensors())
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  require(out.good(), ErrorCategory::io, "write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  require(in.good() && std::memcmp(magic, kMagic, sizeof kMagic) == 0, ErrorCategory::parse,
          path.string() + ": not a model checkpoint");
  std::uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  require(in.good() && header[0] > 0 && header[1] > 0 && header[2] > 0 && header[3] <= 1,
          ErrorCategory::parse, path.string() + ": corrupt checkpoint header");
  ModelParams p = init_params(header[0], header[1], header[2], 0,
                              static_cast<Activation>(header[3]));
  for (auto t : p.tensors()) {
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    require(in.good(), ErrorCategory::parse, path.string() + ": truncated checkpoint");
  }
  require(in.peek() == std::char_traits<char>::eof(), ErrorCategory::parse,
          path.string() + ": trailing bytes in checkpoint");
  return p;
}

}  // namespace eofair
