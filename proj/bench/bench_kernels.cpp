#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "eofair/kernels.hpp"

using eofair::Matrix;
namespace kernels = eofair::kernels;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
  Matrix m(rows, cols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  for (double& v : m.values()) v = dist(rng);
  return m;
}

// Shapes of one 2048-example batch through the first 300-wide layer.
template <auto Fn>
void BM_matmul_bias(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 64, 1), b = random_matrix(64, 300, 2);
  const std::vector<double> bias(300, 0.1);
  Matrix out;
  for (auto _ : state) {
    Fn(a, b, bias, out);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Fn>
void BM_matmul_at_b(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 300, 3), b = random_matrix(n, 300, 4);
  Matrix out;
  for (auto _ : state) {
    Fn(a, b, out);
    benchmark::DoNotOptimize(out.values().data());
  }
}

template <auto Fn>
void BM_softmax_ce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix logits = random_matrix(n, 28, 5);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 28);
  Matrix probs;
  std::vector<double> ce(n);
  for (auto _ : state) {
    Fn(logits, labels, probs, ce);
    benchmark::DoNotOptimize(ce.data());
  }
}

}  // namespace

BENCHMARK(BM_matmul_bias<kernels::serial::matmul_bias>)->Arg(256)->Arg(2048);
BENCHMARK(BM_matmul_bias<kernels::parallel::matmul_bias>)->Arg(256)->Arg(2048);
BENCHMARK(BM_matmul_at_b<kernels::serial::matmul_at_b>)->Arg(2048);
BENCHMARK(BM_matmul_at_b<kernels::parallel::matmul_at_b>)->Arg(2048);
BENCHMARK(BM_softmax_ce<kernels::serial::softmax_ce>)->Arg(2048);
BENCHMARK(BM_softmax_ce<kernels::parallel::softmax_ce>)->Arg(2048);

BENCHMARK_MAIN();
