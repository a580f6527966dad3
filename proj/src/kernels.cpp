#include "eofair/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eofair/error.hpp"

namespace eofair::kernels {

namespace {

using Index = std::ptrdiff_t;

void check(bool ok, const char* what) {
  if (!ok) fail(ErrorCategory::internal, std::string("kernel shape mismatch: ") + what);
}

void shape(Matrix& out, std::size_t rows, std::size_t cols) {
  if (out.rows() != rows || out.cols() != cols) out.resize(rows, cols);
}

void check_matmul(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out) {
  check(a.cols() == b.rows(), "matmul inner dimension");
  check(bias.size() == b.cols(), "matmul bias");
  shape(out, a.rows(), b.cols());
}

void check_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "at_b shared dimension");
  shape(out, a.cols(), b.cols());
}

void check_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "a_bt shared dimension");
  shape(out, a.rows(), b.rows());
}

void softmax_row(const Matrix& logits, std::span<const int> labels, Matrix& probs,
                 std::span<double> ce, std::size_t i) {
  auto z = logits.row(i);
  auto p = probs.row(i);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    p[c] = std::exp(z[c] - zmax);
    sum += p[c];
  }
  for (auto& v : p) v /= sum;
  const double lse = zmax + std::log(sum);
  ce[i] = lse - z[static_cast<std::size_t>(labels[i])];
}

void check_softmax(const Matrix& logits, std::span<const int> labels, Matrix& probs,
                   std::span<double> ce) {
  check(labels.size() == logits.rows() && ce.size() == logits.rows(), "softmax rows");
  shape(probs, logits.rows(), logits.cols());
  check(logits.cols() > 0, "softmax needs at least one class");
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

void serial::matmul_bias(const Matrix& a, const Matrix& b, std::span<const double> bias,
                         Matrix& out) {
  check_matmul(a, b, bias, out);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = bias[j];
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
}

void serial::matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check_at_b(a, b, out);
  for (std::size_t p = 0; p < a.cols(); ++p) {
    for (std::size_t q = 0; q < b.cols(); ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, p) * b(i, q);
      out(p, q) = s;
    }
  }
}

void serial::matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_a_bt(a, b, out);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = 0; p < b.rows(); ++p) {
      double s = 0.0;
      for (std::size_t q = 0; q < a.cols(); ++q) s += a(i, q) * b(p, q);
      out(i, p) = s;
    }
  }
}

void serial::column_sums(const Matrix& a, std::span<double> out) {
  check(out.size() == a.cols(), "column_sums output");
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j);
    out[j] = s;
  }
}

void serial::softmax_ce(const Matrix& logits, std::span<const int> labels, Matrix& probs,
                        std::span<double> ce) {
  check_softmax(logits, labels, probs, ce);
  for (std::size_t i = 0; i < logits.rows(); ++i) softmax_row(logits, labels, probs, ce, i);
}

// ---------------------------------------------------------------------------
// OpenMP: one thread owns each output row; the inner loops are reordered for
// contiguous access but keep the reduction order of the reference.

void parallel::matmul_bias(const Matrix& a, const Matrix& b, std::span<const double> bias,
                           Matrix& out) {
  check_matmul(a, b, bias, out);
  const Index n = static_cast<Index>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    auto acc = out.row(static_cast<std::size_t>(i));
    std::copy(bias.begin(), bias.end(), acc.begin());
    const auto ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = ai[k];
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < m; ++j) acc[j] += aik * bk[j];
    }
  }
}

void parallel::matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  check_at_b(a, b, out);
  const Index p_count = static_cast<Index>(a.cols());
  const std::size_t n = a.rows();
  const std::size_t q_count = b.cols();
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < p_count; ++p) {
    auto acc = out.row(static_cast<std::size_t>(p));
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double aip = a(i, static_cast<std::size_t>(p));
      const auto bi = b.row(i);
      for (std::size_t q = 0; q < q_count; ++q) acc[q] += aip * bi[q];
    }
  }
}

void parallel::matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_a_bt(a, b, out);
  const Index n = static_cast<Index>(a.rows());
  const std::size_t p_count = b.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const auto ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t p = 0; p < p_count; ++p) {
      const auto bp = b.row(p);
      double s = 0.0;
      for (std::size_t q = 0; q < ai.size(); ++q) s += ai[q] * bp[q];
      out(static_cast<std::size_t>(i), p) = s;
    }
  }
}

void parallel::column_sums(const Matrix& a, std::span<double> out) {
  check(out.size() == a.cols(), "column_sums output");
  const Index m = static_cast<Index>(a.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, static_cast<std::size_t>(j));
    out[static_cast<std::size_t>(j)] = s;
  }
}

void parallel::softmax_ce(const Matrix& logits, std::span<const int> labels, Matrix& probs,
                          std::span<double> ce) {
  check_softmax(logits, labels, probs, ce);
  const Index n = static_cast<Index>(logits.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i)
    softmax_row(logits, labels, probs, ce, static_cast<std::size_t>(i));
}

}  // namespace eofair::kernels
