#pragma once

// Dense kernels behind the classifier's forward and backward passes.
//
// Two implementations share one contract: `serial` is the plain reference
// and `parallel` distributes independent output rows over OpenMP threads.
// Every output element is accumulated in the same order by both, so with
// fp contraction disabled the results are bit-identical. Training relies on
// that for run-to-run determinism regardless of thread count.
//
// Output matrices are resized when their shape does not match.

#include <span>

#include "eofair/matrix.hpp"

namespace eofair::kernels {

namespace serial {

/// out = a * b + bias (bias broadcast over rows).  a: n x k, b: k x m.
void matmul_bias(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out);
/// out = a^T * b.  a: n x p, b: n x q.
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T.  a: n x q, b: p x q.
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void column_sums(const Matrix& a, std::span<double> out);
/// Row softmax with max subtraction; ce[i] = logsumexp(row i) - logits(i, labels[i]).
void softmax_ce(const Matrix& logits, std::span<const int> labels, Matrix& probs,
                std::span<double> ce);

}  // namespace serial

namespace parallel {

void matmul_bias(const Matrix& a, const Matrix& b, std::span<const double> bias, Matrix& out);
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);
void column_sums(const Matrix& a, std::span<double> out);
void softmax_ce(const Matrix& logits, std::span<const int> labels, Matrix& probs,
                std::span<double> ce);

}  // namespace parallel

}  // namespace eofair::kernels
