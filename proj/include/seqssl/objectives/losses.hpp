#pragma once

#include <vector>

#include "seqssl/common.hpp"

namespace seqssl {

// Losses run in float64: their cost is negligible next to the network, and
// the gradient contracts are checked against central finite differences at
// h = 1e-5, which float32 could not support.
struct Matrix64 {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Matrix64() = default;
  Matrix64(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

// ---------------------------------------------------------------------------
// NT-Xent over cosine similarities. Rows 2k and 2k+1 of `projections` are the
// positive pair from source k; every other row is a negative. For anchor i
// with positive j:
//   l(i) = -log( exp(cos(z_i, z_j)/tau) / sum_{k != i} exp(cos(z_i, z_k)/tau) )
// and the loss is the mean of l over all 2N anchors. The denominator includes
// the positive term, so N = 1 gives loss 0 (no negatives exist).
// ---------------------------------------------------------------------------
struct NtXentResult {
  double loss = 0.0;
  Matrix64 grad;  // d loss / d projections, same shape as the input
};

NtXentResult nt_xent_loss(const Matrix64& projections, double temperature);

// ---------------------------------------------------------------------------
// Symmetric stop-gradient negative cosine. With D(p, z) = -<p/|p|, z/|z|> and
// z treated as constant:
//   loss = 0.5 * mean_i D(p1_i, sg(z2_i)) + 0.5 * mean_i D(p2_i, sg(z1_i))
// Gradients flow to p1/p2 only; dz1/dz2 are returned as exact zero arrays so
// the stop-gradient contract is assertable.
// ---------------------------------------------------------------------------
struct SimSiamResult {
  double loss = 0.0;
  Matrix64 dp1, dp2;
  Matrix64 dz1, dz2;  // identically zero
};

SimSiamResult simsiam_loss(const Matrix64& p1, const Matrix64& p2, const Matrix64& z1,
                           const Matrix64& z2);

// ---------------------------------------------------------------------------
// 9-way softmax cross entropy: -mean log softmax(logits)[label].
// ---------------------------------------------------------------------------
struct CrossEntropyResult {
  double loss = 0.0;
  Matrix64 dlogits;
};

CrossEntropyResult cross_entropy_9way(const Matrix64& logits, const std::vector<int>& labels);

}  // namespace seqssl
