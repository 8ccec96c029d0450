#pragma once

#include <cstdint>

#include "seqssl/report/report.hpp"

namespace seqssl {

// 2D projection of an embedding set. PCA is deterministic with the sign
// convention that each component's largest-magnitude loading is positive;
// t-SNE is deterministic given the seed (exact O(M^2) gradients, seeded
// Gaussian init).
EmbeddingSet project_2d(const EmbeddingSet& set, ProjectionMethod method, uint64_t seed);

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 500;
  double learning_rate = 200.0;
};

EmbeddingSet project_2d_tsne(const EmbeddingSet& set, uint64_t seed, const TsneOptions& options);

}  // namespace seqssl
