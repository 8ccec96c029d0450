#pragma once

#include <cstdint>
#include <vector>

#include "seqssl/common.hpp"

namespace seqssl {

// 4D activation tensor, NHWC layout: v[((n*h + y)*w + x)*c + k].
// NHWC keeps im2col rows and per-pixel channel vectors contiguous, which is
// what the GEMM-backed conv and the batch-norm reductions want on CPU.
struct Tensor {
  int n = 0, h = 0, w = 0, c = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int n_, int h_, int w_, int c_) { resize(n_, h_, w_, c_); }

  void resize(int n_, int h_, int w_, int c_) {
    n = n_;
    h = h_;
    w = w_;
    c = c_;
    v.assign(static_cast<size_t>(n_) * h_ * w_ * c_, 0.0f);
  }

  size_t size() const { return v.size(); }
  float* data() { return v.data(); }
  const float* data() const { return v.data(); }

  float& at(int in, int iy, int ix, int ic) {
    return v[((static_cast<size_t>(in) * h + iy) * w + ix) * c + ic];
  }
  float at(int in, int iy, int ix, int ic) const {
    return v[((static_cast<size_t>(in) * h + iy) * w + ix) * c + ic];
  }
};

// 2D row-major matrix for head activations and embeddings.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<float> v;

  Matrix() = default;
  Matrix(int r, int c) { resize(r, c); }

  void resize(int r, int c) {
    rows = r;
    cols = c;
    v.assign(static_cast<size_t>(r) * c, 0.0f);
  }

  size_t size() const { return v.size(); }
  float* data() { return v.data(); }
  const float* data() const { return v.data(); }

  float& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  float at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

}  // namespace seqssl
