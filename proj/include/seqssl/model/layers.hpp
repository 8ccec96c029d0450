#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqssl/model/tensor.hpp"
#include "seqssl/rng.hpp"

namespace seqssl {

// Handle to one learnable array. no_decay marks parameters excluded from
// weight decay (biases, batch-norm affine terms).
struct ParamRef {
  std::string name;
  std::vector<float>* value = nullptr;
  std::vector<float>* grad = nullptr;
  std::vector<uint32_t> shape;
  bool no_decay = false;
};

// Non-learnable persistent state (batch-norm running statistics).
struct StateRef {
  std::string name;
  std::vector<float>* value = nullptr;
  std::vector<uint32_t> shape;
};

struct Registry {
  std::vector<ParamRef> params;
  std::vector<StateRef> states;
};

// ---------------------------------------------------------------------------
// Conv2d: kxk convolution, NHWC, no bias (ResNet convention). Forward is
// im2col + one batched GEMM; backward rebuilds the column matrix from the
// cached input instead of caching it, trading ~10% recompute for memory.
// ---------------------------------------------------------------------------
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad);

  void init(Rng& rng);
  void collect(const std::string& prefix, Registry& reg);

  const Tensor& forward(const Tensor& x);
  const Tensor& backward(const Tensor& dy);  // accumulates weight grad

  int out_h(int in_h) const { return (in_h + 2 * pad_ - ksize_) / stride_ + 1; }
  int out_w(int in_w) const { return (in_w + 2 * pad_ - ksize_) / stride_ + 1; }
  int out_channels() const { return out_ch_; }

  std::vector<float> weight;  // (out_ch, k, k, in_ch) row-major
  std::vector<float> wgrad;

 private:
  void build_cols(const Tensor& x);

  int in_ch_ = 0, out_ch_ = 0, ksize_ = 0, stride_ = 1, pad_ = 0;
  const Tensor* x_cache_ = nullptr;
  std::vector<float> cols_;  // (n*oh*ow, k*k*in_ch)
  Tensor out_;
  Tensor dx_;
};

// ---------------------------------------------------------------------------
// BatchNorm over the channel axis. Works for both 2D activations (stats over
// n*h*w) and head vectors (stats over n) through the flattened (rows, c)
// view. Running stats use momentum 0.1 and the unbiased variance.
// ---------------------------------------------------------------------------
class BatchNorm {
 public:
  BatchNorm() = default;
  explicit BatchNorm(int channels);

  void collect(const std::string& prefix, Registry& reg);

  // rows = product of all non-channel dims; data is (rows, c) row-major.
  void forward(const float* x, float* y, size_t rows, bool train);
  void backward(const float* dy, float* dx, size_t rows);

  const Tensor& forward(const Tensor& x, bool train);
  const Tensor& backward(const Tensor& dy);
  void forward(const Matrix& x, Matrix& y, bool train);
  void backward(const Matrix& dy, Matrix& dx);

  std::vector<float> gamma, beta, ggrad, bgrad;
  std::vector<float> running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;

 private:
  int c_ = 0;
  bool train_cached_ = false;
  std::vector<float> xhat_;     // cached normalized input (train mode)
  std::vector<double> invstd_;  // per channel
  Tensor out_, dx_t_;
};

// ---------------------------------------------------------------------------
// ReLU applied in place; the sign mask is cached for backward.
// ---------------------------------------------------------------------------
class Relu {
 public:
  void forward_inplace(float* x, size_t count);
  void backward_inplace(float* dy) const;

 private:
  std::vector<uint8_t> mask_;
};

// ---------------------------------------------------------------------------
// 3x3 stride-2 max pooling with padding 1 (ResNet stem pooling).
// ---------------------------------------------------------------------------
class MaxPool2d {
 public:
  const Tensor& forward(const Tensor& x);
  const Tensor& backward(const Tensor& dy);

 private:
  std::vector<int32_t> argmax_;  // flat input index per output element
  int in_n_ = 0, in_h_ = 0, in_w_ = 0, in_c_ = 0;
  Tensor out_, dx_;
};

// ---------------------------------------------------------------------------
// Global average pooling: (n, h, w, c) -> (n, c).
// ---------------------------------------------------------------------------
class GlobalAvgPool {
 public:
  const Matrix& forward(const Tensor& x);
  const Tensor& backward(const Matrix& dy);

 private:
  int in_h_ = 0, in_w_ = 0;
  Matrix out_;
  Tensor dx_;
};

// ---------------------------------------------------------------------------
// Fully connected layer with bias.
// ---------------------------------------------------------------------------
class Linear {
 public:
  Linear() = default;
  Linear(int in_dim, int out_dim);

  void init(Rng& rng, double wscale = 2.0);  // He normal, std = sqrt(wscale / in)
  void collect(const std::string& prefix, Registry& reg);

  const Matrix& forward(const Matrix& x);
  const Matrix& backward(const Matrix& dy);

  std::vector<float> weight;  // (out, in) row-major
  std::vector<float> bias;
  std::vector<float> wgrad, bgrad;

 private:
  int in_ = 0, out_ = 0;
  const Matrix* x_cache_ = nullptr;
  Matrix out_m_, dx_;
};

}  // namespace seqssl
