#include "seqssl/model/layers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace seqssl {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMat>;
using MapCRM = Eigen::Map<const RowMat>;

// ----------------------------------------------------------------- Conv2d --

Conv2d::Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), ksize_(ksize), stride_(stride), pad_(pad) {
  weight.assign(static_cast<size_t>(out_ch) * ksize * ksize * in_ch, 0.0f);
  wgrad.assign(weight.size(), 0.0f);
}

void Conv2d::init(Rng& rng) {
  const double fan_in = static_cast<double>(ksize_) * ksize_ * in_ch_;
  const double std = std::sqrt(2.0 / fan_in);
  for (auto& v : weight) v = static_cast<float>(std * rng.normal());
}

void Conv2d::collect(const std::string& prefix, Registry& reg) {
  reg.params.push_back({prefix + ".weight", &weight, &wgrad,
                        {static_cast<uint32_t>(out_ch_), static_cast<uint32_t>(ksize_),
                         static_cast<uint32_t>(ksize_), static_cast<uint32_t>(in_ch_)},
                        false});
}

void Conv2d::build_cols(const Tensor& x) {
  const int oh = out_h(x.h);
  const int ow = out_w(x.w);
  const size_t krow = static_cast<size_t>(ksize_) * ksize_ * in_ch_;
  cols_.assign(static_cast<size_t>(x.n) * oh * ow * krow, 0.0f);

  const size_t row_bytes = static_cast<size_t>(in_ch_) * sizeof(float);
  for (int in = 0; in < x.n; ++in) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float* row = cols_.data() + ((static_cast<size_t>(in) * oh + oy) * ow + ox) * krow;
        for (int ky = 0; ky < ksize_; ++ky) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= x.h) continue;
          for (int kx = 0; kx < ksize_; ++kx) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix < 0 || ix >= x.w) continue;
            std::memcpy(row + (static_cast<size_t>(ky) * ksize_ + kx) * in_ch_,
                        x.data() + ((static_cast<size_t>(in) * x.h + iy) * x.w + ix) * in_ch_,
                        row_bytes);
          }
        }
      }
    }
  }
}

const Tensor& Conv2d::forward(const Tensor& x) {
  x_cache_ = &x;
  const int oh = out_h(x.h);
  const int ow = out_w(x.w);
  build_cols(x);
  out_.resize(x.n, oh, ow, out_ch_);

  const Eigen::Index rows = static_cast<Eigen::Index>(x.n) * oh * ow;
  const Eigen::Index krow = static_cast<Eigen::Index>(ksize_) * ksize_ * in_ch_;
  MapCRM c(cols_.data(), rows, krow);
  MapCRM w(weight.data(), out_ch_, krow);
  MapRM y(out_.data(), rows, out_ch_);
  y.noalias() = c * w.transpose();
  return out_;
}

const Tensor& Conv2d::backward(const Tensor& dy) {
  const Tensor& x = *x_cache_;
  const int oh = dy.h;
  const int ow = dy.w;
  build_cols(x);  // recompute instead of caching

  const Eigen::Index rows = static_cast<Eigen::Index>(x.n) * oh * ow;
  const Eigen::Index krow = static_cast<Eigen::Index>(ksize_) * ksize_ * in_ch_;
  MapCRM c(cols_.data(), rows, krow);
  MapCRM g(dy.data(), rows, out_ch_);
  MapRM wg(wgrad.data(), out_ch_, krow);
  wg.noalias() += g.transpose() * c;

  // dCols = dy * W, then scatter-add back to input positions
  MapCRM w(weight.data(), out_ch_, krow);
  static thread_local std::vector<float> dcols;
  dcols.assign(static_cast<size_t>(rows) * krow, 0.0f);
  MapRM dc(dcols.data(), rows, krow);
  dc.noalias() = g * w;

  dx_.resize(x.n, x.h, x.w, x.c);
  for (int in = 0; in < x.n; ++in) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const float* row = dcols.data() + ((static_cast<size_t>(in) * oh + oy) * ow + ox) * krow;
        for (int ky = 0; ky < ksize_; ++ky) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= x.h) continue;
          for (int kx = 0; kx < ksize_; ++kx) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix < 0 || ix >= x.w) continue;
            float* dst = dx_.data() + ((static_cast<size_t>(in) * x.h + iy) * x.w + ix) * in_ch_;
            const float* src = row + (static_cast<size_t>(ky) * ksize_ + kx) * in_ch_;
            for (int ic = 0; ic < in_ch_; ++ic) dst[ic] += src[ic];
          }
        }
      }
    }
  }
  return dx_;
}

// -------------------------------------------------------------- BatchNorm --

BatchNorm::BatchNorm(int channels) : c_(channels) {
  gamma.assign(channels, 1.0f);
  beta.assign(channels, 0.0f);
  ggrad.assign(channels, 0.0f);
  bgrad.assign(channels, 0.0f);
  running_mean.assign(channels, 0.0f);
  running_var.assign(channels, 1.0f);
}

void BatchNorm::collect(const std::string& prefix, Registry& reg) {
  const std::vector<uint32_t> shape = {static_cast<uint32_t>(c_)};
  reg.params.push_back({prefix + ".gamma", &gamma, &ggrad, shape, true});
  reg.params.push_back({prefix + ".beta", &beta, &bgrad, shape, true});
  reg.states.push_back({prefix + ".running_mean", &running_mean, shape});
  reg.states.push_back({prefix + ".running_var", &running_var, shape});
}

void BatchNorm::forward(const float* x, float* y, size_t rows, bool train) {
  train_cached_ = train;
  invstd_.resize(c_);
  if (train) {
    std::vector<double> mean(c_, 0.0), var(c_, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      const float* px = x + r * c_;
      for (int k = 0; k < c_; ++k) mean[k] += px[k];
    }
    const double inv_m = 1.0 / static_cast<double>(rows);
    for (int k = 0; k < c_; ++k) mean[k] *= inv_m;
    for (size_t r = 0; r < rows; ++r) {
      const float* px = x + r * c_;
      for (int k = 0; k < c_; ++k) {
        const double d = px[k] - mean[k];
        var[k] += d * d;
      }
    }
    for (int k = 0; k < c_; ++k) var[k] *= inv_m;

    const double correction =
        rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
    for (int k = 0; k < c_; ++k) {
      invstd_[k] = 1.0 / std::sqrt(var[k] + eps);
      running_mean[k] = static_cast<float>((1.0 - momentum) * running_mean[k] + momentum * mean[k]);
      running_var[k] =
          static_cast<float>((1.0 - momentum) * running_var[k] + momentum * var[k] * correction);
    }
    xhat_.resize(rows * c_);
    for (size_t r = 0; r < rows; ++r) {
      const float* px = x + r * c_;
      float* ph = xhat_.data() + r * c_;
      float* py = y + r * c_;
      for (int k = 0; k < c_; ++k) {
        const float h = static_cast<float>((px[k] - mean[k]) * invstd_[k]);
        ph[k] = h;
        py[k] = gamma[k] * h + beta[k];
      }
    }
  } else {
    for (int k = 0; k < c_; ++k) invstd_[k] = 1.0 / std::sqrt(running_var[k] + eps);
    for (size_t r = 0; r < rows; ++r) {
      const float* px = x + r * c_;
      float* py = y + r * c_;
      for (int k = 0; k < c_; ++k) {
        py[k] = static_cast<float>(gamma[k] * (px[k] - running_mean[k]) * invstd_[k] + beta[k]);
      }
    }
  }
}

void BatchNorm::backward(const float* dy, float* dx, size_t rows) {
  require(train_cached_, "batchnorm: backward without a train-mode forward");
  std::vector<double> sum_dy(c_, 0.0), sum_dy_xhat(c_, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    const float* pg = dy + r * c_;
    const float* ph = xhat_.data() + r * c_;
    for (int k = 0; k < c_; ++k) {
      sum_dy[k] += pg[k];
      sum_dy_xhat[k] += static_cast<double>(pg[k]) * ph[k];
    }
  }
  for (int k = 0; k < c_; ++k) {
    ggrad[k] += static_cast<float>(sum_dy_xhat[k]);
    bgrad[k] += static_cast<float>(sum_dy[k]);
  }
  const double inv_m = 1.0 / static_cast<double>(rows);
  for (size_t r = 0; r < rows; ++r) {
    const float* pg = dy + r * c_;
    const float* ph = xhat_.data() + r * c_;
    float* pd = dx + r * c_;
    for (int k = 0; k < c_; ++k) {
      const double t = pg[k] - inv_m * (sum_dy[k] + ph[k] * sum_dy_xhat[k]);
      pd[k] = static_cast<float>(gamma[k] * invstd_[k] * t);
    }
  }
}

const Tensor& BatchNorm::forward(const Tensor& x, bool train) {
  out_.resize(x.n, x.h, x.w, x.c);
  forward(x.data(), out_.data(), x.size() / c_, train);
  return out_;
}

const Tensor& BatchNorm::backward(const Tensor& dy) {
  dx_t_.resize(dy.n, dy.h, dy.w, dy.c);
  backward(dy.data(), dx_t_.data(), dy.size() / c_);
  return dx_t_;
}

void BatchNorm::forward(const Matrix& x, Matrix& y, bool train) {
  y.resize(x.rows, x.cols);
  forward(x.data(), y.data(), static_cast<size_t>(x.rows), train);
}

void BatchNorm::backward(const Matrix& dy, Matrix& dx) {
  dx.resize(dy.rows, dy.cols);
  backward(dy.data(), dx.data(), static_cast<size_t>(dy.rows));
}

// ------------------------------------------------------------------- Relu --

void Relu::forward_inplace(float* x, size_t count) {
  mask_.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const bool pos = x[i] > 0.0f;
    mask_[i] = pos ? 1 : 0;
    if (!pos) x[i] = 0.0f;
  }
}

void Relu::backward_inplace(float* dy) const {
  for (size_t i = 0; i < mask_.size(); ++i) {
    if (!mask_[i]) dy[i] = 0.0f;
  }
}

// -------------------------------------------------------------- MaxPool2d --

const Tensor& MaxPool2d::forward(const Tensor& x) {
  in_n_ = x.n;
  in_h_ = x.h;
  in_w_ = x.w;
  in_c_ = x.c;
  const int oh = (x.h - 1) / 2 + 1;  // k=3, s=2, p=1
  const int ow = (x.w - 1) / 2 + 1;
  out_.resize(x.n, oh, ow, x.c);
  argmax_.assign(out_.size(), -1);

  for (int in = 0; in < x.n; ++in) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        float* po = out_.data() + ((static_cast<size_t>(in) * oh + oy) * ow + ox) * x.c;
        int32_t* pa = argmax_.data() + ((static_cast<size_t>(in) * oh + oy) * ow + ox) * x.c;
        for (int k = 0; k < x.c; ++k) po[k] = -std::numeric_limits<float>::infinity();
        for (int ky = 0; ky < 3; ++ky) {
          const int iy = oy * 2 - 1 + ky;
          if (iy < 0 || iy >= x.h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int ix = ox * 2 - 1 + kx;
            if (ix < 0 || ix >= x.w) continue;
            const size_t base = ((static_cast<size_t>(in) * x.h + iy) * x.w + ix) * x.c;
            const float* px = x.data() + base;
            for (int k = 0; k < x.c; ++k) {
              if (px[k] > po[k]) {
                po[k] = px[k];
                pa[k] = static_cast<int32_t>(base + k);
              }
            }
          }
        }
      }
    }
  }
  return out_;
}

const Tensor& MaxPool2d::backward(const Tensor& dy) {
  dx_.resize(in_n_, in_h_, in_w_, in_c_);
  for (size_t i = 0; i < dy.size(); ++i) {
    dx_.v[argmax_[i]] += dy.v[i];
  }
  return dx_;
}

// ---------------------------------------------------------- GlobalAvgPool --

const Matrix& GlobalAvgPool::forward(const Tensor& x) {
  in_h_ = x.h;
  in_w_ = x.w;
  out_.resize(x.n, x.c);
  const float inv = 1.0f / static_cast<float>(x.h * x.w);
  for (int in = 0; in < x.n; ++in) {
    float* po = out_.data() + static_cast<size_t>(in) * x.c;
    const float* px = x.data() + static_cast<size_t>(in) * x.h * x.w * x.c;
    for (int p = 0; p < x.h * x.w; ++p) {
      for (int k = 0; k < x.c; ++k) po[k] += px[static_cast<size_t>(p) * x.c + k];
    }
    for (int k = 0; k < x.c; ++k) po[k] *= inv;
  }
  return out_;
}

const Tensor& GlobalAvgPool::backward(const Matrix& dy) {
  dx_.resize(dy.rows, in_h_, in_w_, dy.cols);
  const float inv = 1.0f / static_cast<float>(in_h_ * in_w_);
  for (int in = 0; in < dy.rows; ++in) {
    const float* pg = dy.data() + static_cast<size_t>(in) * dy.cols;
    float* pd = dx_.data() + static_cast<size_t>(in) * in_h_ * in_w_ * dy.cols;
    for (int p = 0; p < in_h_ * in_w_; ++p) {
      for (int k = 0; k < dy.cols; ++k) pd[static_cast<size_t>(p) * dy.cols + k] = pg[k] * inv;
    }
  }
  return dx_;
}

// ----------------------------------------------------------------- Linear --

Linear::Linear(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
  weight.assign(static_cast<size_t>(out_dim) * in_dim, 0.0f);
  bias.assign(out_dim, 0.0f);
  wgrad.assign(weight.size(), 0.0f);
  bgrad.assign(bias.size(), 0.0f);
}

void Linear::init(Rng& rng, double wscale) {
  const double std = std::sqrt(wscale / static_cast<double>(in_));
  for (auto& v : weight) v = static_cast<float>(std * rng.normal());
  std::fill(bias.begin(), bias.end(), 0.0f);
}

void Linear::collect(const std::string& prefix, Registry& reg) {
  reg.params.push_back({prefix + ".weight", &weight, &wgrad,
                        {static_cast<uint32_t>(out_), static_cast<uint32_t>(in_)}, false});
  reg.params.push_back({prefix + ".bias", &bias, &bgrad, {static_cast<uint32_t>(out_)}, true});
}

const Matrix& Linear::forward(const Matrix& x) {
  x_cache_ = &x;
  out_m_.resize(x.rows, out_);
  MapCRM xm(x.data(), x.rows, x.cols);
  MapCRM wm(weight.data(), out_, in_);
  MapRM ym(out_m_.data(), x.rows, out_);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bias.data(), out_);
  return out_m_;
}

const Matrix& Linear::backward(const Matrix& dy) {
  const Matrix& x = *x_cache_;
  MapCRM gm(dy.data(), dy.rows, dy.cols);
  MapCRM xm(x.data(), x.rows, x.cols);
  MapRM wg(wgrad.data(), out_, in_);
  wg.noalias() += gm.transpose() * xm;
  Eigen::Map<Eigen::RowVectorXf> bg(bgrad.data(), out_);
  bg += gm.colwise().sum();

  dx_.resize(x.rows, in_);
  MapCRM wm(weight.data(), out_, in_);
  MapRM dxm(dx_.data(), x.rows, in_);
  dxm.noalias() = gm * wm;
  return dx_;
}

}  // namespace seqssl
