#include "seqssl/augment/augment.hpp"

#include <algorithm>
#include <cmath>

namespace seqssl {

void AugmentConfig::validate() const {
  require(p_flip_h >= 0.0 && p_flip_h <= 1.0, "augment.p_flip_h: must be in [0, 1]");
  require(p_flip_v >= 0.0 && p_flip_v <= 1.0, "augment.p_flip_v: must be in [0, 1]");
  require(rotation_lo_deg <= rotation_hi_deg, "augment.rotation_range_deg: lo must be <= hi");
  require(elastic_alpha >= 0.0, "augment.elastic_alpha: must be >= 0");
  require(elastic_sigma > 0.0, "augment.elastic_sigma: must be > 0");
}

AugmentConfig AugmentConfig::scaled_for(int h, int w) const {
  AugmentConfig out = *this;
  const double s = static_cast<double>(std::min(h, w)) / 84.0;
  out.elastic_alpha = elastic_alpha * s;
  out.elastic_sigma = std::max(1e-6, elastic_sigma * s);
  return out;
}

Image random_flip(const Image& pixels, const AugmentConfig& config, Rng& rng) {
  config.validate();
  const bool flip_h = rng.uniform() < config.p_flip_h;  // mirror left-right
  const bool flip_v = rng.uniform() < config.p_flip_v;  // mirror top-bottom
  Image out(pixels.h, pixels.w);
  for (int y = 0; y < pixels.h; ++y) {
    const int sy = flip_v ? pixels.h - 1 - y : y;
    for (int x = 0; x < pixels.w; ++x) {
      const int sx = flip_h ? pixels.w - 1 - x : x;
      out.at(y, x) = pixels.at(sy, sx);
    }
  }
  return out;
}

Image random_rotation(const Image& pixels, const AugmentConfig& config, Rng& rng) {
  config.validate();
  const double theta =
      rng.uniform(config.rotation_lo_deg, config.rotation_hi_deg) * M_PI / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cy = 0.5 * (pixels.h - 1);
  const double cx = 0.5 * (pixels.w - 1);

  Image out(pixels.h, pixels.w);
  for (int y = 0; y < pixels.h; ++y) {
    for (int x = 0; x < pixels.w; ++x) {
      // inverse map: rotate the output coordinate by -theta
      const double dy = y - cy;
      const double dx = x - cx;
      const double sy = cy + c * dy - s * dx;
      const double sx = cx + s * dy + c * dx;
      if (sy < 0.0 || sy > pixels.h - 1 || sx < 0.0 || sx > pixels.w - 1) {
        out.at(y, x) = 0.0f;  // zero fill
        continue;
      }
      const int y0 = std::min(static_cast<int>(sy), pixels.h - 1);
      const int y1 = std::min(y0 + 1, pixels.h - 1);
      const int x0 = std::min(static_cast<int>(sx), pixels.w - 1);
      const int x1 = std::min(x0 + 1, pixels.w - 1);
      const float fy = static_cast<float>(sy - y0);
      const float fx = static_cast<float>(sx - x0);
      const float top = pixels.at(y0, x0) + fx * (pixels.at(y0, x1) - pixels.at(y0, x0));
      const float bot = pixels.at(y1, x0) + fx * (pixels.at(y1, x1) - pixels.at(y1, x0));
      out.at(y, x) = top + fy * (bot - top);
    }
  }
  return out;
}

namespace {

// Separable Gaussian smoothing with kernel renormalized over in-range taps,
// so a field with values in [-1, 1] stays in [-1, 1].
void gaussian_smooth(std::vector<float>& field, int h, int w, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i)
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));

  std::vector<float> tmp(field.size());
  // rows
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = x + i;
        if (xx < 0 || xx >= w) continue;
        acc += kernel[i + radius] * field[static_cast<size_t>(y) * w + xx];
        wsum += kernel[i + radius];
      }
      tmp[static_cast<size_t>(y) * w + x] = static_cast<float>(acc / wsum);
    }
  }
  // columns
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = y + i;
        if (yy < 0 || yy >= h) continue;
        acc += kernel[i + radius] * tmp[static_cast<size_t>(yy) * w + x];
        wsum += kernel[i + radius];
      }
      field[static_cast<size_t>(y) * w + x] = static_cast<float>(acc / wsum);
    }
  }
}

}  // namespace

Image elastic_deform(const Image& pixels, const AugmentConfig& config, Rng& rng) {
  config.validate();
  if (config.elastic_alpha == 0.0) return pixels;

  const int h = pixels.h;
  const int w = pixels.w;
  std::vector<float> field_y(pixels.size());
  std::vector<float> field_x(pixels.size());
  for (auto& v : field_y) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  for (auto& v : field_x) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  gaussian_smooth(field_y, h, w, config.elastic_sigma);
  gaussian_smooth(field_x, h, w, config.elastic_sigma);

  const double alpha = config.elastic_alpha;
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      // border replication via clamping
      const double sy = std::clamp(y + alpha * field_y[i], 0.0, static_cast<double>(h - 1));
      const double sx = std::clamp(x + alpha * field_x[i], 0.0, static_cast<double>(w - 1));
      const int y0 = std::min(static_cast<int>(sy), h - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const int x0 = std::min(static_cast<int>(sx), w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const float fy = static_cast<float>(sy - y0);
      const float fx = static_cast<float>(sx - x0);
      const float top = pixels.at(y0, x0) + fx * (pixels.at(y0, x1) - pixels.at(y0, x0));
      const float bot = pixels.at(y1, x0) + fx * (pixels.at(y1, x1) - pixels.at(y1, x0));
      out.at(y, x) = top + fy * (bot - top);
    }
  }
  return out;
}

Image augment_chain(const Image& pixels, const AugmentConfig& config, Rng& rng) {
  Image img = random_flip(pixels, config, rng);
  img = random_rotation(img, config, rng);
  return elastic_deform(img, config, rng);
}

ViewPair make_view_pair(const Image& pixels, const std::string& source,
                        const AugmentConfig& config, uint64_t pair_seed) {
  config.validate();
  require(all_finite(pixels.v), "make_view_pair: input must be finite");
  ViewPair pair;
  pair.source = source;
  for (int view = 0; view < 2; ++view) {
    Rng rng(mix64(pair_seed, static_cast<uint64_t>(view)));
    Image img = augment_chain(pixels, config, rng);
    (view == 0 ? pair.view_a : pair.view_b) = std::move(img);
  }
  return pair;
}

}  // namespace seqssl
