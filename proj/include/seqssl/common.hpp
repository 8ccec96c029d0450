#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqssl {

inline constexpr const char* kVersion = "0.1.0";

// Raised when an input violates a documented precondition. The CLI maps
// this to exit code 2; everything else lands on exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

inline bool all_finite(const std::vector<float>& v) {
  for (float x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// 2D grayscale image, row-major.
struct Image {
  int h = 0;
  int w = 0;
  std::vector<float> v;

  Image() = default;
  Image(int height, int width, float fill = 0.0f)
      : h(height), w(width), v(static_cast<size_t>(height) * width, fill) {}

  float& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  float at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
  size_t size() const { return v.size(); }
  bool same_shape(const Image& o) const { return h == o.h && w == o.w; }
};

}  // namespace seqssl
