#include "seqssl/data/slices.hpp"

#include <algorithm>
#include <cmath>

namespace seqssl {

int central_slice_count(int axis_len, double fraction) {
  return std::max<long long>(1, std::llround(fraction * axis_len));
}

int central_slice_start(int axis_len, int count) { return (axis_len - count) / 2; }

namespace {

Image slice_at(const Volume& v, Plane plane, int index) {
  // axial: fix z -> (h, w); coronal: fix y -> (d, w); sagittal: fix x -> (d, h)
  switch (plane) {
    case Plane::kAxial: {
      Image img(v.h, v.w);
      for (int y = 0; y < v.h; ++y)
        for (int x = 0; x < v.w; ++x) img.at(y, x) = v.at(index, y, x);
      return img;
    }
    case Plane::kCoronal: {
      Image img(v.d, v.w);
      for (int z = 0; z < v.d; ++z)
        for (int x = 0; x < v.w; ++x) img.at(z, x) = v.at(z, index, x);
      return img;
    }
    case Plane::kSagittal: {
      Image img(v.d, v.h);
      for (int z = 0; z < v.d; ++z)
        for (int y = 0; y < v.h; ++y) img.at(z, y) = v.at(z, y, index);
      return img;
    }
  }
  throw ValidationError("plane: unknown enum value");
}

int axis_length(const Volume& v, Plane plane) {
  switch (plane) {
    case Plane::kAxial: return v.d;
    case Plane::kCoronal: return v.h;
    case Plane::kSagittal: return v.w;
  }
  throw ValidationError("plane: unknown enum value");
}

}  // namespace

std::vector<SliceRecord> extract_central_slices(const Volume& volume, double fraction,
                                                const std::set<Plane>& planes) {
  volume.validate();
  require(fraction > 0.0 && fraction <= 1.0, "extract_central_slices: fraction must be in (0, 1]");
  require(!planes.empty(), "extract_central_slices: planes must be nonempty");

  std::vector<SliceRecord> out;
  for (Plane plane : planes) {
    const int len = axis_length(volume, plane);
    const int k = central_slice_count(len, fraction);
    const int start = central_slice_start(len, k);
    for (int i = start; i < start + k; ++i) {
      SliceRecord rec;
      rec.patient_id = volume.patient_id;
      rec.study_id = volume.study_id;
      rec.label = volume.label;
      rec.plane = plane;
      rec.slice_index = i;
      rec.pixels = slice_at(volume, plane, i);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

Image resample_slice(const Image& pixels, int target_h, int target_w) {
  require(pixels.h >= 1 && pixels.w >= 1, "resample_slice: input must be nonempty");
  require(target_h >= 1 && target_w >= 1, "resample_slice: target dims must be >= 1");
  require(all_finite(pixels.v), "resample_slice: input values must be finite");

  Image out(target_h, target_w);
  // corner-aligned: out index i maps to i * (in - 1) / (out - 1)
  const double sy = target_h > 1 ? static_cast<double>(pixels.h - 1) / (target_h - 1) : 0.0;
  const double sx = target_w > 1 ? static_cast<double>(pixels.w - 1) / (target_w - 1) : 0.0;
  const double oy = target_h > 1 ? 0.0 : 0.5 * (pixels.h - 1);
  const double ox = target_w > 1 ? 0.0 : 0.5 * (pixels.w - 1);

  for (int i = 0; i < target_h; ++i) {
    const double y = oy + sy * i;
    const int y0 = std::min(static_cast<int>(y), pixels.h - 1);
    const int y1 = std::min(y0 + 1, pixels.h - 1);
    const float fy = static_cast<float>(y - y0);
    for (int j = 0; j < target_w; ++j) {
      const double x = ox + sx * j;
      const int x0 = std::min(static_cast<int>(x), pixels.w - 1);
      const int x1 = std::min(x0 + 1, pixels.w - 1);
      const float fx = static_cast<float>(x - x0);
      // nested lerp keeps constants exact
      const float top = pixels.at(y0, x0) + fx * (pixels.at(y0, x1) - pixels.at(y0, x0));
      const float bot = pixels.at(y1, x0) + fx * (pixels.at(y1, x1) - pixels.at(y1, x0));
      out.at(i, j) = top + fy * (bot - top);
    }
  }
  return out;
}

Image normalize_intensity(const Image& pixels) {
  require(all_finite(pixels.v), "normalize_intensity: input values must be finite");
  Image out(pixels.h, pixels.w);
  if (pixels.v.empty()) return out;
  const auto [mn_it, mx_it] = std::minmax_element(pixels.v.begin(), pixels.v.end());
  const float mn = *mn_it;
  const float range = *mx_it - mn;
  if (range == 0.0f) return out;  // constant slice -> all zeros
  for (size_t i = 0; i < pixels.v.size(); ++i) out.v[i] = (pixels.v[i] - mn) / range;
  return out;
}

}  // namespace seqssl
