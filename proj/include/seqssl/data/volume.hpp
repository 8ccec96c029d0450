#pragma once

#include <string>
#include <vector>

#include "seqssl/common.hpp"

namespace seqssl {

// The nine sequence classes. Order is the canonical class index 0..8 used by
// labels, logits and confusion matrices everywhere in the project.
enum class SequenceLabel : int {
  kT1 = 0,
  kT2,
  kFlair,
  kTof,
  kTraceW,
  kDwi,
  kAdc,
  kGre,
  kPerfusion,
};

inline constexpr int kNumClasses = 9;

const char* to_string(SequenceLabel label);
SequenceLabel sequence_label_from_string(const std::string& s);

enum class Plane : int { kSagittal = 0, kCoronal, kAxial };

const char* to_string(Plane plane);
Plane plane_from_string(const std::string& s);

// One 3D acquisition. Voxels are stored z-major: voxels[(z*h + y)*w + x],
// shape (d, h, w). Intensities are in arbitrary scanner units.
struct Volume {
  std::string patient_id;
  std::string study_id;
  SequenceLabel label = SequenceLabel::kT1;
  int d = 0;
  int h = 0;
  int w = 0;
  std::vector<float> voxels;

  float& at(int z, int y, int x) { return voxels[(static_cast<size_t>(z) * h + y) * w + x]; }
  float at(int z, int y, int x) const { return voxels[(static_cast<size_t>(z) * h + y) * w + x]; }

  void validate() const;
};

// One 2D slice plus its provenance. slice_index is relative to the original
// volume along the slicing axis.
struct SliceRecord {
  std::string patient_id;
  std::string study_id;
  SequenceLabel label = SequenceLabel::kT1;
  Plane plane = Plane::kAxial;
  int slice_index = 0;
  Image pixels;
};

}  // namespace seqssl
