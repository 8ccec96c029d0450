#include "seqssl/data/volume.hpp"

namespace seqssl {

const char* to_string(SequenceLabel label) {
  switch (label) {
    case SequenceLabel::kT1: return "T1";
    case SequenceLabel::kT2: return "T2";
    case SequenceLabel::kFlair: return "FLAIR";
    case SequenceLabel::kTof: return "TOF";
    case SequenceLabel::kTraceW: return "TraceW";
    case SequenceLabel::kDwi: return "DWI";
    case SequenceLabel::kAdc: return "ADC";
    case SequenceLabel::kGre: return "GRE";
    case SequenceLabel::kPerfusion: return "Perfusion";
  }
  throw ValidationError("sequence_label: unknown enum value");
}

SequenceLabel sequence_label_from_string(const std::string& s) {
  for (int i = 0; i < kNumClasses; ++i) {
    auto label = static_cast<SequenceLabel>(i);
    if (s == to_string(label)) return label;
  }
  throw ValidationError("sequence_label: unknown label '" + s + "'");
}

const char* to_string(Plane plane) {
  switch (plane) {
    case Plane::kSagittal: return "sagittal";
    case Plane::kCoronal: return "coronal";
    case Plane::kAxial: return "axial";
  }
  throw ValidationError("plane: unknown enum value");
}

Plane plane_from_string(const std::string& s) {
  if (s == "sagittal" || s == "sag") return Plane::kSagittal;
  if (s == "coronal" || s == "cor") return Plane::kCoronal;
  if (s == "axial" || s == "ax") return Plane::kAxial;
  throw ValidationError("plane: unknown plane '" + s + "'");
}

void Volume::validate() const {
  require(d >= 1 && h >= 1 && w >= 1, "volume: shape must be >= 1 in every dimension");
  require(voxels.size() == static_cast<size_t>(d) * h * w,
          "volume: voxel buffer does not match shape");
  require(all_finite(voxels), "volume: voxels must be finite");
}

}  // namespace seqssl
