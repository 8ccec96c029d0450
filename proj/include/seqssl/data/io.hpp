#pragma once

#include <set>
#include <string>
#include <vector>

#include "seqssl/data/manifest.hpp"
#include "seqssl/data/volume.hpp"

namespace seqssl {

// ---------------------------------------------------------------------------
// Volume container: one JSON header + one raw little-endian float32 payload
// per volume ("<stem>.json" / "<stem>.raw"). The header carries
// {patient_id, study_id, sequence_label, shape:[D,H,W]}.
// ---------------------------------------------------------------------------
void write_volume(const Volume& volume, const std::string& dir, const std::string& stem);
Volume read_volume(const std::string& json_path);
void write_volume_dataset(const std::vector<Volume>& volumes, const std::string& dir);
std::vector<Volume> read_volume_dataset(const std::string& dir);

// ---------------------------------------------------------------------------
// Slice files: magic "SQSL0001", u32 h, u32 w (little-endian), float32 payload.
// ---------------------------------------------------------------------------
void write_slice_pixels(const Image& pixels, const std::string& path);
Image read_slice_pixels(const std::string& path);

struct IngestOptions {
  double fraction = 0.3;
  std::set<Plane> planes = {Plane::kSagittal, Plane::kCoronal, Plane::kAxial};
  int target_size = 84;
  std::array<double, 3> split_ratios = {0.7, 0.1, 0.2};
  uint64_t seed = 0;
  bool drop_empty = true;  // drop slices whose post-normalization variance is 0
};

// Volumes dir -> slice files + manifest.jsonl + dataset.json under out_dir.
// Slices are central-band extracted, resampled to target_size^2 and min-max
// normalized; empty (zero-variance) slices are excluded before splitting.
SplitManifest ingest_volumes(const std::string& volumes_dir, const std::string& out_dir,
                             const IngestOptions& options);

// ---------------------------------------------------------------------------
// In-memory datasets for training and evaluation.
// ---------------------------------------------------------------------------
struct LabeledSlice {
  std::string locator;
  std::string patient_id;
  std::string study_id;
  SequenceLabel label = SequenceLabel::kT1;
  Image pixels;
};

// Label-stripped view handed to pre-training; the sequence label is not
// reachable through this type.
struct UnlabeledSlice {
  std::string locator;
  Image pixels;
};

// Builds slice records in memory from volumes (no disk round-trip); the
// phantom pipeline and tests use this path.
std::vector<SliceRecord> slices_from_volumes(const std::vector<Volume>& volumes,
                                             double fraction, const std::set<Plane>& planes,
                                             int target_size, bool drop_empty = true);

// Loads the slices named by a manifest split from disk.
std::vector<LabeledSlice> load_split(const SplitManifest& manifest, Split split,
                                     const std::string& dataset_dir);

// In-memory equivalents keyed by locator.
std::vector<LabeledSlice> select_split(const std::vector<SliceRecord>& records,
                                       const SplitManifest& manifest, Split split);

std::vector<UnlabeledSlice> strip_labels(const std::vector<LabeledSlice>& slices);

// Locator shared by slices_from_volumes and ingest: patient/study/plane/index.
std::string record_locator(const SliceRecord& record);

}  // namespace seqssl
