#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "seqssl/data/volume.hpp"

namespace seqssl {

enum class Split : int { kTrain = 0, kVal, kTest };

const char* to_string(Split split);
Split split_from_string(const std::string& s);

struct ManifestEntry {
  std::string path;  // record locator; a slice file for on-disk datasets
  std::string patient_id;
  std::string study_id;
  SequenceLabel label = SequenceLabel::kT1;
  Plane plane = Plane::kAxial;
  int slice_index = 0;
  Split split = Split::kTrain;
};

// Patient-level partition of slice records. All records of one patient carry
// the same tag; patient sets of distinct tags are disjoint.
struct SplitManifest {
  std::vector<ManifestEntry> entries;
  uint64_t seed = 0;
  std::array<double, 3> ratios = {0.7, 0.1, 0.2};

  std::vector<ManifestEntry> split_entries(Split split) const;
  size_t count(Split split) const;
};

// Seeded patient-level split. Patients are sorted, shuffled by the seeded
// PRNG, and allocated to train/val/test by largest-remainder rounding
// (remainder ties resolved in split order train, val, test).
SplitManifest split_by_patient(const std::vector<SliceRecord>& records,
                               const std::array<double, 3>& ratios, uint64_t seed,
                               const std::vector<std::string>& locators = {});

// Largest-remainder patient counts for the given ratios, exposed for tests.
std::array<size_t, 3> largest_remainder_counts(size_t n_patients,
                                               const std::array<double, 3>& ratios);

// JSON Lines serialization, one record per line, plus a small meta sidecar
// ("<path>.meta.json") holding seed and ratios. Byte-deterministic.
void write_manifest(const SplitManifest& manifest, const std::string& path);
SplitManifest read_manifest(const std::string& path);

}  // namespace seqssl
