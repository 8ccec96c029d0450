#pragma once

#include <cstdint>
#include <vector>

#include "seqssl/data/volume.hpp"

namespace seqssl {

// Desk-scale synthetic stand-in for a curated scanner cohort. Each class gets
// a distinct contrast signature (see phantom.cpp) so a 9-way classifier is
// learnable but not trivial once noise_level > 0.
struct PhantomSpec {
  int n_studies_per_class = 1;
  int d = 34;
  int h = 34;
  int w = 34;
  double noise_level = 0.1;
  uint64_t seed = 0;

  void validate() const;
};

// Returns n_studies_per_class volumes for each of the 9 classes, one study
// per synthetic patient. Deterministic given spec.seed.
std::vector<Volume> generate_phantom_dataset(const PhantomSpec& spec);

}  // namespace seqssl
