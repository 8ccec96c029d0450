#pragma once

#include <cstdint>
#include <string>

#include "seqssl/common.hpp"
#include "seqssl/rng.hpp"

namespace seqssl {

// Stochastic view parameters. Defaults are modest, anatomy-preserving values
// stated at the 84x84 reference resolution; scaled_for() adapts the elastic
// magnitudes proportionally at other resolutions.
struct AugmentConfig {
  double p_flip_h = 0.5;
  double p_flip_v = 0.5;
  double rotation_lo_deg = -15.0;
  double rotation_hi_deg = 15.0;
  double elastic_alpha = 10.0;  // displacement magnitude, pixels
  double elastic_sigma = 4.0;   // field smoothing width, pixels
  uint64_t seed = 0;

  void validate() const;

  // Scales elastic_alpha / elastic_sigma by min(h, w) / 84.
  AugmentConfig scaled_for(int h, int w) const;
};

// Two stochastically augmented versions of one source slice.
struct ViewPair {
  Image view_a;
  Image view_b;
  std::string source;
};

// Horizontal and/or vertical mirror, each applied independently with its
// configured probability. Two uniforms are always consumed.
Image random_flip(const Image& pixels, const AugmentConfig& config, Rng& rng);

// Rotation by an angle uniform in [rotation_lo_deg, rotation_hi_deg] about
// the image center, bilinear resampling, zero fill outside the source.
Image random_rotation(const Image& pixels, const AugmentConfig& config, Rng& rng);

// Dense random displacement field (i.i.d. uniform in [-1,1] per axis),
// Gaussian-smoothed with width elastic_sigma, scaled by elastic_alpha and
// applied with bilinear sampling; out-of-range samples replicate the border.
// alpha == 0 is an exact identity.
Image elastic_deform(const Image& pixels, const AugmentConfig& config, Rng& rng);

// One pass of the fixed flip -> rotation -> elastic chain.
Image augment_chain(const Image& pixels, const AugmentConfig& config, Rng& rng);

// The full flip -> rotation -> elastic chain applied twice with independent
// sub-streams derived from pair_seed via mix64(pair_seed, view_index).
ViewPair make_view_pair(const Image& pixels, const std::string& source,
                        const AugmentConfig& config, uint64_t pair_seed);

}  // namespace seqssl
