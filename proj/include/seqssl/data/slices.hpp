#pragma once

#include <set>
#include <vector>

#include "seqssl/data/volume.hpp"

namespace seqssl {

// Central-band slice extraction. Per plane of axis length L this keeps
// k = max(1, round(fraction * L)) contiguous slices starting at
// floor((L - k) / 2); rounding is half-away-from-zero (std::llround).
std::vector<SliceRecord> extract_central_slices(const Volume& volume, double fraction,
                                                const std::set<Plane>& planes);

// k/start for one axis, exposed so callers and tests share the rule.
int central_slice_count(int axis_len, double fraction);
int central_slice_start(int axis_len, int count);

// Bilinear resampling with corner-aligned mapping: output corner pixels
// sample input corners; a size-1 output axis samples the input center.
Image resample_slice(const Image& pixels, int target_h, int target_w);

// Per-slice min-max scaling to [0, 1]. Constant slices map to all-zeros.
Image normalize_intensity(const Image& pixels);

}  // namespace seqssl
