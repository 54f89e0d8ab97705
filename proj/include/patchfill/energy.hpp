#pragma once

#include "patchfill/image.hpp"

namespace patchfill {

/// Patch-coherence energy of a completed image.
///
/// For every centre p whose full patch lies inside the image and touches the
/// original target region, adds the smallest SSD between patch(p) and any
/// patch lying entirely in the original source region. Zero exactly when every
/// such patch has a verbatim twin in the source. Throws NoCandidateError when
/// the source admits no full patch.
double global_patch_energy(const Raster& raster, const RegionMask& original_mask, int patch_size);

}  // namespace patchfill
