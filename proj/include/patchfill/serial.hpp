#pragma once

// Straightforward single-threaded versions of the parallel kernels. They share
// no code with the optimised paths and are kept for cross-checking and for
// the benchmark target.

#include <optional>

#include "patchfill/bilateral.hpp"
#include "patchfill/image.hpp"
#include "patchfill/patch_search.hpp"
#include "patchfill/som.hpp"

namespace patchfill::serial {

Raster bilateral_filter(const Raster& raster, const BilateralParams& params, const RegionMask* ignore = nullptr);

/// Scans every centre, testing admissibility cell by cell.
MatchResult best_match_bruteforce(const PatchQuery& query, const Raster& raster, const RegionMask& unknown,
                                  std::optional<Rect> window = std::nullopt);

double global_patch_energy(const Raster& raster, const RegionMask& original_mask, int patch_size);

LayerMap assign_layers(const Raster& raster, const RegionMask& mask, const SomGrid& som);

}  // namespace patchfill::serial
