#pragma once

#include <cmath>

#include "patchfill/image.hpp"

namespace patchfill {

/// Gaussian spatial and range kernels of the normalised smoothing filter.
struct BilateralParams {
  double sigma_spatial = 3.0;
  double sigma_range = 30.0;
  int radius = 9;  // ceil(3 * sigma_spatial) for the default sigma

  static BilateralParams from_sigmas(double sigma_spatial, double sigma_range) {
    return {sigma_spatial, sigma_range, static_cast<int>(std::ceil(3.0 * sigma_spatial))};
  }
};

void validate(const BilateralParams& params);

/// out(p) = sum_q I(q) f(|p - q|) g(|I(p) - I(q)|) / sum_q f g over the
/// (2r+1)^2 window clipped to the image. The range distance is Euclidean over
/// channels. Pixels flagged in `ignore` neither contribute nor change.
Raster bilateral_filter(const Raster& raster, const BilateralParams& params, const RegionMask* ignore = nullptr);

}  // namespace patchfill
