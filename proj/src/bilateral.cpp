#include "patchfill/bilateral.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace patchfill {

void validate(const BilateralParams& params) {
  if (!(params.sigma_spatial > 0.0) || !(params.sigma_range > 0.0))
    throw std::invalid_argument("bilateral sigmas must be positive");
  if (params.radius < 1) throw std::invalid_argument("bilateral radius must be >= 1");
}

Raster bilateral_filter(const Raster& raster, const BilateralParams& params, const RegionMask* ignore) {
  validate(params);
  if (ignore && (ignore->width() != raster.width() || ignore->height() != raster.height()))
    throw std::invalid_argument("ignore mask does not match raster");
  const int w = raster.width(), h = raster.height(), channels = raster.channels(), r = params.radius;
  const int side = 2 * r + 1;

  std::vector<double> spatial(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
  const double inv_2ss = 1.0 / (2.0 * params.sigma_spatial * params.sigma_spatial);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      spatial[static_cast<std::size_t>((dy + r) * side + dx + r)] = std::exp(-(dx * dx + dy * dy) * inv_2ss);
  const double inv_2sr = 1.0 / (2.0 * params.sigma_range * params.sigma_range);

  // Weights are applied to offsets from the centre value, so a constant
  // neighbourhood reproduces the centre bit-for-bit.
  std::vector<double> out(raster.data().begin(), raster.data().end());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    std::vector<double> acc(static_cast<std::size_t>(channels));
    for (int x = 0; x < w; ++x) {
      if (ignore && (*ignore)(x, y)) continue;
      const double* center = raster.pixel(x, y);
      std::fill(acc.begin(), acc.end(), 0.0);
      double norm = 0.0;
      for (int qy = std::max(0, y - r); qy <= std::min(h - 1, y + r); ++qy)
        for (int qx = std::max(0, x - r); qx <= std::min(w - 1, x + r); ++qx) {
          if (ignore && (*ignore)(qx, qy)) continue;
          const double* q = raster.pixel(qx, qy);
          double d2 = 0.0;
          for (int c = 0; c < channels; ++c) d2 += (center[c] - q[c]) * (center[c] - q[c]);
          const double weight =
              spatial[static_cast<std::size_t>((qy - y + r) * side + qx - x + r)] * std::exp(-d2 * inv_2sr);
          norm += weight;
          for (int c = 0; c < channels; ++c) acc[static_cast<std::size_t>(c)] += weight * (q[c] - center[c]);
        }
      double* dst = out.data() + raster.index(x, y);
      for (int c = 0; c < channels; ++c)
        dst[c] = std::clamp(center[c] + acc[static_cast<std::size_t>(c)] / norm, 0.0, kMaxIntensity);
    }
  }
  return Raster(w, h, channels, std::move(out));
}

}  // namespace patchfill
