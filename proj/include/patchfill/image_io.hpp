#pragma once

#include <filesystem>
#include <stdexcept>

#include "patchfill/image.hpp"

namespace patchfill {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Supported: binary PGM (P5) / PPM (P6) with maxval 255, and 8-bit grayscale
// or RGB PNG. The format is chosen by file contents on load and by extension
// on save.
Raster load_raster(const std::filesystem::path& path);

// Values are rounded to the nearest integer. Writing a 3-channel raster to a
// .pgm path (or 1-channel to .ppm) is an error.
void save_raster(const Raster& raster, const std::filesystem::path& path);

/// Any nonzero sample marks the pixel as part of the target region.
RegionMask load_mask(const std::filesystem::path& path);

/// Writes the mask as a single-channel 0/255 image.
void save_mask(const RegionMask& mask, const std::filesystem::path& path);

}  // namespace patchfill
