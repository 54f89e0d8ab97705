#pragma once

#include <cstdint>

#include "patchfill/image.hpp"

// Seeded synthetic images. Same arguments, same pixels.
namespace patchfill::fixtures {

/// A period x period tile of random integers in [0, 254], repeated.
Raster periodic_tile(int width, int height, int period, int channels, std::uint64_t seed);

/// Axis-aligned square of side `size` centred in the image.
RegionMask centered_square(int width, int height, int size);

/// Bilinear value noise on a lattice of spacing `cell`, integer-valued in [0, 254].
Raster value_noise(int width, int height, int channels, int cell, std::uint64_t seed);

/// RGB: left half a noisy diagonal sinusoid, right half value noise.
Raster two_texture(int width, int height, std::uint64_t seed);

/// Union of random discs, grown until at least `fraction` of the image is
/// covered. Discs keep `margin` pixels away from the border.
RegionMask blob_mask(int width, int height, double fraction, int margin, std::uint64_t seed);

struct TwoPhase {
  Raster image;
  RegionMask low;  // pixels carrying the lower level
};

/// Left half `low`, right half `high`, plus clamped Gaussian noise.
TwoPhase two_constant(int width, int height, double low, double high, double sigma, std::uint64_t seed);

/// Vertical bands of the eight corners of {20, 235}^3.
Raster eight_colors(int width, int height);

/// Independent uniform integers in [0, 254].
Raster random_image(int width, int height, int channels, std::uint64_t seed);

}  // namespace patchfill::fixtures
