#include "patchfill/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace patchfill::fixtures {

namespace {

std::vector<double> storage(int width, int height, int channels) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("fixture dimensions must be positive");
  return std::vector<double>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                             static_cast<std::size_t>(channels));
}

}  // namespace

Raster periodic_tile(int width, int height, int period, int channels, std::uint64_t seed) {
  if (period < 1) throw std::invalid_argument("period must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(0, 254);
  std::vector<double> tile(static_cast<std::size_t>(period * period * channels));
  for (double& v : tile) v = value(rng);
  std::vector<double> data = storage(width, height, channels);
  std::size_t k = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c)
        data[k++] = tile[static_cast<std::size_t>(((y % period) * period + x % period) * channels + c)];
  return Raster(width, height, channels, std::move(data));
}

RegionMask centered_square(int width, int height, int size) {
  RegionMask mask(width, height);
  const int x0 = (width - size) / 2, y0 = (height - size) / 2;
  for (int y = std::max(0, y0); y < std::min(height, y0 + size); ++y)
    for (int x = std::max(0, x0); x < std::min(width, x0 + size); ++x) mask.set(x, y, true);
  return mask;
}

Raster value_noise(int width, int height, int channels, int cell, std::uint64_t seed) {
  if (cell < 1) throw std::invalid_argument("noise cell must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(0.0, 254.0);
  const int gw = width / cell + 2, gh = height / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw * gh * channels));
  for (double& v : lattice) v = value(rng);
  auto node = [&](int gx, int gy, int c) { return lattice[static_cast<std::size_t>((gy * gw + gx) * channels + c)]; };
  std::vector<double> data = storage(width, height, channels);
  std::size_t k = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int gx = x / cell, gy = y / cell;
      const double fx = static_cast<double>(x % cell) / cell, fy = static_cast<double>(y % cell) / cell;
      for (int c = 0; c < channels; ++c) {
        const double top = node(gx, gy, c) * (1 - fx) + node(gx + 1, gy, c) * fx;
        const double bottom = node(gx, gy + 1, c) * (1 - fx) + node(gx + 1, gy + 1, c) * fx;
        data[k++] = std::round(top * (1 - fy) + bottom * fy);
      }
    }
  return Raster(width, height, channels, std::move(data));
}

Raster two_texture(int width, int height, std::uint64_t seed) {
  const Raster noise = value_noise(width, height, 3, 6, seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> jitter(-12, 12);
  std::vector<double> data = storage(width, height, 3);
  std::size_t k = 0;
  const double base[3] = {170.0, 110.0, 60.0};
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c, ++k) {
        if (x < width / 2) {
          const double wave = std::sin(2.0 * std::numbers::pi * (x + 0.7 * y) / 11.0 + c);
          data[k] = std::clamp(std::round(base[c] + 60.0 * wave) + jitter(rng), 0.0, 254.0);
        } else {
          data[k] = noise(x, y, c);
        }
      }
  return Raster(width, height, 3, std::move(data));
}

RegionMask blob_mask(int width, int height, double fraction, int margin, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("mask fraction must lie in (0, 1)");
  const int min_side = std::min(width, height);
  const int rmax = std::max(2, min_side / 12);
  if (min_side <= 2 * (margin + rmax)) throw std::invalid_argument("image too small for blob mask");
  RegionMask mask(width, height);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> radius(std::max(1, rmax / 2), rmax);
  const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(mask.bounds().width) *
                                                          static_cast<double>(mask.bounds().height)));
  while (mask.count() < target) {
    const int r = radius(rng);
    std::uniform_int_distribution<int> cx(margin + r, width - 1 - margin - r), cy(margin + r, height - 1 - margin - r);
    const int x0 = cx(rng), y0 = cy(rng);
    for (int y = y0 - r; y <= y0 + r; ++y)
      for (int x = x0 - r; x <= x0 + r; ++x)
        if ((x - x0) * (x - x0) + (y - y0) * (y - y0) <= r * r) mask.set(x, y, true);
  }
  return mask;
}

TwoPhase two_constant(int width, int height, double low, double high, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::vector<double> data = storage(width, height, 1);
  RegionMask truth(width, height);
  std::size_t k = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x, ++k) {
      const bool is_low = x < width / 2;
      if (is_low) truth.set(x, y, true);
      const double n = sigma > 0.0 ? noise(rng) : 0.0;
      data[k] = std::clamp((is_low ? low : high) + n, 0.0, kMaxIntensity);
    }
  return {Raster(width, height, 1, std::move(data)), std::move(truth)};
}

Raster eight_colors(int width, int height) {
  std::vector<double> data = storage(width, height, 3);
  std::size_t k = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int band = std::min(7, x * 8 / width);
      for (int c = 0; c < 3; ++c) data[k++] = (band >> c) & 1 ? 235.0 : 20.0;
    }
  return Raster(width, height, 3, std::move(data));
}

Raster random_image(int width, int height, int channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(0, 254);
  std::vector<double> data = storage(width, height, channels);
  for (double& v : data) v = value(rng);
  return Raster(width, height, channels, std::move(data));
}

}  // namespace patchfill::fixtures
