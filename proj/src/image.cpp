#include "patchfill/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace patchfill {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
}

void check_value(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > kMaxIntensity)
    throw std::out_of_range("intensity out of range: " + std::to_string(v));
}

}  // namespace

Rect intersect(const Rect& a, const Rect& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.width, b.x + b.width);
  const int y1 = std::min(a.y + a.height, b.y + b.height);
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

Raster::Raster(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) throw std::invalid_argument("channels must be 1 or 3");
  check_value(fill);
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Raster::Raster(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) throw std::invalid_argument("channels must be 1 or 3");
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels))
    throw std::invalid_argument("raster data length does not match dimensions");
  for (double v : data_) check_value(v);
}

void Raster::set(int x, int y, int c, double value) {
  check_value(value);
  data_[index(x, y, c)] = value;
}

void Raster::copy_pixel(const Raster& src, Point from, Point to) {
  const double* s = src.pixel(from.x, from.y);
  std::copy(s, s + channels_, data_.begin() + static_cast<std::ptrdiff_t>(index(to.x, to.y)));
}

RegionMask::RegionMask(int width, int height, bool value) : width_(width), height_(height) {
  check_dims(width, height);
  flags_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value ? 1 : 0);
  count_ = value ? flags_.size() : 0;
}

void RegionMask::set(int x, int y, bool value) {
  auto& f = flags_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(x)];
  if ((f != 0) == value) return;
  f = value ? 1 : 0;
  if (value)
    ++count_;
  else
    --count_;
}

Rect RegionMask::bounding_box() const {
  int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if ((*this)(x, y)) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {0, 0, 0, 0};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

RegionMask detect_damaged(const Raster& raster, double marker) {
  if (!(marker >= 0.0 && marker <= kMaxIntensity))
    throw std::invalid_argument("marker must lie in [0, 255]");
  RegionMask mask(raster.width(), raster.height());
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x) {
      const double* px = raster.pixel(x, y);
      if (std::all_of(px, px + raster.channels(), [&](double v) { return v == marker; }))
        mask.set(x, y, true);
    }
  return mask;
}

Raster clamp_for_sentinel(const Raster& raster, double marker) {
  if (marker == 0.0) throw std::invalid_argument("marker 0 has no lower neighbor");
  if (!(marker > 0.0 && marker <= kMaxIntensity))
    throw std::invalid_argument("marker must lie in [0, 255]");
  std::vector<double> data(raster.data().begin(), raster.data().end());
  for (double& v : data)
    if (v == marker) v = marker - 1.0;
  return Raster(raster.width(), raster.height(), raster.channels(), std::move(data));
}

Raster to_gray(const Raster& raster) {
  if (raster.channels() == 1) return raster;
  std::vector<double> data(raster.pixel_count());
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x) {
      const double* px = raster.pixel(x, y);
      data[static_cast<std::size_t>(y) * static_cast<std::size_t>(raster.width()) +
           static_cast<std::size_t>(x)] = (px[0] + px[1] + px[2]) / 3.0;
    }
  return Raster(raster.width(), raster.height(), 1, std::move(data));
}

double psnr(const Raster& a, const Raster& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw std::invalid_argument("psnr: raster shapes differ");
  double sse = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) sse += (da[i] - db[i]) * (da[i] - db[i]);
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(da.size());
  return 10.0 * std::log10(kMaxIntensity * kMaxIntensity / mse);
}

}  // namespace patchfill
