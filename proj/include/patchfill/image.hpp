#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace patchfill {

inline constexpr double kMaxIntensity = 255.0;

struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Row-major ordering: smaller row first, then smaller column.
inline bool row_major_less(Point a, Point b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

/// Axis-aligned rectangle, [x, x + width) x [y, y + height).
struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(Point p) const {
    return p.x >= x && p.y >= y && p.x < x + width && p.y < y + height;
  }
  bool empty() const { return width <= 0 || height <= 0; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

Rect intersect(const Rect& a, const Rect& b);

/// Interleaved per-channel intensities in [0, 255], stored as doubles.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, double fill = 0.0);
  Raster(int width, int height, int channels, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  Rect bounds() const { return {0, 0, width_, height_}; }
  bool in_bounds(Point p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  double operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  /// Throws std::out_of_range if the value is non-finite or outside [0, 255].
  void set(int x, int y, int c, double value);

  /// Copies all channels of `src` at `from` into this raster at `to`.
  void copy_pixel(const Raster& src, Point from, Point to);

  const double* pixel(int x, int y) const { return data_.data() + index(x, y); }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Target region. True marks an unknown pixel (to be filled).
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int width, int height, bool value = false);

  int width() const { return width_; }
  int height() const { return height_; }
  Rect bounds() const { return {0, 0, width_, height_}; }
  bool in_bounds(Point p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }

  bool operator()(int x, int y) const {
    return flags_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(x)] != 0;
  }
  bool at(Point p) const { return (*this)(p.x, p.y); }
  void set(int x, int y, bool value);

  /// Number of true pixels; maintained on every set().
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }

  /// Smallest rectangle covering every true pixel (empty when count() == 0).
  Rect bounding_box() const;

  std::span<const std::uint8_t> flags() const { return flags_; }

  friend bool operator==(const RegionMask& a, const RegionMask& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.flags_ == b.flags_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> flags_;
};

/// True exactly where every channel equals `marker`.
RegionMask detect_damaged(const Raster& raster, double marker = kMaxIntensity);

/// Moves every channel value equal to `marker` down to `marker - 1` so the
/// marker can later be used in-band. Throws std::invalid_argument for marker 0.
Raster clamp_for_sentinel(const Raster& raster, double marker = kMaxIntensity);

/// Single-channel average of all channels.
Raster to_gray(const Raster& raster);

/// Mean of squared differences in dB; +inf when identical.
double psnr(const Raster& a, const Raster& b);

}  // namespace patchfill
