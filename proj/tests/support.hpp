#pragma once

// Random generators and direct-loop oracles shared by the test binaries. The
// oracles avoid the library's kernels: plain nested loops over
// pixels and patch cells.

#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "patchfill/image.hpp"

namespace support {

using patchfill::Point;
using patchfill::Raster;
using patchfill::Rect;
using patchfill::RegionMask;

inline Raster random_raster(int w, int h, int ch, std::mt19937_64& rng, int levels = 255) {
  std::uniform_int_distribution<int> v(0, levels - 1);
  const double step = levels > 1 ? 254.0 / (levels - 1) : 0.0;
  std::vector<double> data(static_cast<std::size_t>(w * h * ch));
  for (double& d : data) d = std::round(v(rng) * step);
  return Raster(w, h, ch, std::move(data));
}

inline RegionMask random_mask(int w, int h, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  RegionMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (b(rng)) m.set(x, y, true);
  return m;
}

/// A few random rectangles; at least one pixel set.
inline RegionMask random_rect_mask(int w, int h, int count, int max_side, std::mt19937_64& rng) {
  RegionMask m(w, h);
  std::uniform_int_distribution<int> side(1, max_side);
  for (int k = 0; k < count; ++k) {
    const int rw = side(rng), rh = side(rng);
    std::uniform_int_distribution<int> xs(0, w - rw), ys(0, h - rh);
    const int x0 = xs(rng), y0 = ys(rng);
    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x) m.set(x, y, true);
  }
  return m;
}

/// Full patch inside the image and free of unknown pixels.
inline bool oracle_admissible(const RegionMask& unknown, Point c, int ps) {
  const int h = ps / 2;
  for (int dy = -h; dy <= h; ++dy)
    for (int dx = -h; dx <= h; ++dx) {
      const int x = c.x + dx, y = c.y + dy;
      if (x < 0 || y < 0 || x >= unknown.width() || y >= unknown.height() || unknown(x, y)) return false;
    }
  return true;
}

/// SSD over cells of the target patch that are inside the image and known.
inline double oracle_ssd(const Raster& img, const RegionMask& unknown, Point target, Point cand, int ps) {
  const int h = ps / 2;
  double s = 0.0;
  for (int dy = -h; dy <= h; ++dy)
    for (int dx = -h; dx <= h; ++dx) {
      const int tx = target.x + dx, ty = target.y + dy;
      if (tx < 0 || ty < 0 || tx >= img.width() || ty >= img.height() || unknown(tx, ty)) continue;
      for (int c = 0; c < img.channels(); ++c) {
        const double d = img(tx, ty, c) - img(cand.x + dx, cand.y + dy, c);
        s += d * d;
      }
    }
  return s;
}

struct OracleMatch {
  Point center{-1, -1};
  double ssd = std::numeric_limits<double>::infinity();
  std::size_t admissible = 0;
};

/// Exhaustive scan in row-major order; strict improvement keeps the first
/// (row-major smallest) among equal minima.
inline OracleMatch oracle_best(const Raster& img, const RegionMask& unknown, Point target, int ps,
                               std::optional<Rect> window = std::nullopt) {
  OracleMatch best;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Point c{x, y};
      if (window && !window->contains(c)) continue;
      if (!oracle_admissible(unknown, c, ps)) continue;
      ++best.admissible;
      const double s = oracle_ssd(img, unknown, target, c, ps);
      if (s < best.ssd) {
        best.ssd = s;
        best.center = c;
      }
    }
  return best;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("patchfill_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Restores the OpenMP thread count on scope exit.
class ThreadCount {
 public:
  explicit ThreadCount(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved_); }

 private:
  int saved_;
};

}  // namespace support
