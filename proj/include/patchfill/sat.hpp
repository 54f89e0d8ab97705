#pragma once

#include <vector>

#include "patchfill/image.hpp"

namespace patchfill {

/// Per-channel summed-area table with a leading row and column of zeros.
class SummedAreaTable {
 public:
  SummedAreaTable() = default;
  explicit SummedAreaTable(const Raster& raster);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  /// Sum of channel `c` over `r`, which must lie inside the source bounds.
  double rectangle_sum(const Rect& r, int c = 0) const;

 private:
  double at(int x, int y, int c) const {
    return table_[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) +
                   static_cast<std::size_t>(x)) *
                      static_cast<std::size_t>(channels_) +
                  static_cast<std::size_t>(c)];
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> table_;
};

SummedAreaTable build_sat(const Raster& raster);

/// Per-row, per-channel prefix sums: run_sum(y, x, len, c) is two reads.
class RowPrefixSums {
 public:
  RowPrefixSums() = default;
  explicit RowPrefixSums(const Raster& raster);

  double run_sum(int y, int x, int len, int c) const {
    return at(x + len, y, c) - at(x, y, c);
  }

  /// Recomputes the prefix of row `y` after pixels on it changed.
  void refresh_row(const Raster& raster, int y);

  /// Pointer to the channel-interleaved prefix entries of row `y`.
  const double* row(int y) const {
    return table_.data() + static_cast<std::size_t>(y) * stride_;
  }
  int channels() const { return channels_; }

 private:
  double at(int x, int y, int c) const {
    return table_[static_cast<std::size_t>(y) * stride_ +
                  static_cast<std::size_t>(x) * static_cast<std::size_t>(channels_) +
                  static_cast<std::size_t>(c)];
  }

  int width_ = 0;
  int channels_ = 0;
  std::size_t stride_ = 0;
  std::vector<double> table_;
};

}  // namespace patchfill
