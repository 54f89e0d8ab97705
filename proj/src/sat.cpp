#include "patchfill/sat.hpp"

#include <stdexcept>

namespace patchfill {

SummedAreaTable::SummedAreaTable(const Raster& raster)
    : width_(raster.width()), height_(raster.height()), channels_(raster.channels()) {
  const std::size_t stride = static_cast<std::size_t>(width_ + 1) * static_cast<std::size_t>(channels_);
  table_.assign(stride * static_cast<std::size_t>(height_ + 1), 0.0);
  for (int y = 0; y < height_; ++y) {
    double* above = table_.data() + static_cast<std::size_t>(y) * stride;
    double* cur = above + stride;
    for (int c = 0; c < channels_; ++c) {
      double row_sum = 0.0;
      for (int x = 0; x < width_; ++x) {
        row_sum += raster(x, y, c);
        const std::size_t i = static_cast<std::size_t>(x + 1) * static_cast<std::size_t>(channels_) +
                              static_cast<std::size_t>(c);
        cur[i] = above[i] + row_sum;
      }
    }
  }
}

double SummedAreaTable::rectangle_sum(const Rect& r, int c) const {
  if (r.x < 0 || r.y < 0 || r.x + r.width > width_ || r.y + r.height > height_ || r.width < 0 ||
      r.height < 0)
    throw std::out_of_range("rectangle outside summed-area table");
  if (c < 0 || c >= channels_) throw std::out_of_range("channel outside summed-area table");
  const int x1 = r.x + r.width;
  const int y1 = r.y + r.height;
  return at(x1, y1, c) - at(r.x, y1, c) - at(x1, r.y, c) + at(r.x, r.y, c);
}

SummedAreaTable build_sat(const Raster& raster) { return SummedAreaTable(raster); }

RowPrefixSums::RowPrefixSums(const Raster& raster)
    : width_(raster.width()),
      channels_(raster.channels()),
      stride_(static_cast<std::size_t>(raster.width() + 1) * static_cast<std::size_t>(raster.channels())) {
  table_.assign(stride_ * static_cast<std::size_t>(raster.height()), 0.0);
  for (int y = 0; y < raster.height(); ++y) refresh_row(raster, y);
}

void RowPrefixSums::refresh_row(const Raster& raster, int y) {
  double* row = table_.data() + static_cast<std::size_t>(y) * stride_;
  const double* src = raster.pixel(0, y);
  for (int c = 0; c < channels_; ++c) row[c] = 0.0;
  for (int x = 0; x < width_; ++x)
    for (int c = 0; c < channels_; ++c)
      row[(x + 1) * channels_ + c] = row[x * channels_ + c] + src[x * channels_ + c];
}

}  // namespace patchfill
