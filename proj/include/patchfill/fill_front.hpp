#pragma once

#include <span>
#include <vector>

#include "patchfill/image.hpp"

namespace patchfill {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// A pixel of the target region with at least one known 4-neighbour.
struct FrontPixel {
  Point position;
  Vec2 normal;      // unit, pointing from the target region into the known region
  Vec2 isophote;    // perpendicular to the image gradient
  bool degenerate = false;  // normal could not be estimated; normal == (0, 0)
  double confidence = 0.0;
  double data = 0.0;
  double priority = 0.0;
};

/// Per-pixel reliability in [0, 1]. Starts at 1 on known pixels, 0 on the
/// target region.
class ConfidenceField {
 public:
  ConfidenceField() = default;
  explicit ConfidenceField(const RegionMask& mask);

  int width() const { return width_; }
  int height() const { return height_; }
  double operator()(int x, int y) const { return values_[offset(x, y)]; }
  double at(Point p) const { return (*this)(p.x, p.y); }

  /// Throws std::out_of_range for values outside [0, 1].
  void set(Point p, double value);

  std::span<const double> values() const { return values_; }

 private:
  std::size_t offset(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Target pixels with a known 4-neighbour, in row-major order.
std::vector<Point> extract_front(const RegionMask& mask);

/// Same as extract_front, scanning only `roi` (which must cover the target).
std::vector<Point> extract_front(const RegionMask& mask, const Rect& roi);

/// Sum of confidence over the known pixels of the patch centred at `p`,
/// divided by the number of patch pixels inside the image.
double confidence_term(Point p, const ConfidenceField& confidence, const RegionMask& mask,
                       int patch_size);

/// Normal of the front at `p`, from central differences of the 3x3 box-smoothed
/// target indicator. Returns false (and sets `normal` to zero) when degenerate.
bool front_normal(const RegionMask& mask, Point p, Vec2& normal);

/// Gradient of the channel-mean intensity at `p`, estimated from known pixels
/// of its 3x3 neighbourhood.
///
/// At each known neighbour the x and y derivatives are the larger-magnitude
/// one-sided difference whose two samples are both known (forward wins ties,
/// zero when neither exists). The neighbour with the largest gradient
/// magnitude is used (row-major tie-break). Both one-sided differences agree
/// on affine images, so the estimate is exact there.
Vec2 known_gradient(const Raster& raster, const RegionMask& mask, Point p);

/// Gradient rotated by +90 degrees: (-gy, gx).
Vec2 isophote(const Raster& raster, const RegionMask& mask, Point p);

inline constexpr double kDataTermNormalizer = 255.0;

/// |isophote . normal| / 255. Zero for a degenerate (zero) normal.
double data_term(Point p, const Raster& raster, const RegionMask& mask, Vec2 normal);

/// Confidence x data term, with all intermediate quantities filled in.
FrontPixel evaluate_priority(Point p, const Raster& raster, const RegionMask& mask,
                             const ConfidenceField& confidence, int patch_size);

/// Priorities for every front pixel (OpenMP over the front).
std::vector<FrontPixel> evaluate_front(std::span<const Point> front, const Raster& raster,
                                       const RegionMask& mask, const ConfidenceField& confidence,
                                       int patch_size);

/// Index of the highest priority; ties go to the smallest row, then column.
std::size_t select_max_priority(std::span<const FrontPixel> front);

}  // namespace patchfill
