#include "patchfill/fill_front.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace patchfill {

ConfidenceField::ConfidenceField(const RegionMask& mask)
    : width_(mask.width()), height_(mask.height()), values_(mask.flags().size()) {
  const auto flags = mask.flags();
  for (std::size_t i = 0; i < flags.size(); ++i) values_[i] = flags[i] ? 0.0 : 1.0;
}

void ConfidenceField::set(Point p, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::out_of_range("confidence must lie in [0, 1]");
  values_[offset(p.x, p.y)] = value;
}

namespace {

bool has_known_neighbor(const RegionMask& mask, int x, int y) {
  return (x > 0 && !mask(x - 1, y)) || (x + 1 < mask.width() && !mask(x + 1, y)) ||
         (y > 0 && !mask(x, y - 1)) || (y + 1 < mask.height() && !mask(x, y + 1));
}

bool is_known(const RegionMask& mask, int x, int y) {
  return x >= 0 && y >= 0 && x < mask.width() && y < mask.height() && !mask(x, y);
}

double channel_mean(const Raster& raster, int x, int y) {
  const double* px = raster.pixel(x, y);
  double s = 0.0;
  for (int c = 0; c < raster.channels(); ++c) s += px[c];
  return s / raster.channels();
}

// Larger-magnitude one-sided difference along (dx, dy) at a known pixel.
double one_sided_derivative(const Raster& raster, const RegionMask& mask, int x, int y, int dx, int dy) {
  const double center = channel_mean(raster, x, y);
  double best = 0.0;
  bool have = false;
  if (is_known(mask, x + dx, y + dy)) {
    best = channel_mean(raster, x + dx, y + dy) - center;
    have = true;
  }
  if (is_known(mask, x - dx, y - dy)) {
    const double backward = center - channel_mean(raster, x - dx, y - dy);
    if (!have || std::abs(backward) > std::abs(best)) best = backward;
  }
  return best;
}

double smoothed_indicator(const RegionMask& mask, int x, int y) {
  int inside = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int qx = std::clamp(x + dx, 0, mask.width() - 1);
      const int qy = std::clamp(y + dy, 0, mask.height() - 1);
      inside += mask(qx, qy) ? 1 : 0;
    }
  return inside / 9.0;
}

}  // namespace

std::vector<Point> extract_front(const RegionMask& mask) { return extract_front(mask, mask.bounds()); }

std::vector<Point> extract_front(const RegionMask& mask, const Rect& roi) {
  const Rect r = intersect(roi, mask.bounds());
  std::vector<Point> front;
  for (int y = r.y; y < r.y + r.height; ++y)
    for (int x = r.x; x < r.x + r.width; ++x)
      if (mask(x, y) && has_known_neighbor(mask, x, y)) front.push_back({x, y});
  return front;
}

double confidence_term(Point p, const ConfidenceField& confidence, const RegionMask& mask, int patch_size) {
  if (patch_size < 3 || patch_size % 2 == 0) throw std::invalid_argument("patch size must be odd and >= 3");
  if (!mask.in_bounds(p)) throw std::out_of_range("confidence_term: point outside image");
  const int half = patch_size / 2;
  const Rect patch = intersect({p.x - half, p.y - half, patch_size, patch_size}, mask.bounds());
  double sum = 0.0;
  for (int y = patch.y; y < patch.y + patch.height; ++y)
    for (int x = patch.x; x < patch.x + patch.width; ++x)
      if (!mask(x, y)) sum += confidence(x, y);
  return sum / (static_cast<double>(patch.width) * patch.height);
}

bool front_normal(const RegionMask& mask, Point p, Vec2& normal) {
  const int xl = std::max(p.x - 1, 0), xr = std::min(p.x + 1, mask.width() - 1);
  const int yu = std::max(p.y - 1, 0), yd = std::min(p.y + 1, mask.height() - 1);
  const double gx = xr > xl ? (smoothed_indicator(mask, xr, p.y) - smoothed_indicator(mask, xl, p.y)) / (xr - xl) : 0.0;
  const double gy = yd > yu ? (smoothed_indicator(mask, p.x, yd) - smoothed_indicator(mask, p.x, yu)) / (yd - yu) : 0.0;
  const double norm = std::hypot(gx, gy);
  if (norm < 1e-12) {
    normal = {0.0, 0.0};
    return false;
  }
  // The indicator grows into the target region; the normal points out of it.
  normal = {-gx / norm, -gy / norm};
  return true;
}

Vec2 known_gradient(const Raster& raster, const RegionMask& mask, Point p) {
  Vec2 best{0.0, 0.0};
  double best_mag = -1.0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int qx = p.x + dx, qy = p.y + dy;
      if (!is_known(mask, qx, qy)) continue;
      const Vec2 g{one_sided_derivative(raster, mask, qx, qy, 1, 0),
                   one_sided_derivative(raster, mask, qx, qy, 0, 1)};
      const double mag = g.x * g.x + g.y * g.y;
      if (mag > best_mag) {
        best_mag = mag;
        best = g;
      }
    }
  return best;
}

Vec2 isophote(const Raster& raster, const RegionMask& mask, Point p) {
  const Vec2 g = known_gradient(raster, mask, p);
  return {-g.y, g.x};
}

double data_term(Point p, const Raster& raster, const RegionMask& mask, Vec2 normal) {
  if (normal.x == 0.0 && normal.y == 0.0) return 0.0;
  return std::abs(dot(isophote(raster, mask, p), normal)) / kDataTermNormalizer;
}

FrontPixel evaluate_priority(Point p, const Raster& raster, const RegionMask& mask,
                             const ConfidenceField& confidence, int patch_size) {
  FrontPixel fp;
  fp.position = p;
  fp.degenerate = !front_normal(mask, p, fp.normal);
  fp.isophote = isophote(raster, mask, p);
  fp.confidence = confidence_term(p, confidence, mask, patch_size);
  fp.data = fp.degenerate ? 0.0 : std::abs(dot(fp.isophote, fp.normal)) / kDataTermNormalizer;
  fp.priority = fp.confidence * fp.data;
  return fp;
}

std::vector<FrontPixel> evaluate_front(std::span<const Point> front, const Raster& raster,
                                       const RegionMask& mask, const ConfidenceField& confidence,
                                       int patch_size) {
  std::vector<FrontPixel> out(front.size());
  const auto n = static_cast<std::ptrdiff_t>(front.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = evaluate_priority(front[static_cast<std::size_t>(i)], raster, mask,
                                                         confidence, patch_size);
  return out;
}

std::size_t select_max_priority(std::span<const FrontPixel> front) {
  if (front.empty()) throw std::invalid_argument("select_max_priority: empty front");
  std::size_t best = 0;
  for (std::size_t i = 1; i < front.size(); ++i) {
    const auto& a = front[i];
    const auto& b = front[best];
    if (a.priority > b.priority || (a.priority == b.priority && row_major_less(a.position, b.position)))
      best = i;
  }
  return best;
}

}  // namespace patchfill
