#include "patchfill/serial.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace patchfill::serial {

Raster bilateral_filter(const Raster& raster, const BilateralParams& params, const RegionMask* ignore) {
  validate(params);
  const int w = raster.width(), h = raster.height(), channels = raster.channels(), r = params.radius;
  std::vector<double> out(raster.data().begin(), raster.data().end());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (ignore && (*ignore)(x, y)) continue;
      std::vector<double> acc(static_cast<std::size_t>(channels), 0.0);
      double norm = 0.0;
      for (int qy = y - r; qy <= y + r; ++qy)
        for (int qx = x - r; qx <= x + r; ++qx) {
          if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
          if (ignore && (*ignore)(qx, qy)) continue;
          double d2 = 0.0;
          for (int c = 0; c < channels; ++c) {
            const double d = raster(x, y, c) - raster(qx, qy, c);
            d2 += d * d;
          }
          const double s2 = (qx - x) * (qx - x) + (qy - y) * (qy - y);
          const double weight = std::exp(-s2 / (2.0 * params.sigma_spatial * params.sigma_spatial)) *
                                std::exp(-d2 / (2.0 * params.sigma_range * params.sigma_range));
          norm += weight;
          for (int c = 0; c < channels; ++c)
            acc[static_cast<std::size_t>(c)] += weight * (raster(qx, qy, c) - raster(x, y, c));
        }
      for (int c = 0; c < channels; ++c) {
        const double v = raster(x, y, c) + acc[static_cast<std::size_t>(c)] / norm;
        out[raster.index(x, y, c)] = std::min(std::max(v, 0.0), kMaxIntensity);
      }
    }
  return Raster(w, h, channels, std::move(out));
}

namespace {

bool fully_known(const RegionMask& unknown, int cx, int cy, int half) {
  if (cx - half < 0 || cy - half < 0 || cx + half >= unknown.width() || cy + half >= unknown.height()) return false;
  for (int y = cy - half; y <= cy + half; ++y)
    for (int x = cx - half; x <= cx + half; ++x)
      if (unknown(x, y)) return false;
  return true;
}

double grid_ssd(const PatchQuery& query, const Raster& raster, int cx, int cy) {
  const int half = query.patch_size / 2;
  double sum = 0.0;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) {
      if (!query.validity[static_cast<std::size_t>((dy + half) * query.patch_size + dx + half)]) continue;
      for (int c = 0; c < raster.channels(); ++c) {
        const double d = raster(query.center.x + dx, query.center.y + dy, c) - raster(cx + dx, cy + dy, c);
        sum += d * d;
      }
    }
  return sum;
}

}  // namespace

MatchResult best_match_bruteforce(const PatchQuery& query, const Raster& raster, const RegionMask& unknown,
                                  std::optional<Rect> window) {
  const int half = query.patch_size / 2;
  MatchResult best{{-1, -1}, std::numeric_limits<double>::infinity(), 0, 0, 0};
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x) {
      if (window && !window->contains({x, y})) continue;
      if (!fully_known(unknown, x, y, half)) continue;
      ++best.candidates_examined;
      const double ssd = grid_ssd(query, raster, x, y);
      if (ssd < best.ssd) {
        best.ssd = ssd;
        best.center = {x, y};
      }
    }
  if (best.center.x < 0) throw NoCandidateError("no admissible exemplar");
  return best;
}

double global_patch_energy(const Raster& raster, const RegionMask& original_mask, int patch_size) {
  const int half = patch_size / 2;
  const RegionMask none(raster.width(), raster.height());
  std::vector<Point> sources;
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x)
      if (fully_known(original_mask, x, y, half)) sources.push_back({x, y});
  if (sources.empty()) throw NoCandidateError("source region admits no full patch");

  double total = 0.0;
  for (int y = half; y < raster.height() - half; ++y)
    for (int x = half; x < raster.width() - half; ++x) {
      if (fully_known(original_mask, x, y, half)) continue;
      const PatchQuery query = PatchQuery::build(raster, none, {x, y}, patch_size);
      double best = std::numeric_limits<double>::infinity();
      for (const Point& q : sources) best = std::min(best, grid_ssd(query, raster, q.x, q.y));
      total += best;
    }
  return total;
}

LayerMap assign_layers(const Raster& raster, const RegionMask& mask, const SomGrid& som) {
  LayerMap map(raster.width(), raster.height(), som.size());
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x) {
      if (mask(x, y)) continue;
      const Color color = pixel_color(raster, x, y);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < som.size(); ++k) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) d += (color[c] - som.weight(k)[c]) * (color[c] - som.weight(k)[c]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      map.set(x, y, best);
    }
  return map;
}

}  // namespace patchfill::serial
