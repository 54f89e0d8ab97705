#include "patchfill/energy.hpp"

#include <optional>
#include <vector>

#include "patchfill/patch_search.hpp"
#include "patchfill/sat.hpp"

namespace patchfill {

double global_patch_energy(const Raster& raster, const RegionMask& original_mask, int patch_size) {
  if (original_mask.width() != raster.width() || original_mask.height() != raster.height())
    throw std::invalid_argument("mask and raster dimensions differ");
  const CandidateIndex sources(original_mask, patch_size);
  if (sources.count() == 0) throw NoCandidateError("source region admits no full patch");
  const RowPrefixSums prefix(raster);
  const RegionMask nothing_unknown(raster.width(), raster.height());
  const int half = patch_size / 2;

  // A centre is scored when its patch touches the target region.
  const Rect touched = [&] {
    const Rect box = original_mask.bounding_box();
    return intersect({box.x - half, box.y - half, box.width + 2 * half, box.height + 2 * half},
                     {half, half, raster.width() - 2 * half, raster.height() - 2 * half});
  }();
  if (original_mask.empty() || touched.empty()) return 0.0;

  std::vector<double> row_energy(static_cast<std::size_t>(touched.height), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int row = 0; row < touched.height; ++row) {
    const int y = touched.y + row;
    std::optional<Point> hint;
    double sum = 0.0;
    for (int x = touched.x; x < touched.x + touched.width; ++x) {
      bool touches = false;
      for (int qy = y - half; qy <= y + half && !touches; ++qy)
        for (int qx = x - half; qx <= x + half; ++qx)
          if (original_mask(qx, qy)) {
            touches = true;
            break;
          }
      if (!touches) continue;
      const PatchQuery query = PatchQuery::build(raster, nothing_unknown, {x, y}, patch_size);
      SearchOptions options;
      options.hint = hint;
      options.stop_at_zero = true;
      const MatchResult match = best_match_sea(query, raster, prefix, sources, options);
      sum += match.ssd;
      // Neighbouring patches tend to have neighbouring twins.
      hint = Point{match.center.x + 1, match.center.y};
    }
    row_energy[static_cast<std::size_t>(row)] = sum;
  }
  double total = 0.0;
  for (double e : row_energy) total += e;
  return total;
}

}  // namespace patchfill
