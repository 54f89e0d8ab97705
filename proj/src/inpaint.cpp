#include "patchfill/inpaint.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "patchfill/patch_search.hpp"
#include "patchfill/sat.hpp"

namespace patchfill {

void validate(const InpaintParams& params) {
  if (params.patch_size < 5 || params.patch_size % 2 == 0)
    throw std::invalid_argument("patch size must be odd and at least 5");
  if (params.search_radius && *params.search_radius < params.patch_size)
    throw std::invalid_argument("search radius must be at least the patch size");
  if (params.bilateral) validate(*params.bilateral);
}

std::string FillReport::to_key_value() const {
  std::ostringstream out;
  out << "iterations=" << iterations << "\n"
      << "examined=" << examined << "\n"
      << "pruned=" << pruned << "\n"
      << "seconds=" << seconds << "\n"
      << "energy=";
  if (energy) out << *energy;
  out << "\n"
      << "label_fallbacks=" << label_fallbacks << "\n";
  return out.str();
}

std::string FillReport::csv_header() { return "iterations,examined,pruned,seconds,energy"; }

std::string FillReport::to_csv_row() const {
  std::ostringstream out;
  out << iterations << "," << examined << "," << pruned << "," << seconds << ",";
  if (energy) out << *energy;
  return out.str();
}

void update_confidence(ConfidenceField& confidence, std::span<const Point> filled, double value) {
  for (const Point& p : filled) confidence.set(p, value);
}

InpaintResult inpaint(const Raster& raster, const RegionMask& mask, const InpaintParams& params) {
  validate(params);
  if (mask.width() != raster.width() || mask.height() != raster.height())
    throw std::invalid_argument("mask and raster dimensions differ");
  const std::size_t pixels = raster.pixel_count();
  const bool labelled = !params.target_labels.empty();
  if (labelled && (params.target_labels.size() != pixels || params.source_labels.size() != pixels))
    throw std::invalid_argument("label maps must cover every pixel");

  const auto start = std::chrono::steady_clock::now();
  InpaintResult result{raster, ConfidenceField(mask), {}};
  Raster& image = result.image;
  ConfidenceField& confidence = result.confidence;
  FillReport& report = result.report;

  // Matching reads the guide; copies always come from the unfiltered image.
  std::optional<Raster> filtered;
  if (params.bilateral) filtered = bilateral_filter(raster, *params.bilateral, &mask);
  Raster& guide = filtered ? *filtered : image;

  const int ps = params.patch_size;
  const int half = ps / 2;
  RegionMask unknown = mask;
  CandidateIndex index(mask, ps, labelled ? std::span<const int>(params.source_labels) : std::span<const int>());
  RowPrefixSums prefix(guide);
  std::set<int> fallback_labels;
  std::vector<Point> filled;

  while (!unknown.empty()) {
    const std::vector<Point> front = extract_front(unknown, unknown.bounding_box());
    if (front.empty()) throw UnfillableError("target region has no known neighbour", {-1, -1});
    const std::vector<FrontPixel> scored = evaluate_front(front, guide, unknown, confidence, ps);
    const FrontPixel& best = scored[select_max_priority(scored)];
    const Point target = best.position;

    const PatchQuery query = PatchQuery::build(guide, unknown, target, ps);
    SearchOptions options;
    if (params.search_radius) options.window = restrict_window(target, *params.search_radius, image.bounds());
    if (labelled) {
      const int label = params.target_labels[static_cast<std::size_t>(target.y) * static_cast<std::size_t>(image.width()) +
                                             static_cast<std::size_t>(target.x)];
      if (label >= 0 && index.count(label) > 0)
        options.label = label;
      else if (label >= 0)
        fallback_labels.insert(label);
    }

    MatchResult match;
    try {
      match = params.use_sea ? best_match_sea(query, guide, prefix, index, options)
                             : best_match_bruteforce(query, guide, index, options);
    } catch (const NoCandidateError& e) {
      throw UnfillableError(std::string("unfillable front pixel: ") + e.what(), target);
    }

    filled.clear();
    for (int dy = -half; dy <= half; ++dy)
      for (int dx = -half; dx <= half; ++dx) {
        const Point to{target.x + dx, target.y + dy};
        if (!unknown.in_bounds(to) || !unknown.at(to)) continue;
        const Point from{match.center.x + dx, match.center.y + dy};
        image.copy_pixel(image, from, to);
        if (filtered) filtered->copy_pixel(*filtered, from, to);
        unknown.set(to.x, to.y, false);
        filled.push_back(to);
      }
    update_confidence(confidence, filled, best.confidence);

    if (params.allow_filled_sources) {
      const Rect changed = intersect({target.x - half, target.y - half, ps, ps}, image.bounds());
      for (int y = changed.y; y < changed.y + changed.height; ++y) prefix.refresh_row(guide, y);
      index.admit_changed(unknown, changed);
    }

    ++report.iterations;
    report.examined += match.candidates_examined;
    report.pruned += match.candidates_pruned;
    if (params.record_audit)
      report.steps.push_back({target, match.center, static_cast<int>(filled.size()), best.priority, best.confidence,
                              match.ssd});
  }

  report.label_fallbacks = fallback_labels.size();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace patchfill
