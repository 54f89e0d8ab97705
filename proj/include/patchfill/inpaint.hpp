#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "patchfill/bilateral.hpp"
#include "patchfill/fill_front.hpp"
#include "patchfill/image.hpp"

namespace patchfill {

struct InpaintParams {
  int patch_size = 9;
  std::optional<int> search_radius;  // unset = whole image
  bool use_sea = true;
  std::optional<BilateralParams> bilateral;  // denoise the matching guide first
  std::uint64_t rng_seed = 0;                // reserved; the engine is deterministic
  bool allow_filled_sources = false;         // filled pixels may appear in exemplars
  bool record_audit = false;

  // Optional class restriction: the exemplar centre for target pixel p must
  // carry source_labels[q] == target_labels[p]. Both are row-major per-pixel
  // maps; negative source labels exclude a centre. A class with no admissible
  // exemplar falls back to the unrestricted search.
  std::vector<int> source_labels;
  std::vector<int> target_labels;
};

/// Throws std::invalid_argument on a malformed parameter set.
void validate(const InpaintParams& params);

/// One iteration of the fill loop.
struct FillStep {
  Point target;
  Point source;
  int filled = 0;
  double priority = 0.0;
  double confidence = 0.0;
  double ssd = 0.0;
};

struct FillReport {
  std::size_t iterations = 0;
  std::size_t examined = 0;
  std::size_t pruned = 0;
  double seconds = 0.0;
  std::optional<double> energy;
  std::size_t label_fallbacks = 0;  // classes searched without restriction
  std::vector<FillStep> steps;      // only with record_audit

  /// `key=value` lines: iterations, examined, pruned, seconds, energy, label_fallbacks.
  std::string to_key_value() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

struct InpaintResult {
  Raster image;
  ConfidenceField confidence;
  FillReport report;
};

class UnfillableError : public std::runtime_error {
 public:
  UnfillableError(const std::string& what, Point front_pixel)
      : std::runtime_error(what), front_pixel_(front_pixel) {}
  Point front_pixel() const { return front_pixel_; }

 private:
  Point front_pixel_;
};

/// Greedy exemplar fill: repeatedly take the highest-priority front pixel,
/// find its best source patch and copy the missing pixels verbatim.
InpaintResult inpaint(const Raster& raster, const RegionMask& mask, const InpaintParams& params = {});

/// Sets every listed pixel to `value`.
void update_confidence(ConfidenceField& confidence, std::span<const Point> filled, double value);

}  // namespace patchfill
