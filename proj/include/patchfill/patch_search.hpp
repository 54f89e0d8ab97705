#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <vector>

#include "patchfill/image.hpp"
#include "patchfill/sat.hpp"

namespace patchfill {

/// Horizontal run of valid cells, as offsets from the patch centre.
struct PatchRun {
  int dy = 0;
  int dx = 0;
  int length = 0;
};

/// The known part of the patch around a target pixel.
///
/// `validity` is a patch_size x patch_size row-major grid; a cell is valid when
/// it lies inside the image and is not in the unknown mask. Valid cells are
/// also stored as row runs together with their target values and per-run,
/// per-channel sums, which is what the SSD kernel and the elimination bound
/// read.
struct PatchQuery {
  Point center;
  int patch_size = 0;
  int channels = 0;
  std::vector<std::uint8_t> validity;
  int valid_count = 0;
  std::vector<PatchRun> runs;
  std::vector<double> values;    // valid cells in run order, channel-interleaved
  std::vector<double> run_sums;  // runs.size() x channels

  static PatchQuery build(const Raster& raster, const RegionMask& unknown, Point center, int patch_size);
};

struct MatchResult {
  Point center;
  double ssd = 0.0;
  std::size_t candidates_examined = 0;
  std::size_t candidates_pruned = 0;
  std::size_t audit_violations = 0;
};

/// Admissible exemplar centres for one patch size: the full patch lies inside
/// the image and contains no unknown pixel. Optional per-centre labels split
/// the candidates into classes (label < 0 excludes the centre).
class CandidateIndex {
 public:
  CandidateIndex() = default;
  CandidateIndex(const RegionMask& unknown, int patch_size, std::span<const int> center_labels = {});

  int patch_size() const { return patch_size_; }
  int width() const { return width_; }
  int height() const { return height_; }

  /// Label of an admissible centre, or -1.
  int label_at(Point p) const { return grid_[offset(p)]; }
  bool admissible(Point p, int label = -1) const {
    const int l = grid_[offset(p)];
    return l >= 0 && (label < 0 || l == label);
  }

  /// Row-major admissible centres; label -1 means every class.
  std::span<const Point> candidates(int label = -1) const;
  std::size_t count(int label = -1) const { return candidates(label).size(); }

  /// Re-examines centres whose patch intersects `changed` after pixels there
  /// became known. Centres only ever gain admissibility.
  void admit_changed(const RegionMask& unknown, const Rect& changed);

 private:
  std::size_t offset(Point p) const {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(p.x);
  }
  bool patch_known(const RegionMask& unknown, Point c) const;
  void insert_sorted(std::vector<Point>& list, Point p);

  int width_ = 0;
  int height_ = 0;
  int patch_size_ = 0;
  std::vector<int> labels_;  // per-pixel centre label (0 when unlabelled)
  std::vector<int> grid_;
  std::vector<Point> all_;
  std::vector<std::vector<Point>> by_label_;
};

struct SearchOptions {
  std::optional<Rect> window;  // candidate centres must lie inside
  int label = -1;              // candidate class; -1 = any
  bool audit = false;          // re-check every pruned candidate against its bound
  // Elimination search only. `hint` is evaluated before anything else;
  // `stop_at_zero` returns as soon as an exact match is found, in which case
  // the centre is not tie-broken and the candidate counts are partial.
  std::optional<Point> hint;
  bool stop_at_zero = false;
};

/// Sum over valid cells and channels of (target - candidate)^2. Throws
/// std::invalid_argument when the candidate patch is not fully known.
double ssd_partial(const PatchQuery& query, Point candidate, const Raster& raster, const RegionMask& unknown);

/// Same sum without admissibility checks.
double ssd_unchecked(const PatchQuery& query, Point candidate, const Raster& raster);

/// Cauchy-Schwarz bound over the row runs: sum over runs and channels of
/// (target run sum - candidate run sum)^2 / run length. Never exceeds the SSD.
double run_lower_bound(const PatchQuery& query, Point candidate, const RowPrefixSums& prefix);

/// Single-block bound: sum over channels of (total difference)^2 / valid_count.
/// Never exceeds run_lower_bound.
double block_lower_bound(const PatchQuery& query, Point candidate, const RowPrefixSums& prefix);

/// Exhaustive scan over every admissible candidate (OpenMP, deterministic merge).
MatchResult best_match_bruteforce(const PatchQuery& query, const Raster& raster,
                                  const CandidateIndex& index, const SearchOptions& options = {});

/// Successive elimination: candidates whose run bound exceeds the incumbent
/// are discarded without evaluating the SSD, and SSD accumulation stops as soon
/// as it passes the incumbent. Returns the same centre and SSD as the
/// exhaustive scan.
MatchResult best_match_sea(const PatchQuery& query, const Raster& raster, const RowPrefixSums& prefix,
                           const CandidateIndex& index, const SearchOptions& options = {});

// Convenience overloads that build the index (and prefix sums) on the fly.
MatchResult best_match_bruteforce(const PatchQuery& query, const Raster& raster, const RegionMask& unknown,
                                  std::optional<Rect> window = std::nullopt);
MatchResult best_match_sea(const PatchQuery& query, const Raster& raster, const RegionMask& unknown,
                           std::optional<Rect> window = std::nullopt);

/// Square of side 2 * radius + 1 around `center`, clamped to `bounds`.
Rect restrict_window(Point center, int radius, const Rect& bounds);

class NoCandidateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace patchfill
