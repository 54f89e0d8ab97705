#include "patchfill/patch_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace patchfill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_patch_size(int patch_size) {
  if (patch_size < 3 || patch_size % 2 == 0) throw std::invalid_argument("patch size must be odd and >= 3");
}

bool better(double ssd, Point p, double best_ssd, Point best) {
  return ssd < best_ssd || (ssd == best_ssd && row_major_less(p, best));
}

// Slack so that floating-point rounding in the bound can never prune a
// candidate that ties the incumbent.
double prune_threshold(double best) { return best + 1e-9 * (1.0 + best); }

struct Incumbent {
  double ssd = kInf;
  Point center{-1, -1};
  std::size_t examined = 0;
  std::size_t pruned = 0;
  std::size_t violations = 0;

  void offer(double s, Point p) {
    if (better(s, p, ssd, center)) {
      ssd = s;
      center = p;
    }
  }
  void merge(const Incumbent& other) {
    if (other.center.x >= 0) offer(other.ssd, other.center);
    examined += other.examined;
    pruned += other.pruned;
    violations += other.violations;
  }
};

double ssd_with_cap(const PatchQuery& q, Point cand, const Raster& raster, double cap) {
  const int channels = q.channels;
  const double* target = q.values.data();
  double sum = 0.0;
  for (const PatchRun& run : q.runs) {
    const double* src = raster.pixel(cand.x + run.dx, cand.y + run.dy);
    const int n = run.length * channels;
    for (int i = 0; i < n; ++i) {
      const double d = target[i] - src[i];
      sum += d * d;
    }
    target += n;
    if (sum > cap) return sum;
  }
  return sum;
}

// Accumulates the run bound and stops once it passes `cap`.
double run_bound_with_cap(const PatchQuery& q, Point cand, const RowPrefixSums& prefix, double cap) {
  const int channels = q.channels;
  const double* target_sums = q.run_sums.data();
  double bound = 0.0;
  for (const PatchRun& run : q.runs) {
    const double* row = prefix.row(cand.y + run.dy);
    const double* lo = row + (cand.x + run.dx) * channels;
    const double* hi = lo + run.length * channels;
    const double inv_len = 1.0 / run.length;
    for (int c = 0; c < channels; ++c) {
      const double diff = target_sums[c] - (hi[c] - lo[c]);
      bound += diff * diff * inv_len;
    }
    target_sums += channels;
    if (bound > cap) return bound;
  }
  return bound;
}

void check_index(const PatchQuery& query, const Raster& raster, const CandidateIndex& index) {
  if (index.patch_size() != query.patch_size) throw std::invalid_argument("candidate index built for another patch size");
  if (index.width() != raster.width() || index.height() != raster.height())
    throw std::invalid_argument("candidate index does not match raster");
  if (query.channels != raster.channels()) throw std::invalid_argument("query channel count mismatch");
}

MatchResult finish(const Incumbent& inc, const PatchQuery& query) {
  if (inc.center.x < 0)
    throw NoCandidateError("no admissible exemplar for patch at (" + std::to_string(query.center.x) + ", " +
                           std::to_string(query.center.y) + ")");
  return {inc.center, inc.ssd, inc.examined, inc.pruned, inc.violations};
}

}  // namespace

PatchQuery PatchQuery::build(const Raster& raster, const RegionMask& unknown, Point center, int patch_size) {
  check_patch_size(patch_size);
  if (unknown.width() != raster.width() || unknown.height() != raster.height())
    throw std::invalid_argument("mask and raster dimensions differ");
  PatchQuery q;
  q.center = center;
  q.patch_size = patch_size;
  q.channels = raster.channels();
  q.validity.assign(static_cast<std::size_t>(patch_size) * static_cast<std::size_t>(patch_size), 0);
  const int half = patch_size / 2;
  for (int dy = -half; dy <= half; ++dy) {
    int run_start = 0;
    bool in_run = false;
    for (int dx = -half; dx <= half + 1; ++dx) {
      const int x = center.x + dx, y = center.y + dy;
      const bool valid = dx <= half && x >= 0 && y >= 0 && x < raster.width() && y < raster.height() &&
                         !unknown(x, y);
      if (valid) {
        q.validity[static_cast<std::size_t>((dy + half) * patch_size + dx + half)] = 1;
        ++q.valid_count;
        if (!in_run) {
          run_start = dx;
          in_run = true;
        }
      } else if (in_run) {
        q.runs.push_back({dy, run_start, dx - run_start});
        in_run = false;
      }
    }
  }
  for (const PatchRun& run : q.runs) {
    const double* src = raster.pixel(center.x + run.dx, center.y + run.dy);
    q.values.insert(q.values.end(), src, src + run.length * q.channels);
    for (int c = 0; c < q.channels; ++c) {
      double s = 0.0;
      for (int i = 0; i < run.length; ++i) s += src[i * q.channels + c];
      q.run_sums.push_back(s);
    }
  }
  if (q.valid_count == 0) throw std::invalid_argument("patch query has no known pixels");
  return q;
}

CandidateIndex::CandidateIndex(const RegionMask& unknown, int patch_size, std::span<const int> center_labels)
    : width_(unknown.width()), height_(unknown.height()), patch_size_(patch_size) {
  check_patch_size(patch_size);
  const std::size_t n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  if (!center_labels.empty() && center_labels.size() != n)
    throw std::invalid_argument("label map does not match mask");
  labels_.assign(n, 0);
  if (!center_labels.empty()) std::copy(center_labels.begin(), center_labels.end(), labels_.begin());
  const int max_label = labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
  by_label_.resize(static_cast<std::size_t>(std::max(max_label, 0) + 1));
  grid_.assign(n, -1);

  // Integral image of unknown pixels for O(1) patch emptiness tests.
  std::vector<int> integral(static_cast<std::size_t>(width_ + 1) * static_cast<std::size_t>(height_ + 1), 0);
  auto I = [&](int x, int y) -> int& {
    return integral[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)];
  };
  for (int y = 0; y < height_; ++y) {
    int row = 0;
    for (int x = 0; x < width_; ++x) {
      row += unknown(x, y) ? 1 : 0;
      I(x + 1, y + 1) = I(x + 1, y) + row;
    }
  }
  const int half = patch_size / 2;
  for (int y = half; y < height_ - half; ++y)
    for (int x = half; x < width_ - half; ++x) {
      const int x0 = x - half, y0 = y - half, x1 = x + half + 1, y1 = y + half + 1;
      if (I(x1, y1) - I(x0, y1) - I(x1, y0) + I(x0, y0) != 0) continue;
      const Point p{x, y};
      const int label = labels_[offset(p)];
      if (label < 0) continue;
      grid_[offset(p)] = label;
      all_.push_back(p);
      by_label_[static_cast<std::size_t>(label)].push_back(p);
    }
}

std::span<const Point> CandidateIndex::candidates(int label) const {
  if (label < 0) return all_;
  if (static_cast<std::size_t>(label) >= by_label_.size()) return {};
  return by_label_[static_cast<std::size_t>(label)];
}

bool CandidateIndex::patch_known(const RegionMask& unknown, Point c) const {
  const int half = patch_size_ / 2;
  if (c.x - half < 0 || c.y - half < 0 || c.x + half >= width_ || c.y + half >= height_) return false;
  for (int y = c.y - half; y <= c.y + half; ++y)
    for (int x = c.x - half; x <= c.x + half; ++x)
      if (unknown(x, y)) return false;
  return true;
}

void CandidateIndex::insert_sorted(std::vector<Point>& list, Point p) {
  list.insert(std::upper_bound(list.begin(), list.end(), p, row_major_less), p);
}

void CandidateIndex::admit_changed(const RegionMask& unknown, const Rect& changed) {
  const int half = patch_size_ / 2;
  const Rect area = intersect({changed.x - half, changed.y - half, changed.width + 2 * half, changed.height + 2 * half},
                              {0, 0, width_, height_});
  for (int y = area.y; y < area.y + area.height; ++y)
    for (int x = area.x; x < area.x + area.width; ++x) {
      const Point p{x, y};
      if (grid_[offset(p)] >= 0) continue;
      const int label = labels_[offset(p)];
      if (label < 0 || !patch_known(unknown, p)) continue;
      grid_[offset(p)] = label;
      insert_sorted(all_, p);
      insert_sorted(by_label_[static_cast<std::size_t>(label)], p);
    }
}

double ssd_unchecked(const PatchQuery& query, Point candidate, const Raster& raster) {
  return ssd_with_cap(query, candidate, raster, kInf);
}

double ssd_partial(const PatchQuery& query, Point candidate, const Raster& raster, const RegionMask& unknown) {
  const int half = query.patch_size / 2;
  if (candidate.x - half < 0 || candidate.y - half < 0 || candidate.x + half >= raster.width() ||
      candidate.y + half >= raster.height())
    throw std::invalid_argument("candidate not in source region: patch leaves the image");
  for (int y = candidate.y - half; y <= candidate.y + half; ++y)
    for (int x = candidate.x - half; x <= candidate.x + half; ++x)
      if (unknown(x, y)) throw std::invalid_argument("candidate not in source region");
  return ssd_unchecked(query, candidate, raster);
}

double run_lower_bound(const PatchQuery& query, Point candidate, const RowPrefixSums& prefix) {
  return run_bound_with_cap(query, candidate, prefix, kInf);
}

double block_lower_bound(const PatchQuery& query, Point candidate, const RowPrefixSums& prefix) {
  const int channels = query.channels;
  double bound = 0.0;
  for (int c = 0; c < channels; ++c) {
    double diff = 0.0;
    for (std::size_t r = 0; r < query.runs.size(); ++r) {
      const PatchRun& run = query.runs[r];
      diff += query.run_sums[r * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] -
              prefix.run_sum(candidate.y + run.dy, candidate.x + run.dx, run.length, c);
    }
    bound += diff * diff / query.valid_count;
  }
  return bound;
}

MatchResult best_match_bruteforce(const PatchQuery& query, const Raster& raster, const CandidateIndex& index,
                                  const SearchOptions& options) {
  check_index(query, raster, index);
  const std::span<const Point> list = index.candidates(options.label);
  const auto n = static_cast<std::ptrdiff_t>(list.size());
  Incumbent result;
#pragma omp parallel
  {
    Incumbent local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Point p = list[static_cast<std::size_t>(i)];
      if (options.window && !options.window->contains(p)) continue;
      ++local.examined;
      local.offer(ssd_with_cap(query, p, raster, kInf), p);
    }
#pragma omp critical(patchfill_brute_merge)
    result.merge(local);
  }
  return finish(result, query);
}

MatchResult best_match_sea(const PatchQuery& query, const Raster& raster, const RowPrefixSums& prefix,
                           const CandidateIndex& index, const SearchOptions& options) {
  check_index(query, raster, index);
  if (prefix.channels() != raster.channels()) throw std::invalid_argument("prefix sums do not match raster");

  auto visit = [&](Incumbent& inc, Point p) {
    const double cap = prune_threshold(inc.ssd);
    const double bound = run_bound_with_cap(query, p, prefix, cap);
    if (bound > cap) {
      ++inc.pruned;
      if (options.audit && ssd_unchecked(query, p, raster) < bound - 1e-9 * (1.0 + bound)) ++inc.violations;
      return;
    }
    ++inc.examined;
    const double ssd = ssd_with_cap(query, p, raster, inc.ssd);
    if (ssd <= inc.ssd) inc.offer(ssd, p);
  };

  // Seed the incumbent from the candidates nearest the target, ring by ring.
  const Rect limits = options.window ? intersect(*options.window, raster.bounds()) : raster.bounds();
  const int seed_radius = query.patch_size;
  const Rect seed_box = intersect({query.center.x - seed_radius, query.center.y - seed_radius, 2 * seed_radius + 1,
                                   2 * seed_radius + 1},
                                  limits);
  Incumbent seed;
  const bool use_hint = options.hint && limits.contains(*options.hint) && index.admissible(*options.hint, options.label);
  if (use_hint) visit(seed, *options.hint);
  auto done = [&](const Incumbent& inc) { return options.stop_at_zero && inc.ssd == 0.0; };
  auto seen = [&](Point p) { return seed_box.contains(p) || (use_hint && p == *options.hint); };
  for (int ring = 0; ring <= seed_radius; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      const bool edge_row = dy == -ring || dy == ring;
      for (int dx = -ring; dx <= ring; dx += edge_row ? 1 : 2 * std::max(ring, 1)) {
        const Point p{query.center.x + dx, query.center.y + dy};
        if (done(seed)) return finish(seed, query);
        if (seed_box.contains(p) && index.admissible(p, options.label) && !(use_hint && p == *options.hint))
          visit(seed, p);
      }
    }
  }

  const std::span<const Point> list = index.candidates(options.label);
  const auto n = static_cast<std::ptrdiff_t>(list.size());
  Incumbent result = seed;
#pragma omp parallel
  {
    Incumbent local;
    local.ssd = seed.ssd;
    local.center = seed.center;
#pragma omp for schedule(dynamic, 256) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Point p = list[static_cast<std::size_t>(i)];
      if (seen(p) || !limits.contains(p) || done(local)) continue;
      visit(local, p);
    }
#pragma omp critical(patchfill_sea_merge)
    result.merge(local);
  }
  return finish(result, query);
}

MatchResult best_match_bruteforce(const PatchQuery& query, const Raster& raster, const RegionMask& unknown,
                                  std::optional<Rect> window) {
  const CandidateIndex index(unknown, query.patch_size);
  SearchOptions options;
  options.window = window;
  return best_match_bruteforce(query, raster, index, options);
}

MatchResult best_match_sea(const PatchQuery& query, const Raster& raster, const RegionMask& unknown,
                           std::optional<Rect> window) {
  const CandidateIndex index(unknown, query.patch_size);
  const RowPrefixSums prefix(raster);
  SearchOptions options;
  options.window = window;
  return best_match_sea(query, raster, prefix, index, options);
}

Rect restrict_window(Point center, int radius, const Rect& bounds) {
  if (radius < 0) throw std::invalid_argument("search radius must be nonnegative");
  const long side = 2L * radius + 1;
  const long x0 = std::max<long>(bounds.x, static_cast<long>(center.x) - radius);
  const long y0 = std::max<long>(bounds.y, static_cast<long>(center.y) - radius);
  const long x1 = std::min<long>(bounds.x + bounds.width, static_cast<long>(center.x) - radius + side);
  const long y1 = std::min<long>(bounds.y + bounds.height, static_cast<long>(center.y) - radius + side);
  if (x1 <= x0 || y1 <= y0) return {static_cast<int>(x0), static_cast<int>(y0), 0, 0};
  return {static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0), static_cast<int>(y1 - y0)};
}

}  // namespace patchfill
