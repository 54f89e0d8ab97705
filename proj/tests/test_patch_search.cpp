#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "patchfill/fill_front.hpp"
#include "patchfill/fixtures.hpp"
#include "patchfill/patch_search.hpp"
#include "patchfill/serial.hpp"
#include "support.hpp"

using namespace patchfill;

namespace {

struct Case {
  Raster image;
  RegionMask mask;
  Point target;
  int patch = 5;
};

Case random_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(16, 40), ch_pick(0, 1), ps_pick(0, 2), levels_pick(0, 2);
  const int w = dim(rng), h = dim(rng), ch = ch_pick(rng) ? 3 : 1;
  const int levels[3] = {3, 16, 255};
  Case c{support::random_raster(w, h, ch, rng, levels[levels_pick(rng)]), support::random_rect_mask(w, h, 2, 7, rng),
         {0, 0}, 3 + 2 * ps_pick(rng)};
  const auto front = extract_front(c.mask);
  std::uniform_int_distribution<std::size_t> pick(0, front.size() - 1);
  c.target = front[pick(rng)];
  return c;
}

}  // namespace

TEST_CASE("partial SSD examples") {
  Raster img(9, 9, 1, 50.0);
  RegionMask m(9, 9);
  m.set(2, 2, true);
  const PatchQuery q = PatchQuery::build(img, m, {2, 2}, 3);
  CHECK(q.valid_count == 8);
  CHECK(ssd_partial(q, {6, 6}, img, m) == 0.0);
  img.set(7, 6, 0, 52.0);
  CHECK(ssd_partial(q, {6, 6}, img, m) == 4.0);
  try {
    ssd_partial(q, {3, 3}, img, m);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("candidate not in source region") != std::string::npos);
  }
}

TEST_CASE("partial SSD matches a direct double loop") {
  std::mt19937_64 rng(20);
  for (int t = 0; t < 100; ++t) {
    const Raster img = support::random_raster(30, 30, 3, rng);
    const RegionMask m = support::random_rect_mask(30, 30, 2, 8, rng);
    const auto front = extract_front(m);
    const Point target = front[static_cast<std::size_t>(t) % front.size()];
    const PatchQuery q = PatchQuery::build(img, m, target, 9);
    for (int k = 0; k < 10; ++k) {
      std::uniform_int_distribution<int> pos(4, 25);
      const Point cand{pos(rng), pos(rng)};
      if (!support::oracle_admissible(m, cand, 9)) continue;
      REQUIRE(ssd_partial(q, cand, img, m) == doctest::Approx(support::oracle_ssd(img, m, target, cand, 9)));
    }
  }
}

TEST_CASE("tiled image yields an exact match at a tile-aligned centre") {
  const Raster img = fixtures::periodic_tile(40, 40, 5, 3, 21);
  RegionMask m(40, 40);
  for (int y = 17; y < 23; ++y)
    for (int x = 17; x < 23; ++x) m.set(x, y, true);
  const PatchQuery q = PatchQuery::build(img, m, {17, 17}, 5);
  for (const MatchResult& r : {best_match_bruteforce(q, img, m), best_match_sea(q, img, m)}) {
    CHECK(r.ssd == 0.0);
    CHECK((r.center.x - 17) % 5 == 0);
    CHECK((r.center.y - 17) % 5 == 0);
  }
}

TEST_CASE("a single admissible candidate is returned") {
  std::mt19937_64 rng(22);
  const Raster img = support::random_raster(8, 5, 1, rng);
  // Columns 3.. unknown leaves centres (1, 1..3); the corner pixels knock out
  // all but (1, 2).
  RegionMask m(8, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 3; x < 8; ++x) m.set(x, y, true);
  m.set(0, 0, true);
  m.set(0, 4, true);
  REQUIRE(CandidateIndex(m, 3).count() == 1);
  const PatchQuery q = PatchQuery::build(img, m, {3, 2}, 3);
  CHECK(best_match_bruteforce(q, img, m).center == Point{1, 2});
  CHECK(best_match_sea(q, img, m).center == Point{1, 2});
}

TEST_CASE("no admissible candidate is an error") {
  const Raster img(6, 6, 1, 3.0);
  RegionMask m(6, 6);
  m.set(3, 3, true);
  const PatchQuery q = PatchQuery::build(img, m, {3, 3}, 5);
  CHECK_THROWS_AS(best_match_bruteforce(q, img, m), NoCandidateError);
  CHECK_THROWS_AS(best_match_sea(q, img, m), NoCandidateError);
  CHECK_THROWS_AS(PatchQuery::build(img, RegionMask(6, 6, true), {3, 3}, 5), std::invalid_argument);
}

TEST_CASE("brute force equals the exhaustive oracle on random 32x32 fixtures") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const Raster img = support::random_raster(32, 32, t % 2 ? 3 : 1, rng, t % 3 ? 255 : 4);
    const RegionMask m = support::random_rect_mask(32, 32, 3, 8, rng);
    const auto front = extract_front(m);
    const Point target = front[static_cast<std::size_t>(t * 7) % front.size()];
    const int ps = 3 + 2 * (t % 3);
    const auto oracle = support::oracle_best(img, m, target, ps);
    if (oracle.admissible == 0) continue;
    const PatchQuery q = PatchQuery::build(img, m, target, ps);
    const MatchResult r = best_match_bruteforce(q, img, m);
    REQUIRE(r.center == oracle.center);
    REQUIRE(r.ssd == oracle.ssd);
    REQUIRE(r.candidates_examined == oracle.admissible);
    REQUIRE(r.candidates_pruned == 0);
    const MatchResult s = serial::best_match_bruteforce(q, img, m);
    REQUIRE(s.center == oracle.center);
    REQUIRE(s.ssd == oracle.ssd);
  }
}

TEST_CASE("elimination search equals brute force over 200 random cases") {
  std::mt19937_64 rng(24);
  int done = 0;
  for (int t = 0; done < 200; ++t) {
    const Case c = random_case(rng);
    const CandidateIndex index(c.mask, c.patch);
    if (index.count() == 0) continue;
    const PatchQuery q = PatchQuery::build(c.image, c.mask, c.target, c.patch);
    const RowPrefixSums prefix(c.image);
    SearchOptions opt;
    opt.audit = true;
    if (t % 4 == 0) opt.window = restrict_window(c.target, 6, c.image.bounds());
    MatchResult brute, sea;
    bool brute_failed = false;
    try {
      brute = best_match_bruteforce(q, c.image, index, opt);
    } catch (const NoCandidateError&) {
      brute_failed = true;
    }
    if (brute_failed) {
      CHECK_THROWS_AS(best_match_sea(q, c.image, prefix, index, opt), NoCandidateError);
      continue;
    }
    sea = best_match_sea(q, c.image, prefix, index, opt);
    REQUIRE(sea.center == brute.center);
    REQUIRE(sea.ssd == brute.ssd);
    REQUIRE(sea.audit_violations == 0);
    REQUIRE(sea.candidates_examined + sea.candidates_pruned == brute.candidates_examined);
    ++done;
  }
}

TEST_CASE("lower bounds are sound and ordered") {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 60; ++t) {
    const Raster img = support::random_raster(24, 24, t % 2 ? 3 : 1, rng);
    const bool full = t % 3 == 0;
    const RegionMask m = full ? RegionMask(24, 24) : support::random_rect_mask(24, 24, 2, 6, rng);
    Point target{12, 12};
    if (!full) target = extract_front(m).front();
    const PatchQuery q = PatchQuery::build(img, m, target, 7);
    const RowPrefixSums prefix(img);
    const CandidateIndex index(m, 7);
    for (Point p : index.candidates()) {
      const double ssd = ssd_unchecked(q, p, img);
      const double run = run_lower_bound(q, p, prefix);
      const double block = block_lower_bound(q, p, prefix);
      REQUIRE(run <= ssd + 1e-9 * (1 + ssd));
      REQUIRE(block <= run + 1e-9 * (1 + run));
      if (full) {
        // Whole-patch form: (sum of differences)^2 / N per channel.
        double direct = 0.0;
        for (int c = 0; c < img.channels(); ++c) {
          double s = 0.0;
          for (int dy = -3; dy <= 3; ++dy)
            for (int dx = -3; dx <= 3; ++dx) s += img(target.x + dx, target.y + dy, c) - img(p.x + dx, p.y + dy, c);
          direct += s * s / 49.0;
        }
        REQUIRE(block == doctest::Approx(direct));
      }
    }
  }
}

TEST_CASE("pruned sets grow as the incumbent shrinks") {
  std::mt19937_64 rng(26);
  const Raster img = support::random_raster(40, 40, 3, rng);
  const RegionMask m = support::random_rect_mask(40, 40, 2, 8, rng);
  const Point target = extract_front(m).front();
  const PatchQuery q = PatchQuery::build(img, m, target, 5);
  const RowPrefixSums prefix(img);
  const CandidateIndex index(m, 5);
  const auto cands = index.candidates();
  std::set<std::size_t> previous;
  for (double best : {1e7, 3e5, 1e5, 3e4, 1e4, 3e3, 0.0}) {
    std::set<std::size_t> pruned;
    for (std::size_t i = 0; i < cands.size(); ++i)
      if (run_lower_bound(q, cands[i], prefix) > best) pruned.insert(i);
    REQUIRE(std::includes(pruned.begin(), pruned.end(), previous.begin(), previous.end()));
    previous = pruned;
  }
}

TEST_CASE("a candidate whose sum gap exceeds the incumbent is pruned") {
  // 5x5 fully valid target of value 100; candidate region of value 110 far
  // away, exact twin nearby.
  Raster img(30, 10, 1, 100.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 20; x < 30; ++x) img.set(x, y, 0, 110.0);
  const RegionMask none(30, 10);
  const PatchQuery q = PatchQuery::build(img, none, {4, 4}, 5);
  const RowPrefixSums prefix(img);
  // S = 25 * 10, N = 25: bound 2500 > 0.
  CHECK(block_lower_bound(q, {25, 5}, prefix) == doctest::Approx(250.0 * 250.0 / 25.0));
  const MatchResult r = best_match_sea(q, img, prefix, CandidateIndex(none, 5));
  CHECK(r.ssd == 0.0);
  CHECK(r.candidates_pruned > 0);
}

TEST_CASE("candidate index restrictions and updates") {
  std::mt19937_64 rng(27);
  const RegionMask m = support::random_rect_mask(30, 20, 3, 7, rng);
  std::vector<int> labels(600);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3) - 1;  // -1, 0, 1
  const CandidateIndex index(m, 5, labels);
  for (Point p : index.candidates(1)) CHECK(labels[static_cast<std::size_t>(p.y * 30 + p.x)] == 1);
  for (Point p : index.candidates()) CHECK(labels[static_cast<std::size_t>(p.y * 30 + p.x)] >= 0);
  CHECK(index.count() == index.count(0) + index.count(1));
  std::size_t oracle = 0;
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x)
      oracle += support::oracle_admissible(m, {x, y}, 5) && labels[static_cast<std::size_t>(y * 30 + x)] >= 0;
  CHECK(index.count() == oracle);

  // Filling part of the target admits new centres exactly as a rebuild would.
  RegionMask filled = m;
  const Rect box = m.bounding_box();
  const Rect changed{box.x, box.y, std::max(1, box.width / 2), box.height};
  for (int y = changed.y; y < changed.y + changed.height; ++y)
    for (int x = changed.x; x < changed.x + changed.width; ++x) filled.set(x, y, false);
  CandidateIndex updated = index;
  updated.admit_changed(filled, changed);
  const CandidateIndex rebuilt(filled, 5, labels);
  for (int label : {-1, 0, 1}) {
    const auto a = updated.candidates(label), b = rebuilt.candidates(label);
    REQUIRE(std::vector<Point>(a.begin(), a.end()) == std::vector<Point>(b.begin(), b.end()));
  }
}

TEST_CASE("search windows") {
  CHECK(restrict_window({200, 150}, 40, {0, 0, 400, 300}) == Rect{160, 110, 81, 81});
  CHECK(restrict_window({0, 0}, 40, {0, 0, 300, 400}) == Rect{0, 0, 41, 41});
  CHECK(restrict_window({10, 10}, 1000, {0, 0, 300, 400}) == Rect{0, 0, 300, 400});
  CHECK_THROWS(restrict_window({0, 0}, -1, {0, 0, 3, 3}));
}

TEST_CASE("repetitive image reaches zero SSD under elimination") {
  const Raster img = fixtures::periodic_tile(64, 64, 5, 1, 28);
  const RegionMask gap = fixtures::centered_square(64, 64, 20);
  for (Point p : extract_front(gap)) {
    const PatchQuery q = PatchQuery::build(img, gap, p, 9);
    REQUIRE(best_match_sea(q, img, gap).ssd == 0.0);
  }
}

TEST_CASE("results do not depend on the worker count") {
  std::mt19937_64 rng(29);
  const Raster img = support::random_raster(60, 50, 3, rng, 8);
  const RegionMask m = support::random_rect_mask(60, 50, 3, 10, rng);
  const CandidateIndex index(m, 7);
  const RowPrefixSums prefix(img);
  for (Point p : extract_front(m)) {
    const PatchQuery q = PatchQuery::build(img, m, p, 7);
    MatchResult one, many;
    {
      support::ThreadCount tc(1);
      one = best_match_sea(q, img, prefix, index);
    }
    {
      support::ThreadCount tc(4);
      many = best_match_sea(q, img, prefix, index);
    }
    REQUIRE(one.center == many.center);
    REQUIRE(one.ssd == many.ssd);
  }
}
