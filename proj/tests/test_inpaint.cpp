#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>

#include "patchfill/energy.hpp"
#include "patchfill/fixtures.hpp"
#include "patchfill/inpaint.hpp"
#include "support.hpp"

using namespace patchfill;

namespace {

// Replays the audit log: every pixel a step claims must equal the exemplar
// pixel at the same offset, and exemplars must sit in the original source.
void check_verbatim(const Raster& original, const RegionMask& omega, const InpaintResult& r, int ps) {
  RegionMask remaining = omega;
  const int h = ps / 2;
  REQUIRE(r.report.steps.size() == r.report.iterations);
  for (const FillStep& s : r.report.steps) {
    REQUIRE(support::oracle_admissible(omega, s.source, ps));
    int filled = 0;
    for (int dy = -h; dy <= h; ++dy)
      for (int dx = -h; dx <= h; ++dx) {
        const int x = s.target.x + dx, y = s.target.y + dy;
        if (x < 0 || y < 0 || x >= omega.width() || y >= omega.height() || !remaining(x, y)) continue;
        for (int c = 0; c < original.channels(); ++c)
          REQUIRE(r.image(x, y, c) == original(s.source.x + dx, s.source.y + dy, c));
        remaining.set(x, y, false);
        ++filled;
      }
    REQUIRE(filled == s.filled);
    REQUIRE(filled > 0);
  }
  REQUIRE(remaining.empty());
  for (int y = 0; y < omega.height(); ++y)
    for (int x = 0; x < omega.width(); ++x)
      if (!omega(x, y))
        for (int c = 0; c < original.channels(); ++c) REQUIRE(r.image(x, y, c) == original(x, y, c));
}

}  // namespace

TEST_CASE("empty mask returns the input untouched") {
  std::mt19937_64 rng(50);
  const Raster img = support::random_raster(20, 20, 3, rng);
  const InpaintResult r = inpaint(img, RegionMask(20, 20));
  CHECK(r.image == img);
  CHECK(r.report.iterations == 0);
}

TEST_CASE("a single missing pixel in a constant image takes the constant") {
  Raster img(15, 15, 1, 42.0);
  img.set(7, 7, 0, 255.0);
  RegionMask m(15, 15);
  m.set(7, 7, true);
  InpaintParams p;
  p.patch_size = 5;
  const InpaintResult r = inpaint(img, m, p);
  CHECK(r.image == Raster(15, 15, 1, 42.0));
  CHECK(r.report.iterations == 1);
}

TEST_CASE("periodic texture with a 20x20 gap is restored exactly") {
  const Raster original = fixtures::periodic_tile(64, 64, 5, 3, 51);
  const RegionMask gap = fixtures::centered_square(64, 64, 20);
  Raster damaged = original;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (gap(x, y))
        for (int c = 0; c < 3; ++c) damaged.set(x, y, c, 255.0);
  double best = std::numeric_limits<double>::infinity();
  for (int ps : {5, 9}) {
    InpaintParams p;
    p.patch_size = ps;
    const InpaintResult r = inpaint(damaged, gap, p);
    const double e = global_patch_energy(r.image, gap, ps);
    MESSAGE("patch " << ps << ": exact " << (r.image == original) << ", energy " << e);
    if (ps == 5) {
      CHECK(r.image == original);
      CHECK(e == 0.0);
    }
    best = std::min(best, e);
  }
  CHECK(best == 0.0);
}

TEST_CASE("update_confidence") {
  RegionMask m(4, 4, true);
  ConfidenceField c(m);
  const std::vector<Point> three{{0, 0}, {1, 2}, {3, 3}};
  update_confidence(c, three, 0.7);
  CHECK(c(0, 0) == 0.7);
  CHECK(c(1, 2) == 0.7);
  CHECK(c(3, 3) == 0.7);
  CHECK(c(2, 2) == 0.0);
  const ConfidenceField before = c;
  update_confidence(c, {}, 0.3);
  CHECK(std::equal(c.values().begin(), c.values().end(), before.values().begin()));
  CHECK_THROWS(update_confidence(c, three, 1.2));
}

TEST_CASE("parameter validation") {
  InpaintParams p;
  p.patch_size = 8;
  try {
    validate(p);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("patch size must be odd") != std::string::npos);
  }
  p.patch_size = 3;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p.patch_size = 9;
  p.search_radius = 4;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p.search_radius = 9;
  CHECK_NOTHROW(validate(p));
  CHECK_THROWS(inpaint(Raster(10, 10, 1), RegionMask(9, 10), InpaintParams{}));
}

TEST_CASE("an unfillable region names a front pixel") {
  const Raster img(7, 7, 1, 10.0);
  RegionMask m(7, 7);
  m.set(3, 3, true);
  InpaintParams p;
  p.patch_size = 5;
  try {
    inpaint(img, m, p);
    FAIL("expected an error");
  } catch (const UnfillableError& e) {
    CHECK(e.front_pixel() == Point{3, 3});
  }
}

TEST_CASE("engine invariants on random pairs") {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 25; ++t) {
    const Raster img = support::random_raster(36, 30, t % 2 ? 3 : 1, rng, t % 3 ? 255 : 4);
    const RegionMask m = support::random_rect_mask(36, 30, 3, 7, rng);
    InpaintParams p;
    p.patch_size = 5;
    p.record_audit = true;
    if (t % 5 == 0) p.search_radius = 8;
    const InpaintResult sea = inpaint(img, m, p);
    REQUIRE(sea.report.iterations <= m.count());
    check_verbatim(img, m, sea, 5);
    for (double v : sea.confidence.values()) REQUIRE((v >= 0.0 && v <= 1.0));
    for (const FillStep& s : sea.report.steps) REQUIRE((s.confidence >= 0.0 && s.confidence <= 1.0));
    p.use_sea = false;
    const InpaintResult brute = inpaint(img, m, p);
    REQUIRE(brute.image == sea.image);
    REQUIRE(brute.report.pruned == 0);
  }
}

TEST_CASE("confidence never exceeds one across sequential fills") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 10; ++t) {
    const Raster img = support::random_raster(30, 30, 1, rng);
    const RegionMask m = support::random_mask(30, 30, 0.05, rng);
    InpaintParams p;
    p.patch_size = 5;
    p.record_audit = true;
    const InpaintResult r = inpaint(img, m, p);
    for (const FillStep& s : r.report.steps) REQUIRE(s.confidence <= 1.0);
    for (double v : r.confidence.values()) REQUIRE(v <= 1.0);
  }
}

TEST_CASE("output does not depend on the worker count") {
  const Raster img = fixtures::two_texture(80, 60, 54);
  const RegionMask m = fixtures::blob_mask(80, 60, 0.08, 4, 55);
  InpaintResult one, many;
  {
    support::ThreadCount tc(1);
    one = inpaint(img, m);
  }
  {
    support::ThreadCount tc(4);
    many = inpaint(img, m);
  }
  CHECK(one.image == many.image);
  CHECK(one.report.examined == many.report.examined);
}

TEST_CASE("a bilateral guide still copies original pixels") {
  std::mt19937_64 rng(56);
  const Raster img = support::random_raster(32, 32, 3, rng);
  const RegionMask m = support::random_rect_mask(32, 32, 2, 6, rng);
  InpaintParams p;
  p.patch_size = 5;
  p.record_audit = true;
  p.bilateral = BilateralParams::from_sigmas(1.0, 20.0);
  check_verbatim(img, m, inpaint(img, m, p), 5);
}

TEST_CASE("filled pixels may serve as sources when allowed") {
  std::mt19937_64 rng(57);
  const Raster img = support::random_raster(40, 24, 1, rng);
  const RegionMask m = support::random_rect_mask(40, 24, 4, 8, rng);
  InpaintParams p;
  p.patch_size = 5;
  p.allow_filled_sources = true;
  const InpaintResult r = inpaint(img, m, p);
  CHECK(r.report.iterations <= m.count());
  for (double v : r.confidence.values()) CHECK((v >= 0.0 && v <= 1.0));
  p.use_sea = false;
  CHECK(inpaint(img, m, p).image == r.image);
}

TEST_CASE("label restriction and fallback") {
  // Left half dark, right half bright; the hole sits in the bright half.
  Raster img(40, 20, 1);
  std::mt19937_64 rng(58);
  std::uniform_int_distribution<int> noise(0, 9);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 40; ++x) img.set(x, y, 0, (x < 20 ? 30 : 200) + noise(rng));
  RegionMask m(40, 20);
  for (int y = 8; y < 12; ++y)
    for (int x = 28; x < 32; ++x) m.set(x, y, true);
  InpaintParams p;
  p.patch_size = 5;
  p.record_audit = true;
  p.source_labels.assign(800, 0);
  p.target_labels.assign(800, 0);
  for (int y = 0; y < 20; ++y)
    for (int x = 20; x < 40; ++x) p.source_labels[static_cast<std::size_t>(y * 40 + x)] = 1;
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 40; ++x) p.target_labels[static_cast<std::size_t>(y * 40 + x)] = 0;
  // Targets routed to the dark class copy from the dark half only.
  const InpaintResult dark = inpaint(img, m, p);
  for (const FillStep& s : dark.report.steps) CHECK(s.source.x < 20);
  CHECK(dark.report.label_fallbacks == 0);

  // A class with no admissible centre falls back to the full search.
  std::fill(p.target_labels.begin(), p.target_labels.end(), 5);
  const InpaintResult fallback = inpaint(img, m, p);
  CHECK(fallback.report.label_fallbacks > 0);
  p.source_labels.clear();
  p.target_labels.clear();
  CHECK(fallback.image == inpaint(img, m, p).image);
}

TEST_CASE("report formats") {
  FillReport r;
  r.iterations = 3;
  r.examined = 10;
  r.pruned = 4;
  r.seconds = 0.5;
  CHECK(FillReport::csv_header() == "iterations,examined,pruned,seconds,energy");
  CHECK(r.to_csv_row().rfind("3,10,4,", 0) == 0);
  CHECK(r.to_key_value().find("iterations=3\n") != std::string::npos);
  CHECK(r.to_key_value().find("energy=\n") != std::string::npos);
  r.energy = 12.0;
  CHECK(r.to_key_value().find("energy=12\n") != std::string::npos);
}
