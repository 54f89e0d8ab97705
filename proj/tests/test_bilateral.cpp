#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "patchfill/bilateral.hpp"
#include "patchfill/serial.hpp"
#include "support.hpp"

using namespace patchfill;

namespace {

// Textbook normalised form, sum I f g / sum f g, one pixel at a time.
double oracle_value(const Raster& img, int px, int py, int c, const BilateralParams& p, const RegionMask* ignore) {
  double num = 0.0, den = 0.0;
  for (int qy = py - p.radius; qy <= py + p.radius; ++qy)
    for (int qx = px - p.radius; qx <= px + p.radius; ++qx) {
      if (qx < 0 || qy < 0 || qx >= img.width() || qy >= img.height()) continue;
      if (ignore && (*ignore)(qx, qy)) continue;
      const double d2 = (qx - px) * (qx - px) + (qy - py) * (qy - py);
      double r2 = 0.0;
      for (int k = 0; k < img.channels(); ++k) {
        const double d = img(px, py, k) - img(qx, qy, k);
        r2 += d * d;
      }
      const double w = std::exp(-d2 / (2 * p.sigma_spatial * p.sigma_spatial)) *
                       std::exp(-r2 / (2 * p.sigma_range * p.sigma_range));
      num += w * img(qx, qy, c);
      den += w;
    }
  return num / den;
}

void check_against_oracle(const Raster& img, const BilateralParams& p, const RegionMask* ignore = nullptr) {
  const Raster out = bilateral_filter(img, p, ignore);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        if (ignore && (*ignore)(x, y)) {
          REQUIRE(out(x, y, c) == img(x, y, c));
          continue;
        }
        const double expected = oracle_value(img, x, y, c, p, ignore);
        REQUIRE(std::abs(out(x, y, c) - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
      }
}

}  // namespace

TEST_CASE("constant images are fixed points") {
  for (double v : {0.0, 17.25, 128.0, 255.0}) {
    const Raster img(13, 9, 3, v);
    CHECK(bilateral_filter(img, {}) == img);
    CHECK(bilateral_filter(img, BilateralParams::from_sigmas(0.7, 2.0)) == img);
  }
}

TEST_CASE("random fixtures match the direct double loop") {
  std::mt19937_64 rng(30);
  for (int t = 0; t < 10; ++t) {
    const Raster img = support::random_raster(16, 16, t % 2 ? 3 : 1, rng);
    check_against_oracle(img, {3.0, 30.0, 2});
    check_against_oracle(img, BilateralParams::from_sigmas(1.5, 60.0));
  }
}

TEST_CASE("ignored pixels neither contribute nor change") {
  std::mt19937_64 rng(31);
  const Raster img = support::random_raster(16, 16, 3, rng);
  const RegionMask ignore = support::random_mask(16, 16, 0.3, rng);
  check_against_oracle(img, {2.0, 40.0, 3}, &ignore);
}

TEST_CASE("a vanishing range sigma approaches the identity") {
  std::mt19937_64 rng(32);
  const Raster img = support::random_raster(16, 16, 1, rng);
  const Raster out = bilateral_filter(img, {3.0, 1e-3, 4});
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) REQUIRE(out(x, y) == doctest::Approx(img(x, y)).epsilon(1e-9));
}

TEST_CASE("parallel and serial filters agree") {
  std::mt19937_64 rng(33);
  const Raster img = support::random_raster(40, 30, 3, rng);
  const RegionMask ignore = support::random_mask(40, 30, 0.2, rng);
  const BilateralParams p{};
  for (const RegionMask* mask : {static_cast<const RegionMask*>(nullptr), &ignore}) {
    const Raster a = bilateral_filter(img, p, mask), b = serial::bilateral_filter(img, p, mask);
    for (std::size_t i = 0; i < a.data().size(); ++i) REQUIRE(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("output does not depend on the worker count") {
  std::mt19937_64 rng(34);
  const Raster img = support::random_raster(40, 30, 3, rng);
  Raster one, many;
  {
    support::ThreadCount tc(1);
    one = bilateral_filter(img, {});
  }
  {
    support::ThreadCount tc(4);
    many = bilateral_filter(img, {});
  }
  CHECK(one == many);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS(validate(BilateralParams{0.0, 30.0, 3}));
  CHECK_THROWS(validate(BilateralParams{3.0, -1.0, 3}));
  CHECK_THROWS(validate(BilateralParams{3.0, 30.0, -1}));
  CHECK(BilateralParams::from_sigmas(3.0, 30.0).radius == 9);
}
