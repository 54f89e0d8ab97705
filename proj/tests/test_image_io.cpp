#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <string>

#include "patchfill/image_io.hpp"
#include "support.hpp"

using namespace patchfill;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::string error_of(const std::filesystem::path& p) {
  try {
    load_raster(p);
  } catch (const ImageIoError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("binary PGM decodes byte for byte") {
  support::TempDir dir;
  write_bytes(dir / "a.pgm", std::string("P5\n2 2\n255\n") + std::string("\x00\x80\xff\x40", 4));
  const Raster r = load_raster(dir / "a.pgm");
  CHECK(r.channels() == 1);
  CHECK(r.width() == 2);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{0, 128, 255, 64});
}

TEST_CASE("binary PPM with comments decodes") {
  support::TempDir dir;
  write_bytes(dir / "a.ppm", std::string("P6\n# comment\n1 1\n255\n") + std::string("\x0a\x14\x1e", 3));
  const Raster r = load_raster(dir / "a.ppm");
  CHECK(r.channels() == 3);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{10, 20, 30});
}

TEST_CASE("malformed inputs are reported") {
  support::TempDir dir;
  write_bytes(dir / "trunc.pgm", "P5\n2 ");
  CHECK(error_of(dir / "trunc.pgm").find("unsupported/corrupt format") != std::string::npos);
  write_bytes(dir / "short.pgm", std::string("P5\n2 2\n255\n") + std::string("\x01\x02", 2));
  CHECK(error_of(dir / "short.pgm").find("unsupported/corrupt format") != std::string::npos);
  write_bytes(dir / "zero.pgm", "P5\n0 4\n255\n");
  CHECK(error_of(dir / "zero.pgm").find("zero-dimension") != std::string::npos);
  write_bytes(dir / "deep.pgm", "P5\n1 1\n65535\n\x01\x02");
  CHECK(error_of(dir / "deep.pgm").find("bit depth") != std::string::npos);
  write_bytes(dir / "junk.png", "\x89PNG\r\n\x1a\nnot really");
  CHECK(error_of(dir / "junk.png").find("unsupported/corrupt format") != std::string::npos);
  write_bytes(dir / "text.txt", "hello");
  CHECK_FALSE(error_of(dir / "text.txt").empty());
  CHECK_THROWS_AS(load_raster(dir / "missing.png"), ImageIoError);
}

TEST_CASE("integer rasters survive a save/load round trip in every format") {
  support::TempDir dir;
  std::mt19937_64 rng(3);
  const Raster gray = support::random_raster(8, 8, 1, rng);
  const Raster rgb = support::random_raster(7, 5, 3, rng);
  for (const char* name : {"g.pgm", "g.png"}) {
    save_raster(gray, dir / name);
    CHECK(load_raster(dir / name) == gray);
  }
  for (const char* name : {"c.ppm", "c.png"}) {
    save_raster(rgb, dir / name);
    CHECK(load_raster(dir / name) == rgb);
  }
}

TEST_CASE("save rules") {
  support::TempDir dir;
  const Raster rgb(2, 2, 3, 1.0);
  try {
    save_raster(rgb, dir / "x.pgm");
    FAIL("expected an error");
  } catch (const ImageIoError& e) {
    CHECK(std::string(e.what()).find("channel mismatch for format") != std::string::npos);
  }
  Raster r(1, 1, 1, std::vector<double>{254.6});
  save_raster(r, dir / "r.pgm");
  CHECK(load_raster(dir / "r.pgm")(0, 0) == 255.0);
  CHECK_THROWS_AS(save_raster(r, dir / "r.bmp"), ImageIoError);
}

TEST_CASE("mask files: any nonzero channel marks the pixel") {
  support::TempDir dir;
  Raster m(3, 1, 3, std::vector<double>{0, 0, 0, 0, 1, 0, 255, 255, 255});
  save_raster(m, dir / "m.png");
  const RegionMask mask = load_mask(dir / "m.png");
  CHECK_FALSE(mask(0, 0));
  CHECK(mask(1, 0));
  CHECK(mask(2, 0));
  save_mask(mask, dir / "back.pgm");
  CHECK(load_mask(dir / "back.pgm") == mask);
}
