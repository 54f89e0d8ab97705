#include "patchfill/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace patchfill {

namespace {

using Bytes = std::vector<unsigned char>;

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageIoError("write failed for " + path.string());
}

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
}

// --- Netpbm ---------------------------------------------------------------

class NetpbmHeaderReader {
 public:
  explicit NetpbmHeaderReader(const Bytes& bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw ImageIoError("unsupported/corrupt format: bad netpbm header");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1 << 24) throw ImageIoError("unsupported/corrupt format: header value too large");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw ImageIoError("unsupported/corrupt format: truncated netpbm header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const Bytes& bytes_;
  std::size_t pos_ = 2;
};

Raster decode_netpbm(const Bytes& bytes) {
  const int channels = bytes[1] == '5' ? 1 : 3;
  NetpbmHeaderReader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width == 0 || height == 0) throw ImageIoError("zero-dimension image");
  if (maxval > 255) throw ImageIoError("unsupported bit depth: 16-bit netpbm");
  if (maxval != 255) throw ImageIoError("unsupported/corrupt format: maxval must be 255");
  const std::size_t offset = header.raster_offset();
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                        static_cast<std::size_t>(channels);
  if (bytes.size() < offset + n) throw ImageIoError("unsupported/corrupt format: truncated raster");
  std::vector<double> data(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                           bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
  return Raster(width, height, channels, std::move(data));
}

Bytes encode_netpbm(const Raster& raster) {
  const std::string header = std::string(raster.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(raster.width()) + " " +
                             std::to_string(raster.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + raster.data().size());
  for (double v : raster.data()) out.push_back(quantize(v));
  return out;
}

// --- PNG ------------------------------------------------------------------
//
// libpng reports errors by longjmp. Every setjmp below lives in a function
// whose frame holds only trivially destructible locals.

struct PngContext {
  const Bytes* input = nullptr;
  std::size_t pos = 0;
  Bytes* output = nullptr;
  char message[256] = "png error";
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  if (ctx->pos + count > ctx->input->size()) png_error(png, "truncated png");
  std::copy_n(ctx->input->data() + ctx->pos, count, out);
  ctx->pos += count;
}

void png_write_to_memory(png_structp png, png_bytep in, png_size_t count) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  ctx->output->insert(ctx->output->end(), in, in + count);
}

void png_flush_noop(png_structp) {}

void png_record_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof ctx->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warn_quiet(png_structp, png_const_charp) {}

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
  int color = 0;
  int channels = 0;
  std::size_t row_bytes = 0;
};

bool png_read_header(png_structp png, png_infop info, PngHeader* header) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->depth = png_get_bit_depth(png, info);
  header->color = png_get_color_type(png, info);
  if (header->depth > 8 || (header->color & PNG_COLOR_MASK_ALPHA)) return true;
  if (header->color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (header->color == PNG_COLOR_TYPE_GRAY && header->depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  header->channels = png_get_channels(png, info);
  header->row_bytes = png_get_rowbytes(png, info);
  return true;
}

bool png_read_rows(png_structp png, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  return true;
}

bool png_write_all(png_structp png, png_infop info, int width, int height, int color,
                   png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

Raster decode_png(const Bytes& bytes) {
  PngContext ctx;
  ctx.input = &bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_record_error, png_warn_quiet);
  if (!png) throw ImageIoError("png init failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  png_set_read_fn(png, &ctx, png_read_from_memory);

  PngHeader header;
  if (!png_read_header(png, info, &header))
    throw ImageIoError(std::string("unsupported/corrupt format: ") + ctx.message);
  if (header.width == 0 || header.height == 0) throw ImageIoError("zero-dimension image");
  if (header.depth > 8) throw ImageIoError("unsupported bit depth: 16-bit png");
  if (header.color & PNG_COLOR_MASK_ALPHA) throw ImageIoError("unsupported format: png alpha channel");
  if (header.channels != 1 && header.channels != 3)
    throw ImageIoError("unsupported format: png channel layout");

  Bytes pixels(header.row_bytes * header.height);
  std::vector<png_bytep> rows(header.height);
  for (png_uint_32 y = 0; y < header.height; ++y) rows[y] = pixels.data() + y * header.row_bytes;
  if (!png_read_rows(png, rows.data()))
    throw ImageIoError(std::string("unsupported/corrupt format: ") + ctx.message);

  const std::size_t row_len = static_cast<std::size_t>(header.width) * static_cast<std::size_t>(header.channels);
  std::vector<double> data;
  data.reserve(row_len * header.height);
  for (png_uint_32 y = 0; y < header.height; ++y) data.insert(data.end(), rows[y], rows[y] + row_len);
  return Raster(static_cast<int>(header.width), static_cast<int>(header.height), header.channels,
                std::move(data));
}

Bytes encode_png(const Raster& raster) {
  Bytes out;
  PngContext ctx;
  ctx.output = &out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_record_error, png_warn_quiet);
  if (!png) throw ImageIoError("png init failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  png_set_write_fn(png, &ctx, png_write_to_memory, png_flush_noop);

  const std::size_t row_len = static_cast<std::size_t>(raster.width()) *
                              static_cast<std::size_t>(raster.channels());
  Bytes pixels(row_len * static_cast<std::size_t>(raster.height()));
  std::transform(raster.data().begin(), raster.data().end(), pixels.begin(), quantize);
  std::vector<png_bytep> rows(static_cast<std::size_t>(raster.height()));
  for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = pixels.data() + y * row_len;
  if (!png_write_all(png, info, raster.width(), raster.height(),
                     raster.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, rows.data()))
    throw ImageIoError(std::string("png encode failed: ") + ctx.message);
  return out;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

}  // namespace

Raster load_raster(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  static constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin()))
    return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_netpbm(bytes);
  throw ImageIoError("unsupported/corrupt format: " + path.string());
}

void save_raster(const Raster& raster, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_file(path, encode_png(raster));
  } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm" && raster.channels() != 1) || (ext == ".ppm" && raster.channels() != 3))
      throw ImageIoError("channel mismatch for format " + ext);
    write_file(path, encode_netpbm(raster));
  } else {
    throw ImageIoError("unsupported output format: " + path.string());
  }
}

RegionMask load_mask(const std::filesystem::path& path) {
  const Raster raster = load_raster(path);
  RegionMask mask(raster.width(), raster.height());
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x) {
      const double* px = raster.pixel(x, y);
      if (std::any_of(px, px + raster.channels(), [](double v) { return v != 0.0; }))
        mask.set(x, y, true);
    }
  return mask;
}

void save_mask(const RegionMask& mask, const std::filesystem::path& path) {
  Raster raster(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) raster.set(x, y, 0, kMaxIntensity);
  save_raster(raster, path);
}

}  // namespace patchfill
