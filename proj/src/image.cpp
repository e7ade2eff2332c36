#include "corridor_depth/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "corridor_depth/error.hpp"

namespace corridor {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  return f;
}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw Error(ErrorCode::io, std::string("libpng: ") + msg); }
void png_warn(png_structp, png_const_charp) {}

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> data;  // rows, big-endian for 16-bit samples
};

PngImage read_png(const std::string& path) {
  auto file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  PngImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  img.data.resize(stride * static_cast<std::size_t>(img.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int r = 0; r < img.height; ++r) rows[static_cast<std::size_t>(r)] = img.data.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return img;
}

void write_png_raw(const std::string& path, int width, int height, int color_type, int bit_depth,
                   const std::uint8_t* data, std::size_t stride) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) png_write_row(png, const_cast<png_bytep>(data + stride * r));
  png_write_end(png, nullptr);
}

// Netpbm header: magic, width, height, maxval with '#' comments.
GrayImage read_netpbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  const auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
      in >> std::ws;
    }
    int x = -1;
    in >> x;
    return x;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  in.get();
  if ((magic != "P5" && magic != "P6") || w <= 0 || h <= 0 || maxval != 255) {
    throw Error(ErrorCode::io, "'" + path + "' is not an 8-bit binary PGM/PPM");
  }
  const int channels = magic == "P5" ? 1 : 3;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw Error(ErrorCode::io, "'" + path + "' is truncated");
  GrayImage out({w, h});
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = channels == 1 ? raw[i] : luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
  }
  return out;
}

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in && png_sig_cmp(sig, 0, 8) == 0;
}

}  // namespace

GrayImage GrayImage::mirrored() const {
  GrayImage out(dims);
  for (int v = 0; v < dims.height; ++v) {
    for (int u = 0; u < dims.width; ++u) out.at(dims.width - 1 - u, v) = at(u, v);
  }
  return out;
}

RgbImage::RgbImage(const GrayImage& gray) : dims(gray.dims), pixels(gray.pixels.size() * 3) {
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) {
    pixels[3 * i] = pixels[3 * i + 1] = pixels[3 * i + 2] = gray.pixels[i];
  }
}

void RgbImage::set(int u, int v, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (u < 0 || v < 0 || u >= dims.width || v >= dims.height) return;
  const std::size_t i = 3 * (static_cast<std::size_t>(v) * dims.width + u);
  pixels[i] = r;
  pixels[i + 1] = g;
  pixels[i + 2] = b;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayImage read_gray_image(const std::string& path) {
  if (!has_png_signature(path)) return read_netpbm(path);
  const PngImage png = read_png(path);
  if (png.bit_depth != 8) throw Error(ErrorCode::io, "'" + path + "': only 8-bit images are accepted");
  GrayImage out({png.width, png.height});
  const int c = png.channels;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const std::uint8_t* p = png.data.data() + i * c;
    out.pixels[i] = c >= 3 ? luma(p[0], p[1], p[2]) : p[0];
  }
  return out;
}

void write_png(const std::string& path, const GrayImage& image) {
  write_png_raw(path, image.dims.width, image.dims.height, PNG_COLOR_TYPE_GRAY, 8, image.pixels.data(),
                static_cast<std::size_t>(image.dims.width));
}

void write_png(const std::string& path, const RgbImage& image) {
  write_png_raw(path, image.dims.width, image.dims.height, PNG_COLOR_TYPE_RGB, 8, image.pixels.data(),
                static_cast<std::size_t>(image.dims.width) * 3);
}

std::uint16_t encode_depth_mm(double depth_m) {
  if (!DepthMap::is_valid(depth_m)) return 0;
  const double mm = std::round(depth_m * 1000.0);
  return static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
}

void write_depth_png(const std::string& path, const DepthMap& depth) {
  std::vector<std::uint8_t> buf(depth.values.size() * 2);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const std::uint16_t mm = encode_depth_mm(depth.values[i]);
    buf[2 * i] = static_cast<std::uint8_t>(mm >> 8);
    buf[2 * i + 1] = static_cast<std::uint8_t>(mm & 0xff);
  }
  write_png_raw(path, depth.dims.width, depth.dims.height, PNG_COLOR_TYPE_GRAY, 16, buf.data(),
                static_cast<std::size_t>(depth.dims.width) * 2);
}

DepthMap read_depth_png(const std::string& path) {
  const PngImage png = read_png(path);
  if (png.bit_depth != 16 || png.channels != 1) {
    throw Error(ErrorCode::io, "'" + path + "' is not a 16-bit single-channel PNG");
  }
  DepthMap out({png.width, png.height});
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const unsigned mm = (static_cast<unsigned>(png.data[2 * i]) << 8) | png.data[2 * i + 1];
    out.values[i] = mm == 0 ? DepthMap::kInvalid : mm / 1000.0;
  }
  return out;
}

}  // namespace corridor
