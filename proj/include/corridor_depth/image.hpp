#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corridor_depth/scene_model.hpp"

namespace corridor {

/// 8-bit single channel image, row-major.
struct GrayImage {
  ImageDims dims{0, 0};
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(ImageDims d, std::uint8_t fill = 0) : dims(d), pixels(d.pixel_count(), fill) {}

  std::uint8_t& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * dims.width + u]; }
  std::uint8_t at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * dims.width + u]; }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < dims.width && v < dims.height; }

  GrayImage mirrored() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct RgbImage {
  ImageDims dims{0, 0};
  std::vector<std::uint8_t> pixels;  // interleaved RGB

  RgbImage() = default;
  explicit RgbImage(const GrayImage& gray);

  void set(int u, int v, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

/// Integer luma: (299 R + 587 G + 114 B + 500) / 1000.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// PNG (8-bit gray, gray+alpha, RGB, RGBA) or binary PGM/PPM, converted to gray.
GrayImage read_gray_image(const std::string& path);

void write_png(const std::string& path, const GrayImage& image);
void write_png(const std::string& path, const RgbImage& image);

/// Depth in millimetres as a 16-bit single-channel PNG, 0 = invalid.
void write_depth_png(const std::string& path, const DepthMap& depth);
DepthMap read_depth_png(const std::string& path);

std::uint16_t encode_depth_mm(double depth_m);

}  // namespace corridor
