#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace affectlab {

// 8-bit interleaved RGB raster, row-major, row 0 at the top.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* at(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }

  bool operator==(const RgbImage&) const = default;
};

inline constexpr int kEmbeddingImageSize = 224;

void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png(const std::filesystem::path& path);

// Bilinear resampling with pixel-center alignment (source coordinate
// (x + 0.5) * sx - 0.5, clamped at the border).
RgbImage resize_bilinear(const RgbImage& src, int width, int height);

struct Rgb {
  std::uint8_t r, g, b;
};

// 64-entry Parula table, linear interpolation between entries; t clamped to [0, 1].
Rgb parula(double t);

}  // namespace affectlab
