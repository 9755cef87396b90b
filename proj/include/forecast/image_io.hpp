#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace forecast {

// Row-major interleaved raster with real-valued channels in [0, 1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, double fill = 0.0)
      : width(w), height(h), channels(c), data(w * h * c, fill) {}

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data[(row * width + col) * channels + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data[(row * width + col) * channels + ch];
  }
};

// 8-bit image as stored on disk (PGM: 1 channel, PPM: 3 channels).
struct ByteImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> data;
};

// Binary P6, maxval 255. Channels are normalized by 255.
Image read_ppm(const std::filesystem::path& path);
std::string encode_ppm(const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

std::string encode_pnm(const ByteImage& image);
ByteImage decode_pnm(const std::string& bytes);
ByteImage read_pnm(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace forecast
