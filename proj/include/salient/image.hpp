#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace salient {

/// Grayscale raster with float intensities, row-major. Pixel (i, j) covers
/// the continuous square [i, i+1) x [j, j+1), so its center is (i+0.5, j+0.5).
class Image {
 public:
  Image() = default;
  Image(int width, int height, float fill = 0.0f);
  Image(int width, int height, std::vector<float> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::span<const float> pixels() const noexcept { return pixels_; }
  std::span<float> pixels() noexcept { return pixels_; }

  float& operator()(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  float operator()(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> pixels_;
};

/// Bilinear sample at continuous coordinates (x, y). Returns false when the
/// point lies outside the span of pixel centers.
bool sample_bilinear(const Image& img, double x, double y, float& out);

/// 2x2 box-filter reduction; odd trailing rows/columns are dropped.
Image downsample2(const Image& img);

/// Binary PGM (P5, maxval 255); intensities are clamped to [0, 1].
void write_pgm(const Image& img, const std::filesystem::path& path);
/// Reads binary PGM with maxval up to 65535, scaled to [0, 1].
Image read_pgm(const std::filesystem::path& path);
/// 8-bit grayscale PNG.
void write_png(const Image& img, const std::filesystem::path& path);

/// Chooses PNG or PGM from the file extension.
void write_image(const Image& img, const std::filesystem::path& path);

}  // namespace salient
