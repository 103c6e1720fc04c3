#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "salient/geometry.hpp"

namespace salient {

/// Dense saliency field, row-major, values in [0, 1]. At least 3x3.
class SaliencyGrid {
 public:
  SaliencyGrid(int width, int height, std::vector<float> values);
  /// Zero-filled grid.
  SaliencyGrid(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const float> values() const noexcept { return values_; }

  float at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  float at(Cell c) const { return at(c.x, c.y); }
  bool contains(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  friend bool operator==(const SaliencyGrid&, const SaliencyGrid&) = default;

 private:
  int width_;
  int height_;
  std::vector<float> values_;
};

/// Per-cell feature vectors, row-major with channels interleaved.
class FeatureGrid {
 public:
  FeatureGrid(int width, int height, int channels, std::vector<float> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::span<const float> values() const noexcept { return values_; }

  std::span<const float> at(int x, int y) const {
    return std::span<const float>(values_).subspan(
        (static_cast<std::size_t>(y) * width_ + x) * channels_, channels_);
  }

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<float> values_;
};

using AnyGrid = std::variant<SaliencyGrid, FeatureGrid>;

/// Image size and the cell -> pixel scale of its grids.
struct ImageMeta {
  std::string image_id;
  int pixel_width = 0;
  int pixel_height = 0;
  double scale_x = 1.0;
  double scale_y = 1.0;

  /// Derives scales from the image and grid sizes.
  static ImageMeta from_sizes(std::string id, int pixel_width, int pixel_height, int grid_width,
                              int grid_height);
};

enum class Plane { TV, TC };

std::string_view to_string(Plane plane);
Plane parse_plane(std::string_view text);

struct Segment {
  Point2 a;
  Point2 b;

  Point2 midpoint() const { return 0.5 * (a + b); }
};

struct Ellipse {
  Point2 center;
  double a = 1.0;  ///< semi-major
  double b = 1.0;  ///< semi-minor
  double theta = 0.0;
};

/// Ground-truth structures of one image, in pixels.
struct AnnotationSet {
  std::string image_id;
  Point2 csp_center;
  Segment segment;  ///< LV (TV plane) or TCD (TC plane)
  Ellipse hc;
  Plane plane = Plane::TV;

  double hc_long_axis() const { return 2.0 * hc.a; }
  /// Throws OutOfRange unless a >= b > 0.
  void validate() const;
};

inline constexpr char kGridMagic[4] = {'S', 'L', 'G', 'D'};
inline constexpr std::size_t kGridHeaderBytes = 16;

/// Decodes a grid file. One channel decodes as SaliencyGrid.
AnyGrid read_grid(const std::filesystem::path& path);
SaliencyGrid read_saliency_grid(const std::filesystem::path& path);
/// Accepts any channel count, including one.
FeatureGrid read_feature_grid(const std::filesystem::path& path);

void write_grid(const SaliencyGrid& grid, const std::filesystem::path& path);
void write_grid(const FeatureGrid& grid, const std::filesystem::path& path);

/// Encoded byte form, as written by write_grid.
std::vector<unsigned char> encode_grid(int width, int height, int channels, std::span<const float> values);
AnyGrid decode_grid(std::span<const unsigned char> bytes, bool force_features = false);

/// Maps a (sub)cell position to the pixel position at the center of its
/// receptive block.
Point2 grid_to_pixel(Point2 cell, const ImageMeta& meta);
Point2 pixel_to_grid(Point2 pixel, const ImageMeta& meta);

}  // namespace salient
