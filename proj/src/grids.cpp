#include "salient/grids.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "salient/error.hpp"

namespace salient {
namespace {

void check_dims(int width, int height, std::size_t n_values, int channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw Error(ErrorCode::DimensionMismatch, "grid dimensions must be positive");
  }
  if (static_cast<std::size_t>(width) * height * channels != n_values) {
    throw Error(ErrorCode::DimensionMismatch, "value count does not match width*height*channels");
  }
}

void check_finite(std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "grid contains a non-finite value");
  }
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  return bytes;
}

void write_bytes(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace

SaliencyGrid::SaliencyGrid(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height, values_.size(), 1);
  if (width < 3 || height < 3) throw Error(ErrorCode::DimensionMismatch, "saliency grid must be at least 3x3");
  check_finite(values_);
  for (float v : values_) {
    if (v < 0.0f || v > 1.0f) throw Error(ErrorCode::OutOfRange, "saliency values must lie in [0, 1]");
  }
}

SaliencyGrid::SaliencyGrid(int width, int height)
    : SaliencyGrid(width, height,
                   std::vector<float>(width > 0 && height > 0 ? static_cast<std::size_t>(width) * height : 0)) {}

FeatureGrid::FeatureGrid(int width, int height, int channels, std::vector<float> values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
  check_dims(width, height, values_.size(), channels);
  check_finite(values_);
}

ImageMeta ImageMeta::from_sizes(std::string id, int pixel_width, int pixel_height, int grid_width,
                                int grid_height) {
  if (pixel_width <= 0 || pixel_height <= 0 || grid_width <= 0 || grid_height <= 0) {
    throw Error(ErrorCode::OutOfRange, "image and grid sizes must be positive");
  }
  return ImageMeta{std::move(id), pixel_width, pixel_height,
                   static_cast<double>(pixel_width) / grid_width,
                   static_cast<double>(pixel_height) / grid_height};
}

std::string_view to_string(Plane plane) { return plane == Plane::TV ? "TV" : "TC"; }

Plane parse_plane(std::string_view text) {
  if (text == "TV" || text == "tv") return Plane::TV;
  if (text == "TC" || text == "tc") return Plane::TC;
  throw Error(ErrorCode::ParseError, "unknown plane '" + std::string(text) + "'");
}

void AnnotationSet::validate() const {
  if (!(hc.b > 0.0) || !(hc.a >= hc.b)) {
    throw Error(ErrorCode::OutOfRange, "HC ellipse of " + image_id + " must satisfy a >= b > 0");
  }
}

std::vector<unsigned char> encode_grid(int width, int height, int channels, std::span<const float> values) {
  check_dims(width, height, values.size(), channels);
  std::vector<unsigned char> out;
  out.reserve(kGridHeaderBytes + values.size() * 4);
  out.insert(out.end(), std::begin(kGridMagic), std::end(kGridMagic));
  put_u32(out, static_cast<std::uint32_t>(width));
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u32(out, static_cast<std::uint32_t>(channels));
  for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

AnyGrid decode_grid(std::span<const unsigned char> bytes, bool force_features) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kGridMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "missing SLGD magic");
  }
  if (bytes.size() < kGridHeaderBytes) throw Error(ErrorCode::DimensionMismatch, "truncated header");
  const std::uint64_t width = get_u32(bytes.data() + 4);
  const std::uint64_t height = get_u32(bytes.data() + 8);
  const std::uint64_t channels = get_u32(bytes.data() + 12);
  const std::uint64_t cells = width * height * channels;
  if (width == 0 || height == 0 || channels == 0 || width > INT32_MAX || height > INT32_MAX ||
      channels > INT32_MAX || (bytes.size() - kGridHeaderBytes) != cells * 4) {
    throw Error(ErrorCode::DimensionMismatch, "declared size does not match payload length");
  }
  std::vector<float> values(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes.data() + kGridHeaderBytes + 4 * i));
  }
  check_finite(values);
  const int w = static_cast<int>(width), h = static_cast<int>(height), c = static_cast<int>(channels);
  if (c == 1 && !force_features) return SaliencyGrid(w, h, std::move(values));
  return FeatureGrid(w, h, c, std::move(values));
}

AnyGrid read_grid(const std::filesystem::path& path) { return decode_grid(read_bytes(path)); }

SaliencyGrid read_saliency_grid(const std::filesystem::path& path) {
  auto grid = read_grid(path);
  if (auto* s = std::get_if<SaliencyGrid>(&grid)) return std::move(*s);
  throw Error(ErrorCode::DimensionMismatch, path.string() + " is not a single-channel saliency grid");
}

FeatureGrid read_feature_grid(const std::filesystem::path& path) {
  return std::get<FeatureGrid>(decode_grid(read_bytes(path), /*force_features=*/true));
}

void write_grid(const SaliencyGrid& grid, const std::filesystem::path& path) {
  write_bytes(encode_grid(grid.width(), grid.height(), 1, grid.values()), path);
}

void write_grid(const FeatureGrid& grid, const std::filesystem::path& path) {
  write_bytes(encode_grid(grid.width(), grid.height(), grid.channels(), grid.values()), path);
}

Point2 grid_to_pixel(Point2 cell, const ImageMeta& meta) {
  return {(cell.x + 0.5) * meta.scale_x, (cell.y + 0.5) * meta.scale_y};
}

Point2 pixel_to_grid(Point2 pixel, const ImageMeta& meta) {
  return {pixel.x / meta.scale_x - 0.5, pixel.y / meta.scale_y - 0.5};
}

}  // namespace salient
