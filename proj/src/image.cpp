#include "salient/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "salient/error.hpp"

namespace salient {

Image::Image(int width, int height, float fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height, fill) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::BadParams, "image size must be positive");
}

Image::Image(int width, int height, std::vector<float> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0 || pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::DimensionMismatch, "pixel buffer does not match image size");
  }
}

bool sample_bilinear(const Image& img, double x, double y, float& out) {
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const int w = img.width(), h = img.height();
  if (!(fx >= 0.0 && fy >= 0.0 && fx <= w - 1 && fy <= h - 1)) return false;
  int x0 = static_cast<int>(fx);
  int y0 = static_cast<int>(fy);
  x0 = std::min(x0, w - 1);
  y0 = std::min(y0, h - 1);
  const double ax = fx - x0;
  const double ay = fy - y0;
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  // Exact at integer offsets: zero weights never touch the neighbor.
  double top = img(x0, y0);
  if (ax != 0.0) top = (1.0 - ax) * top + ax * img(x1, y0);
  double value = top;
  if (ay != 0.0) {
    double bottom = img(x0, y1);
    if (ax != 0.0) bottom = (1.0 - ax) * bottom + ax * img(x1, y1);
    value = (1.0 - ay) * top + ay * bottom;
  }
  out = static_cast<float>(value);
  return true;
}

Image downsample2(const Image& img) {
  const int w = std::max(1, img.width() / 2);
  const int h = std::max(1, img.height() / 2);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::min(2 * x, img.width() - 1), x1 = std::min(2 * x + 1, img.width() - 1);
      const int y0 = std::min(2 * y, img.height() - 1), y1 = std::min(2 * y + 1, img.height() - 1);
      out(x, y) = 0.25f * (img(x0, y0) + img(x1, y0) + img(x0, y1) + img(x1, y1));
    }
  }
  return out;
}

namespace {

unsigned char to_byte(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<unsigned char>(std::lround(c * 255.0f));
}

}  // namespace

void write_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> bytes(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), bytes.begin(), to_byte);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  auto next_token = [&in]() {
    std::string token;
    while (in) {
      int c = in.get();
      if (c == '#') {
        while (in && in.get() != '\n') {
        }
        continue;
      }
      if (std::isspace(c) || c == EOF) {
        if (!token.empty()) break;
        if (c == EOF) break;
        continue;
      }
      token.push_back(static_cast<char>(c));
    }
    return token;
  };
  if (next_token() != "P5") throw Error(ErrorCode::ParseError, path.string() + " is not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "malformed PGM header in " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorCode::ParseError, "unsupported PGM header in " + path.string());
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(n * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(ErrorCode::DimensionMismatch, "truncated PGM payload in " + path.string());
  }
  std::vector<float> pixels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8 | raw[2 * i + 1]) : raw[i];
    pixels[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return Image(w, h, std::move(pixels));
}

void write_png(const Image& img, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoFailure, "libpng initialization failed");
  }
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoFailure, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) row[static_cast<std::size_t>(x)] = to_byte(img(x, y));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_image(const Image& img, const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_png(img, path);
  } else {
    write_pgm(img, path);
  }
}

}  // namespace salient
