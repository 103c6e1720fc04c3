#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "salient/error.hpp"
#include "salient/grids.hpp"
#include "salient/image.hpp"
#include "salient/manifest.hpp"
#include "salient/rng.hpp"

namespace salient {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "salient_grid_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_raw(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::BadParams;
}

TEST(GridIo, ZeroGridDecodesAsSaliency) {
  const auto path = temp_path("zeros.slgd");
  write_raw(path, encode_grid(3, 3, 1, std::vector<float>(9, 0.0f)));
  const auto grid = read_grid(path);
  ASSERT_TRUE(std::holds_alternative<SaliencyGrid>(grid));
  const auto& s = std::get<SaliencyGrid>(grid);
  EXPECT_EQ(s.width(), 3);
  EXPECT_EQ(s.height(), 3);
  for (float v : s.values()) EXPECT_EQ(v, 0.0f);
}

TEST(GridIo, StandardSizedGridAndFileLength) {
  const auto path = temp_path("standard.slgd");
  write_grid(SaliencyGrid(36, 28), path);
  EXPECT_EQ(fs::file_size(path), 16u + 36u * 28u * 4u);
  const auto s = read_saliency_grid(path);
  EXPECT_EQ(s.width(), 36);
  EXPECT_EQ(s.height(), 28);
}

TEST(GridIo, HeaderLayoutIsLittleEndian) {
  const auto bytes = encode_grid(3, 4, 2, std::vector<float>(24, 1.0f));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SLGD");
  EXPECT_EQ(bytes[4], 3);
  EXPECT_EQ(bytes[8], 4);
  EXPECT_EQ(bytes[12], 2);
  // 1.0f == 0x3f800000
  EXPECT_EQ(bytes[16], 0x00);
  EXPECT_EQ(bytes[19], 0x3f);
}

TEST(GridIo, ShortPayloadIsDimensionMismatch) {
  auto bytes = encode_grid(5, 1, 1, std::vector<float>(5, 0.5f));
  bytes.resize(bytes.size() - 4);
  EXPECT_EQ(code_of([&] { decode_grid(bytes); }), ErrorCode::DimensionMismatch);
}

TEST(GridIo, CorruptMagicIsBadMagic) {
  const auto path = temp_path("magic.slgd");
  write_grid(SaliencyGrid(4, 4), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  EXPECT_EQ(code_of([&] { read_grid(path); }), ErrorCode::BadMagic);
}

TEST(GridIo, NonFiniteValueRejected) {
  std::vector<float> v(9, 0.0f);
  v[4] = std::nanf("");
  EXPECT_EQ(code_of([&] { decode_grid(encode_grid(3, 3, 1, v)); }), ErrorCode::NonFiniteValue);
  v[4] = INFINITY;
  EXPECT_EQ(code_of([&] { decode_grid(encode_grid(3, 1, 3, v)); }), ErrorCode::NonFiniteValue);
}

TEST(GridIo, MissingFileAndUnwritablePathAreIoFailures) {
  EXPECT_EQ(code_of([] { read_grid("/nonexistent/dir/x.slgd"); }), ErrorCode::IoFailure);
  EXPECT_EQ(code_of([] { write_grid(SaliencyGrid(3, 3), "/nonexistent/dir/x.slgd"); }), ErrorCode::IoFailure);
}

TEST(GridTypes, InvariantsEnforced) {
  EXPECT_EQ(code_of([] { SaliencyGrid(2, 5); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { SaliencyGrid(3, 3, std::vector<float>(9, 1.5f)); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { FeatureGrid(3, 3, 2, std::vector<float>(17)); }), ErrorCode::DimensionMismatch);
  // a one-channel file may still be read as features
  const auto path = temp_path("onechannel.slgd");
  write_raw(path, encode_grid(3, 3, 1, std::vector<float>(9, -2.0f)));
  EXPECT_EQ(code_of([&] { read_grid(path); }), ErrorCode::OutOfRange);
  EXPECT_EQ(read_feature_grid(path).channels(), 1);
}

TEST(GridIo, RoundTripIsBitExactForRandomGrids) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 3 + static_cast<int>(rng.below(20));
    const int h = 3 + static_cast<int>(rng.below(20));
    const int c = 1 + static_cast<int>(rng.below(6));
    std::vector<float> feats(static_cast<std::size_t>(w) * h * c);
    for (auto& f : feats) f = static_cast<float>(rng.normal(0.0, 100.0));
    const FeatureGrid fg(w, h, c, feats);
    const auto fpath = temp_path("rt_features.slgd");
    write_grid(fg, fpath);
    const auto back = read_feature_grid(fpath);
    ASSERT_EQ(back.channels(), c);
    for (std::size_t i = 0; i < feats.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint32_t>(back.values()[i]), std::bit_cast<std::uint32_t>(feats[i]));
    }

    const auto sg = oracle::random_grid(rng, w, h);
    const auto spath = temp_path("rt_saliency.slgd");
    write_grid(sg, spath);
    EXPECT_EQ(read_saliency_grid(spath), sg);
  }
}

TEST(GridToPixel, CellCentersMapToBlockCenters) {
  const auto meta = ImageMeta::from_sizes("x", 288, 224, 36, 28);
  EXPECT_DOUBLE_EQ(meta.scale_x, 8.0);
  EXPECT_DOUBLE_EQ(meta.scale_y, 8.0);
  EXPECT_EQ(grid_to_pixel({0, 0}, meta), (Point2{4, 4}));
  EXPECT_EQ(grid_to_pixel({17.5, 13.5}, meta), (Point2{144, 112}));
  EXPECT_EQ(grid_to_pixel({35, 27}, meta), (Point2{284, 220}));
  EXPECT_EQ(pixel_to_grid({284, 220}, meta), (Point2{35, 27}));
}

TEST(GridToPixel, IsAffine) {
  Rng rng(5);
  const auto meta = ImageMeta::from_sizes("x", 301, 250, 36, 28);
  for (int i = 0; i < 200; ++i) {
    const Point2 p{rng.uniform(-5, 40), rng.uniform(-5, 30)};
    const Point2 q{rng.uniform(-5, 40), rng.uniform(-5, 30)};
    const double lambda = rng.uniform();
    const Point2 lhs = grid_to_pixel(lambda * p + (1 - lambda) * q, meta);
    const Point2 rhs = lambda * grid_to_pixel(p, meta) + (1 - lambda) * grid_to_pixel(q, meta);
    EXPECT_NEAR(lhs.x, rhs.x, 1e-9);
    EXPECT_NEAR(lhs.y, rhs.y, 1e-9);
  }
}

TEST(Manifest, RoundTripWithOptionalAnnotations) {
  const auto j = nlohmann::json::parse(R"({
    "images": [
      {"id": "a", "pixel_width": 288, "pixel_height": 224, "saliency_grid": "a.slgd",
       "feature_grid": "a.f.slgd", "plane": "TV", "image": "a.pgm",
       "annotations": {"csp_center": [100, 110], "segment": [[180, 90], [196, 92]],
                       "hc_ellipse": {"center": [144, 112], "a": 90, "b": 70, "theta": 0.1}}},
      {"id": "b", "pixel_width": 288, "pixel_height": 224, "saliency_grid": "b.slgd",
       "feature_grid": "b.f.slgd", "plane": "TC"}
    ]})");
  const Manifest m = manifest_from_json(j, "/data");
  ASSERT_EQ(m.images.size(), 2u);
  ASSERT_TRUE(m.images[0].annotations);
  EXPECT_DOUBLE_EQ(m.images[0].annotations->hc_long_axis(), 180.0);
  EXPECT_EQ(m.images[0].annotations->segment.midpoint(), (Point2{188, 91}));
  EXPECT_FALSE(m.images[1].annotations);
  EXPECT_EQ(m.images[1].plane, Plane::TC);
  EXPECT_EQ(m.resolve("a.slgd"), fs::path("/data/a.slgd"));
  EXPECT_EQ(manifest_from_json(manifest_to_json(m), "/data").images[0].annotations->hc.theta, 0.1);
}

TEST(Manifest, RejectsInvalidEllipseAndMalformedJson) {
  auto j = nlohmann::json::parse(R"({"images": [{"id": "a", "pixel_width": 10, "pixel_height": 10,
      "saliency_grid": "a", "feature_grid": "b",
      "annotations": {"csp_center": [1, 1], "segment": [[2, 2], [3, 3]],
                      "hc_ellipse": {"center": [5, 5], "a": 2, "b": 3}}}]})");
  EXPECT_EQ(code_of([&] { manifest_from_json(j); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { manifest_from_json(nlohmann::json::parse(R"({"images": [{"id": 3}]})")); }),
            ErrorCode::ParseError);
}

TEST(ImageIo, PgmRoundTripQuantizesTo8Bits) {
  Image img(5, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) img(x, y) = static_cast<float>((x + 5 * y) / 19.0);
  }
  const auto path = temp_path("img.pgm");
  write_pgm(img, path);
  const Image back = read_pgm(path);
  ASSERT_EQ(back.width(), 5);
  for (std::size_t i = 0; i < img.pixels().size(); ++i) EXPECT_NEAR(back.pixels()[i], img.pixels()[i], 0.5 / 255.0 + 1e-7);
}

}  // namespace
}  // namespace salient
