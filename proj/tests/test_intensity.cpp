#include <gtest/gtest.h>

#include <cmath>

#include "salient/error.hpp"
#include "salient/intensity.hpp"
#include "salient/optimize.hpp"
#include "salient/rng.hpp"

namespace salient {
namespace {

// Sum of broad Gaussian blobs: smooth, textured enough to pin translation.
Image blobs_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  struct Blob {
    double x, y, s, a;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 12; ++i) {
    blobs.push_back({rng.uniform(0.15 * w, 0.85 * w), rng.uniform(0.15 * h, 0.85 * h), rng.uniform(6, 14),
                     rng.uniform(0.3, 1.0)});
  }
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (const auto& b : blobs) {
        const double dx = x + 0.5 - b.x, dy = y + 0.5 - b.y;
        v += b.a * std::exp(-(dx * dx + dy * dy) / (2 * b.s * b.s));
      }
      img(x, y) = static_cast<float>(v);
    }
  }
  return img;
}

TEST(NelderMead, MinimizesQuadratic) {
  const auto f = [](const std::vector<double>& x) {
    return (x[0] - 3) * (x[0] - 3) + 2 * (x[1] + 1) * (x[1] + 1) + 0.5 * x[2] * x[2];
  };
  NelderMeadOptions opts;
  opts.max_iterations = 2000;
  opts.diameter_tolerance = 1e-8;
  const auto r = nelder_mead(f, {0, 0, 1}, {1, 1, 1}, opts);
  EXPECT_NEAR(r.x[0], 3, 1e-4);
  EXPECT_NEAR(r.x[1], -1, 1e-4);
  EXPECT_NEAR(r.x[2], 0, 1e-4);
  EXPECT_LE(r.value, f({0, 0, 1}));
}

TEST(NelderMead, RespectsIterationCap) {
  const auto f = [](const std::vector<double>& x) {
    return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
  };
  NelderMeadOptions opts;
  opts.max_iterations = 7;
  opts.diameter_tolerance = 0;
  const auto r = nelder_mead(f, {-1.2, 1}, {0.1, 0.1}, opts);
  EXPECT_LE(r.iterations, 7);
  EXPECT_LE(r.value, f({-1.2, 1}));
}

TEST(Ncc, SelfCorrelationIsOne) {
  const auto img = blobs_image(64, 48, 1);
  std::size_t overlap = 0;
  const auto v = ncc(img, img, kIdentity3, &overlap);
  ASSERT_TRUE(v);
  EXPECT_NEAR(*v, 1.0, 1e-9);
  EXPECT_EQ(overlap, 64u * 48u);
}

TEST(Ncc, InvariantToAffineIntensityChange) {
  const auto img = blobs_image(64, 48, 2);
  Image other = img;
  for (float& p : other.pixels()) p = 3.0f * p + 0.5f;
  EXPECT_NEAR(*ncc(img, other, kIdentity3), 1.0, 1e-6);
  for (float& p : other.pixels()) p = -p;
  EXPECT_NEAR(*ncc(img, other, kIdentity3), -1.0, 1e-6);
}

TEST(Ncc, EmptyOverlapOrFlat) {
  const auto img = blobs_image(32, 32, 3);
  const Matrix3 far = {1, 0, 1000, 0, 1, 0, 0, 0, 1};
  EXPECT_FALSE(ncc(img, img, far));
  EXPECT_FALSE(ncc(img, Image(32, 32, 0.5f), kIdentity3));
}

TEST(RegisterIntensity, IdentityIsOptimal) {
  const auto img = blobs_image(96, 80, 4);
  const auto r = register_intensity(img, img, SimilarityTransform::identity());
  EXPECT_NEAR(r.final_ncc, 1.0, 1e-9);
  EXPECT_NEAR(r.transform.translation.x, 0.0, 1e-6);
  EXPECT_NEAR(r.transform.translation.y, 0.0, 1e-6);
  EXPECT_NEAR(r.transform.scale, 1.0, 1e-9);
}

TEST(RegisterIntensity, RecoversPlantedTranslation) {
  const auto src = blobs_image(128, 96, 5);
  const auto planted = SimilarityTransform::compose(false, 128, {10, -6}, 0, 1, {64, 48});
  const auto tgt = warp_image(src, planted, 128, 96);
  const auto r = register_intensity(src, tgt, SimilarityTransform::compose(false, 128, {0, 0}, 0, 1, {64, 48}));
  const Point2 probe{64, 48};
  EXPECT_LT(distance(apply(r.transform, probe), apply(planted, probe)), 1.0);
  EXPECT_GT(r.final_ncc, 0.99);
  ASSERT_EQ(r.iterations.size(), 3u);
  for (int it : r.iterations) EXPECT_LE(it, 256);
}

TEST(RegisterIntensity, NeverWorseThanInitialization) {
  const auto src = blobs_image(96, 80, 6);
  const auto tgt = blobs_image(96, 80, 7);
  IntensityOptions opts;
  opts.max_iterations_per_level = 5;
  const auto init = SimilarityTransform::compose(false, 96, {2, 1}, 0.05, 1.0, {48, 40});
  const auto r = register_intensity(src, tgt, init, opts);
  EXPECT_GE(r.final_ncc, r.initial_ncc);
  EXPECT_GE(r.final_ncc, *ncc(tgt, src, init.matrix));
  EXPECT_EQ(r.transform.flipped, init.flipped);
}

TEST(RegisterIntensity, FlatImagesRejected) {
  const auto img = blobs_image(32, 32, 8);
  try {
    register_intensity(Image(32, 32, 0.2f), img, SimilarityTransform::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FlatImage);
  }
  EXPECT_THROW(register_intensity(img, Image(32, 32, 0.2f), SimilarityTransform::identity()), Error);
}

TEST(RegisterIntensity, RejectsNonDyadicPyramid) {
  const auto img = blobs_image(32, 32, 9);
  IntensityOptions opts;
  opts.pyramid = {3, 1};
  EXPECT_THROW(register_intensity(img, img, SimilarityTransform::identity(), opts), Error);
}

}  // namespace
}  // namespace salient
