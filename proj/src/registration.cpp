#include "salient/registration.hpp"

#include <cmath>

#include "salient/error.hpp"

namespace salient {
namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[r * 3 + k] * b[k * 3 + c];
      out[r * 3 + c] = s;
    }
  }
  return out;
}

Point2 transform_point(const Matrix3& m, Point2 p) {
  return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

double affine_determinant(const Matrix3& m) { return m[0] * m[4] - m[1] * m[3]; }

Matrix3 invert_affine(const Matrix3& m) {
  const double det = affine_determinant(m);
  if (!(std::abs(det) >= 1e-12)) throw Error(ErrorCode::SingularTransform, "transform is not invertible");
  const double a = m[4] / det, b = -m[1] / det, c = -m[3] / det, d = m[0] / det;
  return {a, b, -(a * m[2] + b * m[5]), c, d, -(c * m[2] + d * m[5]), 0, 0, 1};
}

SimilarityTransform SimilarityTransform::compose(bool flipped, double flip_width, Point2 translation,
                                                 double rotation, double scale, Point2 center) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::BadParams, "scale must be positive");
  SimilarityTransform tf;
  tf.flipped = flipped;
  tf.flip_width = flip_width;
  tf.translation = translation;
  tf.rotation = rotation;
  tf.scale = scale;
  tf.alpha = scale * std::cos(rotation);
  tf.beta = scale * std::sin(rotation);
  tf.center = center;

  const double al = tf.alpha, be = tf.beta, cx = center.x, cy = center.y;
  const Matrix3 rotate = {al, be, (1 - al) * cx - be * cy, -be, al, be * cx + (1 - al) * cy, 0, 0, 1};
  const Matrix3 shift = {1, 0, translation.x, 0, 1, translation.y, 0, 0, 1};
  const Matrix3 flip = flipped ? Matrix3{-1, 0, flip_width, 0, 1, 0, 0, 0, 1} : kIdentity3;
  tf.matrix = multiply(rotate, multiply(shift, flip));
  return tf;
}

bool needs_flip(const LandmarkPair& source, const LandmarkPair& target, bool force_no_flip_if_ambiguous) {
  const int s = sign(source.c.x - source.d.x);
  const int t = sign(target.c.x - target.d.x);
  if (s == 0 || t == 0) {
    if (force_no_flip_if_ambiguous) return false;
    throw Error(ErrorCode::AmbiguousOrientation, "landmarks are vertically aligned; head orientation undefined");
  }
  return s != t;
}

double flip_x(double px, const LandmarkPair& source, const LandmarkPair& target) {
  return needs_flip(source, target) ? source.image_width - px : px;
}

SimilarityTransform fit_transform(const LandmarkPair& source, const LandmarkPair& target,
                                  bool force_no_flip_if_ambiguous) {
  if (source.c == source.d || target.c == target.d) {
    throw Error(ErrorCode::DegenerateLandmarks, "the two landmarks of an image coincide");
  }
  const bool flip = needs_flip(source, target, force_no_flip_if_ambiguous);
  const double w = source.image_width;
  const Point2 cf{flip ? w - source.c.x : source.c.x, source.c.y};
  const Point2 df{flip ? w - source.d.x : source.d.x, source.d.y};
  const Point2 from = df - cf;
  const Point2 to = target.d - target.c;
  const double scale = norm(to) / norm(from);
  // The matrix rotates by -rotation in y-up terms, hence cross(to, from).
  const double rotation = std::atan2(cross(to, from), dot(from, to));
  return SimilarityTransform::compose(flip, w, target.c - cf, rotation, scale, target.c);
}

Point2 apply(const SimilarityTransform& tf, Point2 p) { return transform_point(tf.matrix, p); }

Image warp_image(const Image& img, const Matrix3& forward, int out_width, int out_height) {
  if (img.empty()) throw Error(ErrorCode::BadParams, "cannot warp an empty image");
  const Matrix3 inv = invert_affine(forward);
  Image out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 p = transform_point(inv, {x + 0.5, y + 0.5});
      float v = 0.0f;
      if (sample_bilinear(img, p.x, p.y, v)) out(x, y) = v;
    }
  }
  return out;
}

Image warp_image(const Image& img, const SimilarityTransform& tf, int out_width, int out_height) {
  return warp_image(img, tf.matrix, out_width, out_height);
}

}  // namespace salient
