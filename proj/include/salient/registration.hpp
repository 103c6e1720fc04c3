#pragma once

#include <array>

#include "salient/geometry.hpp"
#include "salient/image.hpp"

namespace salient {

/// Row-major 3x3 homogeneous matrix.
using Matrix3 = std::array<double, 9>;

inline constexpr Matrix3 kIdentity3 = {1, 0, 0, 0, 1, 0, 0, 0, 1};

Matrix3 multiply(const Matrix3& a, const Matrix3& b);
Point2 transform_point(const Matrix3& m, Point2 p);
double affine_determinant(const Matrix3& m);
/// Inverse of an affine matrix (last row 0 0 1). Throws SingularTransform
/// when |det| < 1e-12.
Matrix3 invert_affine(const Matrix3& m);

/// The two landmarks of one image used for alignment.
struct LandmarkPair {
  Point2 c;  ///< CSP landmark
  Point2 d;  ///< LV (TV plane) or cerebellum (TC plane) landmark
  int image_width = 0;
};

/// Optional horizontal flip x -> W - x, then translation, then rotation and
/// isotropic scaling about `center`:
///
///   | alpha  beta  (1-alpha) cx - beta cy |   | f(px) + tx |
///   | -beta alpha  beta cx + (1-alpha) cy | * |   py + ty  |
///   |   0     0              1            |   |     1      |
///
/// with alpha = scale cos(rotation), beta = scale sin(rotation). A positive
/// rotation turns counter-clockwise on screen (y axis pointing down).
struct SimilarityTransform {
  bool flipped = false;
  double flip_width = 0.0;
  Point2 translation;
  double rotation = 0.0;
  double scale = 1.0;
  double alpha = 1.0;
  double beta = 0.0;
  Point2 center;
  Matrix3 matrix = kIdentity3;

  static SimilarityTransform identity() { return {}; }
  /// Assembles the matrix from its parameters. Throws BadParams unless scale > 0.
  static SimilarityTransform compose(bool flipped, double flip_width, Point2 translation, double rotation,
                                     double scale, Point2 center);
};

/// x -> W_source - x when the horizontal ordering of (c, d) differs between
/// the two images. Throws AmbiguousOrientation when c_x == d_x in either.
double flip_x(double px, const LandmarkPair& source, const LandmarkPair& target);

/// Whether the two images need a flip. Throws AmbiguousOrientation, or
/// returns false for ambiguous orderings when `force_no_flip_if_ambiguous`.
bool needs_flip(const LandmarkPair& source, const LandmarkPair& target, bool force_no_flip_if_ambiguous = false);

/// Two-landmark similarity mapping source.c onto target.c and source.d onto
/// target.d. Throws DegenerateLandmarks for coincident landmarks.
SimilarityTransform fit_transform(const LandmarkPair& source, const LandmarkPair& target,
                                  bool force_no_flip_if_ambiguous = false);

Point2 apply(const SimilarityTransform& tf, Point2 p);

/// Inverse-maps each output pixel center through the transform and samples
/// bilinearly; samples outside the source are 0.
Image warp_image(const Image& img, const SimilarityTransform& tf, int out_width, int out_height);
Image warp_image(const Image& img, const Matrix3& forward, int out_width, int out_height);

}  // namespace salient
