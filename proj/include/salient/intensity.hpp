#pragma once

#include <array>
#include <optional>
#include <vector>

#include "salient/image.hpp"
#include "salient/registration.hpp"

namespace salient {

/// Normalized cross-correlation between `target` and `source` resampled
/// through `tf` (source -> target), over target pixels whose preimage lies
/// inside the source. Returns nullopt when the overlap is empty or has zero
/// variance. `overlap` receives the number of pixels used.
std::optional<double> ncc(const Image& target, const Image& source, const Matrix3& tf, std::size_t* overlap = nullptr);

struct IntensityOptions {
  std::vector<int> pyramid = {4, 2, 1};  ///< downsampling factor per level, coarse to fine
  int max_iterations_per_level = 256;
  double diameter_tolerance = 1e-3;
  /// Initial simplex steps (tx px, ty px, rotation rad, log scale); the
  /// translation steps are in pixels of the current pyramid level.
  std::array<double, 4> steps = {4.0, 4.0, 0.034906585039886591, 0.05};
  /// Parameter sets whose overlap covers less than this fraction of the
  /// target score as uncorrelated.
  double min_overlap_fraction = 0.25;
};

struct IntensityResult {
  SimilarityTransform transform;
  double initial_ncc = 0.0;
  double final_ncc = 0.0;
  std::vector<int> iterations;  ///< Nelder-Mead iterations per pyramid level
};

/// Similarity registration maximizing NCC over (tx, ty, rotation, log scale),
/// starting from `init` (whose flip and rotation center are kept). Never
/// returns a transform scoring below `init` at full resolution.
/// Throws FlatImage when either image has zero variance.
IntensityResult register_intensity(const Image& source, const Image& target, const SimilarityTransform& init,
                                   const IntensityOptions& opts = {});

}  // namespace salient
