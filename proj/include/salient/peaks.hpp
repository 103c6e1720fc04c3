#pragma once

#include <optional>
#include <string>
#include <vector>

#include "salient/geometry.hpp"
#include "salient/grids.hpp"

namespace salient {

struct PeakConfig {
  int min_distance = 2;    ///< d: half-width of the maximum filter window
  double threshold = 0.1;  ///< t: minimum saliency of a landmark

  /// Throws OutOfRange unless min_distance >= 1 and threshold in [0, 1].
  void validate() const;
};

struct Landmark {
  Cell seed;          ///< integer local-maximum cell, before refinement
  Point2 grid_pos;    ///< subpixel position in cells
  Point2 pixel_pos;   ///< position in image pixels
  double saliency = 0.0;
  std::optional<int> cluster;
};

struct LandmarkSet {
  std::string image_id;
  std::vector<Landmark> landmarks;
};

/// Sliding-window maximum over a (2d+1)^2 window clipped at the grid borders.
SaliencyGrid max_filter(const SaliencyGrid& s, int d);

/// Cells equal to their windowed maximum and at least the threshold, with
/// each connected plateau of equal-valued maxima collapsed to one cell.
/// Sorted by (y, x).
std::vector<Cell> local_maxima(const SaliencyGrid& s, const PeakConfig& cfg);

/// Subpixel offset of a three-sample peak from a log-parabola fit, clamped to
/// [-0.5, 0.5]. Throws DegenerateFit if the log profile is not strictly concave.
double log_parabola_offset(double left, double center, double right);

/// Separable log-quadratic (Gaussian) fit on the 3x3 neighborhood of `p`.
/// Cells within one cell of a border are returned unrefined.
/// Throws DegenerateFit for a non-concave neighborhood.
Point2 refine_subpixel(const SaliencyGrid& s, Cell p);

/// local_maxima -> refine_subpixel -> grid_to_pixel, sorted by descending
/// saliency. Degenerate fits keep the integer position.
LandmarkSet extract_landmarks(const SaliencyGrid& s, const ImageMeta& meta, const PeakConfig& cfg = {});

}  // namespace salient
