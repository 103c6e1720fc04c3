#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "salient/eval.hpp"
#include "salient/grids.hpp"
#include "salient/image.hpp"
#include "salient/manifest.hpp"
#include "salient/registration.hpp"

namespace salient {

struct SceneParams {
  int image_width = 288;
  int image_height = 224;
  int grid_width = 36;
  int grid_height = 28;
  Plane plane = Plane::TV;
  int orientation = 0;  ///< sign of csp_x - segment_x; 0 draws it at random

  double semi_major_min = 80.0;  ///< HC ellipse semi-major range, px
  double semi_major_max = 100.0;
  double aspect_min = 0.75;  ///< b / a range
  double aspect_max = 0.85;
  double max_tilt = 0.15;          ///< rad
  double center_jitter = 8.0;      ///< px, uniform in each axis
  double orientation_shift = 14.0;  ///< px the head sits toward its CSP side
  double landmark_offset = 0.0;     ///< px, displacement of true landmarks from annotated centers

  double saliency_sigma = 1.0;  ///< cells
  double saliency_noise = 0.0;

  int feature_channels = 16;
  double prototype_distance = 10.0;
  double feature_noise = 0.5;
  /// Optional explicit prototypes: background, CSP, LV, cerebellum.
  std::vector<std::vector<double>> prototypes;

  double image_noise = 0.1;
  bool shadows = false;
  bool clutter = true;  ///< frame-fixed bright band (maternal tissue)

  /// Throws BadParams.
  void validate() const;
  std::vector<std::vector<double>> resolved_prototypes() const;
};

/// Anatomy of one scene in pixel coordinates.
struct SceneGeometry {
  Point2 head_center;
  Point2 axis_major;  ///< unit vector
  Point2 axis_minor;  ///< unit vector
  double a = 0.0;
  double b = 0.0;
  Point2 csp;          ///< annotated CSP center
  Segment segment;     ///< annotated LV / TCD line
  Point2 csp_landmark;      ///< true landmark positions
  Point2 segment_landmark;

  SceneGeometry transformed(const Matrix3& m) const;
};

struct TrueLandmark {
  Structure structure;
  Point2 pixel;
  int cluster = 0;  ///< prototype index
};

struct SynthScene {
  Image image;
  ImageMeta meta;
  SaliencyGrid saliency;
  FeatureGrid features;
  AnnotationSet annotations;
  std::vector<TrueLandmark> true_landmarks;
  std::uint64_t rng_seed = 0;
  SceneGeometry geometry;
  SceneParams params;
};

/// Deterministic for a fixed seed. Throws BadParams or OutOfFrame.
SynthScene make_scene(std::uint64_t seed, const SceneParams& params, const std::string& image_id = "img");

/// Renders a scene from explicit geometry; noise, shadows and features are
/// drawn from `noise_seed`.
SynthScene render_scene(const SceneGeometry& geometry, std::uint64_t noise_seed, const SceneParams& params,
                        const std::string& image_id);

struct PairParams {
  bool flip = false;
  Point2 translation;
  double rotation = 0.0;
  double scale = 1.0;
};

struct SynthPair {
  SynthScene source;
  SynthScene target;
  SimilarityTransform truth;
};

/// Target = source anatomy mapped by the planted similarity (flip, then
/// translation, then rotation/scale about the target CSP). The target reuses
/// the source noise seed unless `noise_seed` is given. Throws OutOfFrame.
SynthPair make_pair(const SynthScene& source, const PairParams& tf, std::optional<std::uint64_t> noise_seed = {},
                    const std::string& target_id = "");

/// n independent scenes alternating TV / TC planes.
std::vector<SynthScene> make_cohort(int n, std::uint64_t seed, const SceneParams& params);

/// Writes grids, PGM images and manifest.json into `dir`.
Manifest write_dataset(const std::vector<SynthScene>& scenes, const std::filesystem::path& dir);

/// Evaluation view of a scene (landmarks left empty).
EvalImage to_eval_image(const SynthScene& scene);

}  // namespace salient
