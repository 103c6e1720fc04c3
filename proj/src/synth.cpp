#include "salient/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "salient/error.hpp"
#include "salient/rng.hpp"

namespace salient {
namespace {

enum Stream : std::uint64_t { kGeometry = 1, kImageNoise, kShadows, kSaliencyNoise, kFeatures, kCohort };

Point2 linear(const Matrix3& m, Point2 v) { return {m[0] * v.x + m[1] * v.y, m[3] * v.x + m[4] * v.y}; }

Point2 unit(Point2 v) { return (1.0 / norm(v)) * v; }

double segment_distance(Point2 q, const Segment& s) {
  const Point2 d = s.b - s.a;
  const double len2 = dot(d, d);
  const double t = len2 > 0.0 ? std::clamp(dot(q - s.a, d) / len2, 0.0, 1.0) : 0.0;
  return distance(q, s.a + t * d);
}

struct Wedge {
  Point2 apex;
  double direction;  // rad, measured from +y (downwards)
  double half_width;
};

Image render_image(const SceneGeometry& g, const SceneParams& p, std::uint64_t noise_seed) {
  Rng shadow_rng = Rng(noise_seed).split(kShadows);
  std::vector<Wedge> wedges;
  if (p.shadows) {
    const int count = 2 + static_cast<int>(shadow_rng.below(2));
    for (int i = 0; i < count; ++i) {
      wedges.push_back({{shadow_rng.uniform(0.15, 0.85) * p.image_width, -10.0},
                        shadow_rng.uniform(-0.5, 0.5), shadow_rng.uniform(0.06, 0.12)});
    }
  }
  Rng noise = Rng(noise_seed).split(kImageNoise);
  const double csp_sigma = 0.06 * g.a;
  const double seg_sigma = 0.025 * g.a;
  const double rim_width = 0.045 * g.a;

  Image img(p.image_width, p.image_height);
  for (int y = 0; y < p.image_height; ++y) {
    for (int x = 0; x < p.image_width; ++x) {
      const Point2 q{x + 0.5, y + 0.5};
      const Point2 d = q - g.head_center;
      const double u = dot(d, g.axis_major) / g.a;
      const double v = dot(d, g.axis_minor) / g.b;
      const double r = std::hypot(u, v);
      double value = 0.06;
      const double inside = 1.0 / (1.0 + std::exp((r - 1.0) * g.a / (0.5 * rim_width)));
      value += inside * (0.22 + 0.07 * std::sin(5.0 * u + 1.3) * std::cos(4.0 * v));
      value += 0.7 * std::exp(-std::pow((r - 1.0) * g.a / rim_width, 2));
      value += 0.35 * std::exp(-dot(q - g.csp, q - g.csp) / (2.0 * csp_sigma * csp_sigma));
      const double sd = segment_distance(q, g.segment);
      value += 0.4 * std::exp(-sd * sd / (2.0 * seg_sigma * seg_sigma));
      if (p.clutter) value += 0.35 * std::exp(-std::pow((q.y - 14.0) / 9.0, 2)) * (0.6 + 0.4 * std::sin(q.x / 17.0));
      for (const auto& w : wedges) {
        const Point2 rel = q - w.apex;
        const double angle = std::atan2(rel.x, rel.y) - w.direction;
        if (std::abs(angle) < w.half_width) value *= 0.2;
      }
      if (p.image_noise > 0.0) value += noise.normal(0.0, p.image_noise);
      img(x, y) = static_cast<float>(std::clamp(value, 0.0, 1.0));
    }
  }
  return img;
}

void check_in_frame(const SceneGeometry& g, const SceneParams& p) {
  const ImageMeta meta = ImageMeta::from_sizes("", p.image_width, p.image_height, p.grid_width, p.grid_height);
  for (Point2 lm : {g.csp_landmark, g.segment_landmark}) {
    const Point2 c = pixel_to_grid(lm, meta);
    if (!(c.x >= 1.0 && c.y >= 1.0 && c.x <= p.grid_width - 2.0 && c.y <= p.grid_height - 2.0)) {
      throw Error(ErrorCode::OutOfFrame, "landmark falls outside the grid interior");
    }
  }
  const Point2 hc = g.head_center;
  if (!(hc.x >= 0.0 && hc.y >= 0.0 && hc.x <= p.image_width && hc.y <= p.image_height)) {
    throw Error(ErrorCode::OutOfFrame, "head center falls outside the image");
  }
}

}  // namespace

void SceneParams::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::BadParams, what); };
  if (image_width <= 0 || image_height <= 0) bad("image size must be positive");
  if (grid_width < 3 || grid_height < 3) bad("grid must be at least 3x3");
  if (orientation < -1 || orientation > 1) bad("orientation must be -1, 0 or 1");
  if (!(semi_major_min > 0.0) || semi_major_max < semi_major_min) bad("invalid semi-major range");
  if (!(aspect_min > 0.0) || aspect_max < aspect_min || aspect_max > 1.0) bad("aspect range must lie in (0, 1]");
  if (!(saliency_sigma > 0.0)) bad("saliency sigma must be positive");
  if (saliency_noise < 0.0 || feature_noise < 0.0 || image_noise < 0.0 || landmark_offset < 0.0) {
    bad("noise levels must be non-negative");
  }
  if (center_jitter < 0.0 || max_tilt < 0.0) bad("jitter and tilt must be non-negative");
  if (feature_channels < 1) bad("feature channels must be positive");
  const auto protos = resolved_prototypes();
  if (protos.size() != 4) bad("four prototypes required: background, CSP, LV, cerebellum");
  for (const auto& pr : protos) {
    if (static_cast<int>(pr.size()) != feature_channels) bad("prototype length must equal feature channels");
  }
  for (std::size_t i = 0; i < protos.size(); ++i) {
    for (std::size_t j = i + 1; j < protos.size(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < protos[i].size(); ++c) s += (protos[i][c] - protos[j][c]) * (protos[i][c] - protos[j][c]);
      if (!(std::sqrt(s) > 6.0 * feature_noise)) bad("prototypes must be farther apart than 6x the feature noise");
    }
  }
}

std::vector<std::vector<double>> SceneParams::resolved_prototypes() const {
  if (!prototypes.empty()) return prototypes;
  if (feature_channels < 3) return {};
  // Background at the origin, structures on orthogonal axes: pairwise
  // distance prototype_distance between structures.
  std::vector<std::vector<double>> out(4, std::vector<double>(static_cast<std::size_t>(feature_channels), 0.0));
  for (std::size_t i = 1; i < 4; ++i) out[i][i - 1] = prototype_distance / std::numbers::sqrt2;
  return out;
}

SceneGeometry SceneGeometry::transformed(const Matrix3& m) const {
  SceneGeometry g;
  const double s = std::sqrt(std::abs(affine_determinant(m)));
  g.head_center = transform_point(m, head_center);
  g.axis_major = unit(linear(m, axis_major));
  g.axis_minor = unit(linear(m, axis_minor));
  g.a = a * s;
  g.b = b * s;
  g.csp = transform_point(m, csp);
  g.segment = {transform_point(m, segment.a), transform_point(m, segment.b)};
  g.csp_landmark = transform_point(m, csp_landmark);
  g.segment_landmark = transform_point(m, segment_landmark);
  return g;
}

SynthScene render_scene(const SceneGeometry& g, std::uint64_t noise_seed, const SceneParams& p,
                        const std::string& image_id) {
  p.validate();
  check_in_frame(g, p);
  SynthScene scene{Image(p.image_width, p.image_height),
                   ImageMeta::from_sizes(image_id, p.image_width, p.image_height, p.grid_width, p.grid_height),
                   SaliencyGrid(p.grid_width, p.grid_height),
                   FeatureGrid(1, 1, 1, {0.0f}),
                   {},
                   {},
                   noise_seed,
                   g,
                   p};
  scene.image = render_image(g, p, noise_seed);

  scene.annotations.image_id = image_id;
  scene.annotations.plane = p.plane;
  scene.annotations.csp_center = g.csp;
  scene.annotations.segment = g.segment;
  scene.annotations.hc = {g.head_center, g.a, g.b, std::atan2(g.axis_major.y, g.axis_major.x)};

  const int segment_cluster = p.plane == Plane::TV ? 2 : 3;
  scene.true_landmarks = {{Structure::CSP, g.csp_landmark, 1}, {Structure::Segment, g.segment_landmark, segment_cluster}};

  // Saliency: Gaussian bumps at the true landmarks, scaled to peak 1.
  const std::size_t cells = static_cast<std::size_t>(p.grid_width) * p.grid_height;
  std::vector<double> sal(cells, 0.0);
  const double amplitude[2] = {1.0, 0.8};
  for (std::size_t k = 0; k < scene.true_landmarks.size(); ++k) {
    const Point2 c = pixel_to_grid(scene.true_landmarks[k].pixel, scene.meta);
    for (int y = 0; y < p.grid_height; ++y) {
      for (int x = 0; x < p.grid_width; ++x) {
        const double d2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
        sal[static_cast<std::size_t>(y) * p.grid_width + x] +=
            amplitude[k] * std::exp(-d2 / (2.0 * p.saliency_sigma * p.saliency_sigma));
      }
    }
  }
  const double peak = *std::max_element(sal.begin(), sal.end());
  Rng sal_noise = Rng(noise_seed).split(kSaliencyNoise);
  std::vector<float> sal_values(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    double v = sal[i] / peak;
    if (p.saliency_noise > 0.0) v += sal_noise.normal(0.0, p.saliency_noise);
    sal_values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  scene.saliency = SaliencyGrid(p.grid_width, p.grid_height, std::move(sal_values));

  // Features: prototype of the landmark owning the cell, background elsewhere.
  const auto protos = p.resolved_prototypes();
  std::vector<int> owner(cells, 0);
  for (const auto& t : scene.true_landmarks) {
    const Point2 c = pixel_to_grid(t.pixel, scene.meta);
    owner[static_cast<std::size_t>(std::lround(c.y)) * p.grid_width + static_cast<std::size_t>(std::lround(c.x))] = t.cluster;
  }
  Rng feat_noise = Rng(noise_seed).split(kFeatures);
  std::vector<float> feats(cells * static_cast<std::size_t>(p.feature_channels));
  for (std::size_t i = 0; i < cells; ++i) {
    const auto& proto = protos[static_cast<std::size_t>(owner[i])];
    for (int ch = 0; ch < p.feature_channels; ++ch) {
      double v = proto[static_cast<std::size_t>(ch)];
      if (p.feature_noise > 0.0) v += feat_noise.normal(0.0, p.feature_noise);
      feats[i * static_cast<std::size_t>(p.feature_channels) + static_cast<std::size_t>(ch)] = static_cast<float>(v);
    }
  }
  scene.features = FeatureGrid(p.grid_width, p.grid_height, p.feature_channels, std::move(feats));
  return scene;
}

SynthScene make_scene(std::uint64_t seed, const SceneParams& params, const std::string& image_id) {
  params.validate();
  Rng rng = Rng(seed).split(kGeometry);
  const int orientation = params.orientation != 0 ? params.orientation : (rng.bernoulli(0.5) ? 1 : -1);
  SceneGeometry g;
  g.a = rng.uniform(params.semi_major_min, params.semi_major_max);
  g.b = g.a * rng.uniform(params.aspect_min, params.aspect_max);
  const double tilt = rng.uniform(-params.max_tilt, params.max_tilt);
  g.axis_major = {std::cos(tilt), std::sin(tilt)};
  g.axis_minor = {-std::sin(tilt), std::cos(tilt)};
  g.head_center = {params.image_width / 2.0 + orientation * params.orientation_shift +
                       rng.uniform(-params.center_jitter, params.center_jitter),
                   params.image_height / 2.0 + rng.uniform(-params.center_jitter, params.center_jitter)};
  auto at = [&](double u, double v) { return g.head_center + (u * g.a) * g.axis_major + (v * g.b) * g.axis_minor; };
  const double s = orientation;
  g.csp = at(s * 0.30, 0.0);
  if (params.plane == Plane::TV) {
    const Point2 lv = at(-s * 0.22, -0.28);
    const Point2 half = (0.09 * g.a) * g.axis_major;
    g.segment = {lv - half, lv + half};
  } else {
    const Point2 cb = at(-s * 0.45, 0.0);
    const Point2 half = (0.28 * g.b) * g.axis_minor;
    g.segment = {cb - half, cb + half};
  }
  auto offset = [&]() -> Point2 {
    if (params.landmark_offset <= 0.0) return {};
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {params.landmark_offset * std::cos(angle), params.landmark_offset * std::sin(angle)};
  };
  g.csp_landmark = g.csp + offset();
  g.segment_landmark = g.segment.midpoint() + offset();
  return render_scene(g, seed, params, image_id);
}

SynthPair make_pair(const SynthScene& source, const PairParams& tf, std::optional<std::uint64_t> noise_seed,
                    const std::string& target_id) {
  const double w = source.params.image_width;
  const Point2 c = source.geometry.csp_landmark;
  const Point2 cf{tf.flip ? w - c.x : c.x, c.y};
  const auto truth = SimilarityTransform::compose(tf.flip, w, tf.translation, tf.rotation, tf.scale, cf + tf.translation);
  const auto g = source.geometry.transformed(truth.matrix);
  const std::string id = target_id.empty() ? source.meta.image_id + "_t" : target_id;
  return {source, render_scene(g, noise_seed.value_or(source.rng_seed), source.params, id), truth};
}

std::vector<SynthScene> make_cohort(int n, std::uint64_t seed, const SceneParams& params) {
  if (n < 0) throw Error(ErrorCode::BadParams, "scene count must be non-negative");
  std::vector<SynthScene> scenes;
  Rng seeds = Rng(seed).split(kCohort);
  for (int i = 0; i < n; ++i) {
    SceneParams p = params;
    p.plane = i % 2 == 0 ? Plane::TV : Plane::TC;
    char id[32];
    std::snprintf(id, sizeof id, "%s_%03d", p.plane == Plane::TV ? "tv" : "tc", i);
    scenes.push_back(make_scene(seeds.next_u64(), p, id));
  }
  return scenes;
}

Manifest write_dataset(const std::vector<SynthScene>& scenes, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  Manifest m;
  m.base_dir = dir;
  for (const auto& s : scenes) {
    ManifestImage img;
    img.id = s.meta.image_id;
    img.pixel_width = s.meta.pixel_width;
    img.pixel_height = s.meta.pixel_height;
    img.saliency_grid = img.id + ".saliency.slgd";
    img.feature_grid = img.id + ".features.slgd";
    img.image = img.id + ".pgm";
    img.plane = s.params.plane;
    img.annotations = s.annotations;
    write_grid(s.saliency, dir / img.saliency_grid);
    write_grid(s.features, dir / img.feature_grid);
    write_pgm(s.image, dir / *img.image);
    m.images.push_back(std::move(img));
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

EvalImage to_eval_image(const SynthScene& scene) {
  return {scene.meta.image_id, scene.params.plane, scene.meta.pixel_width, scene.meta.pixel_height,
          scene.annotations, scene.image, std::nullopt};
}

}  // namespace salient
