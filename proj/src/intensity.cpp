#include "salient/intensity.hpp"

#include <algorithm>
#include <cmath>

#include "salient/error.hpp"
#include "salient/optimize.hpp"

namespace salient {
namespace {

bool has_variance(const Image& img) {
  const auto px = img.pixels();
  return std::any_of(px.begin(), px.end(), [&](float v) { return v != px.front(); });
}

// NCC on a pyramid level with downsampling factor `f`: level pixel q maps to
// full-resolution point f*q.
std::optional<double> level_ncc(const Image& target, const Image& source, const Matrix3& inverse, double f,
                                std::size_t& count) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  count = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      const Point2 p = transform_point(inverse, {f * (x + 0.5), f * (y + 0.5)});
      float b = 0.0f;
      if (!sample_bilinear(source, p.x / f, p.y / f, b)) continue;
      const double a = target(x, y);
      sa += a;
      sb += b;
      saa += a * a;
      sbb += double{b} * b;
      sab += a * b;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  const double n = static_cast<double>(count);
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (!(va > 0.0) || !(vb > 0.0)) return std::nullopt;
  return std::clamp((sab - sa * sb / n) / std::sqrt(va * vb), -1.0, 1.0);
}

SimilarityTransform with_params(const SimilarityTransform& init, const std::vector<double>& p) {
  return SimilarityTransform::compose(init.flipped, init.flip_width, {p[0], p[1]}, p[2], std::exp(p[3]), init.center);
}

}  // namespace

std::optional<double> ncc(const Image& target, const Image& source, const Matrix3& tf, std::size_t* overlap) {
  std::size_t count = 0;
  auto v = level_ncc(target, source, invert_affine(tf), 1.0, count);
  if (overlap) *overlap = count;
  return v;
}

IntensityResult register_intensity(const Image& source, const Image& target, const SimilarityTransform& init,
                                   const IntensityOptions& opts) {
  if (source.empty() || target.empty()) throw Error(ErrorCode::BadParams, "images must be nonempty");
  if (!has_variance(source) || !has_variance(target)) {
    throw Error(ErrorCode::FlatImage, "image has zero intensity variance; NCC undefined");
  }

  for (int factor : opts.pyramid) {
    if (factor < 1 || (factor & (factor - 1)) != 0) {
      throw Error(ErrorCode::BadParams, "pyramid factors must be powers of two");
    }
  }

  IntensityResult result;
  result.transform = init;
  result.initial_ncc = ncc(target, source, init.matrix).value_or(-1.0);

  std::vector<double> params = {init.translation.x, init.translation.y, init.rotation, std::log(init.scale)};
  for (int factor : opts.pyramid) {
    Image tgt = target, src = source;
    // Each 2x reduction maps level pixel q onto full-resolution [2q, 2q+2).
    for (int f = factor; f > 1; f /= 2) {
      tgt = downsample2(tgt);
      src = downsample2(src);
    }
    const auto f = static_cast<double>(factor);
    const double min_count = opts.min_overlap_fraction * static_cast<double>(tgt.pixels().size());
    auto objective = [&](const std::vector<double>& p) {
      const auto tf = with_params(init, p);
      const double det = affine_determinant(tf.matrix);
      if (!(std::abs(det) >= 1e-12)) return 1.0;
      std::size_t count = 0;
      const auto v = level_ncc(tgt, src, invert_affine(tf.matrix), f, count);
      if (!v || static_cast<double>(count) < min_count) return 1.0;
      return -*v;
    };
    NelderMeadOptions nm;
    nm.max_iterations = opts.max_iterations_per_level;
    nm.diameter_tolerance = opts.diameter_tolerance;
    const std::vector<double> steps = {opts.steps[0] * f, opts.steps[1] * f, opts.steps[2], opts.steps[3]};
    const auto found = nelder_mead(objective, params, steps, nm);
    params = found.x;
    result.iterations.push_back(found.iterations);
  }

  const auto candidate = with_params(init, params);
  const double final_ncc = ncc(target, source, candidate.matrix).value_or(-1.0);
  if (final_ncc >= result.initial_ncc) {
    result.transform = candidate;
    result.final_ncc = final_ncc;
  } else {
    result.final_ncc = result.initial_ncc;
  }
  return result;
}

}  // namespace salient
