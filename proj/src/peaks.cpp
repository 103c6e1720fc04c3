#include "salient/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>

#include "salient/error.hpp"

namespace salient {
namespace {

constexpr double kLogFloor = 1e-12;

// 1D clipped running max along rows (dx) or columns (dy).
std::vector<float> window_max_1d(const std::vector<float>& in, int w, int h, int d, bool along_x) {
  std::vector<float> out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float m = in[static_cast<std::size_t>(y) * w + x];
      const int c = along_x ? x : y;
      const int n = along_x ? w : h;
      for (int k = std::max(0, c - d); k <= std::min(n - 1, c + d); ++k) {
        const std::size_t idx = along_x ? static_cast<std::size_t>(y) * w + k : static_cast<std::size_t>(k) * w + x;
        m = std::max(m, in[idx]);
      }
      out[static_cast<std::size_t>(y) * w + x] = m;
    }
  }
  return out;
}

}  // namespace

void PeakConfig::validate() const {
  if (min_distance < 1) throw Error(ErrorCode::OutOfRange, "min_distance must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::OutOfRange, "threshold must lie in [0, 1]");
}

SaliencyGrid max_filter(const SaliencyGrid& s, int d) {
  if (d < 1) throw Error(ErrorCode::OutOfRange, "maximum filter radius must be >= 1");
  const int w = s.width(), h = s.height();
  std::vector<float> values(s.values().begin(), s.values().end());
  values = window_max_1d(values, w, h, d, true);
  values = window_max_1d(values, w, h, d, false);
  return SaliencyGrid(w, h, std::move(values));
}

std::vector<Cell> local_maxima(const SaliencyGrid& s, const PeakConfig& cfg) {
  cfg.validate();
  const int w = s.width(), h = s.height();
  const SaliencyGrid smax = max_filter(s, cfg.min_distance);
  std::vector<char> candidate(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float v = s.at(x, y);
      if (v == smax.at(x, y) && v >= cfg.threshold) candidate[static_cast<std::size_t>(y) * w + x] = 1;
    }
  }

  // Collapse 8-connected equal-valued candidate plateaus.
  std::vector<char> seen(candidate.size(), 0);
  std::vector<Cell> result;
  std::vector<Cell> stack;
  std::vector<Cell> members;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!candidate[idx] || seen[idx]) continue;
      const float v = s.at(x, y);
      members.clear();
      stack.assign(1, Cell{x, y});
      seen[idx] = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        members.push_back(c);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Cell n{c.x + dx, c.y + dy};
            if (!s.contains(n)) continue;
            const std::size_t nidx = static_cast<std::size_t>(n.y) * w + n.x;
            if (candidate[nidx] && !seen[nidx] && s.at(n) == v) {
              seen[nidx] = 1;
              stack.push_back(n);
            }
          }
        }
      }
      if (members.size() == 1) {
        result.push_back(members.front());
        continue;
      }
      double cx = 0.0, cy = 0.0;
      for (const Cell& m : members) {
        cx += m.x;
        cy += m.y;
      }
      cx /= static_cast<double>(members.size());
      cy /= static_cast<double>(members.size());
      const Cell rounded{static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy))};
      if (std::find(members.begin(), members.end(), rounded) != members.end()) {
        result.push_back(rounded);
        continue;
      }
      // Non-convex plateau: nearest member to the centroid, ties by (y, x).
      std::sort(members.begin(), members.end(), [](Cell a, Cell b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
      Cell best = members.front();
      double best_d = std::hypot(best.x - cx, best.y - cy);
      for (const Cell& m : members) {
        const double dd = std::hypot(m.x - cx, m.y - cy);
        if (dd < best_d) {
          best = m;
          best_d = dd;
        }
      }
      result.push_back(best);
    }
  }
  std::sort(result.begin(), result.end(), [](Cell a, Cell b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
  return result;
}

double log_parabola_offset(double left, double center, double right) {
  const double ll = std::log(std::max(left, kLogFloor));
  const double lc = std::log(std::max(center, kLogFloor));
  const double lr = std::log(std::max(right, kLogFloor));
  const double curvature = 2.0 * lc - ll - lr;
  if (!(curvature > 0.0)) throw Error(ErrorCode::DegenerateFit, "log profile is not concave");
  return std::clamp(0.5 * (lr - ll) / curvature, -0.5, 0.5);
}

Point2 refine_subpixel(const SaliencyGrid& s, Cell p) {
  const Point2 seed{static_cast<double>(p.x), static_cast<double>(p.y)};
  if (p.x < 1 || p.y < 1 || p.x > s.width() - 2 || p.y > s.height() - 2) return seed;
  const double dx = log_parabola_offset(s.at(p.x - 1, p.y), s.at(p), s.at(p.x + 1, p.y));
  const double dy = log_parabola_offset(s.at(p.x, p.y - 1), s.at(p), s.at(p.x, p.y + 1));
  return {seed.x + dx, seed.y + dy};
}

LandmarkSet extract_landmarks(const SaliencyGrid& s, const ImageMeta& meta, const PeakConfig& cfg) {
  LandmarkSet out{meta.image_id, {}};
  for (const Cell& c : local_maxima(s, cfg)) {
    Landmark lm;
    lm.seed = c;
    try {
      lm.grid_pos = refine_subpixel(s, c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateFit) throw;
      lm.grid_pos = {static_cast<double>(c.x), static_cast<double>(c.y)};
    }
    lm.pixel_pos = grid_to_pixel(lm.grid_pos, meta);
    lm.saliency = s.at(c);
    out.landmarks.push_back(lm);
  }
  std::stable_sort(out.landmarks.begin(), out.landmarks.end(),
                   [](const Landmark& a, const Landmark& b) { return a.saliency > b.saliency; });
  return out;
}

}  // namespace salient
