#pragma once

// Brute-force reference computations for tests. Deliberately written without
// the library's algorithms (no separable filters, no flood fill, no matrix
// folding) so they check the implementation independently.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "salient/geometry.hpp"
#include "salient/grids.hpp"
#include "salient/rng.hpp"

namespace salient::oracle {

/// Direct (2d+1)^2 scan with clipping.
inline float window_max(const SaliencyGrid& s, int x, int y, int d) {
  float m = -std::numeric_limits<float>::infinity();
  for (int yy = y - d; yy <= y + d; ++yy) {
    for (int xx = x - d; xx <= x + d; ++xx) {
      if (xx >= 0 && yy >= 0 && xx < s.width() && yy < s.height()) m = std::max(m, s.at(xx, yy));
    }
  }
  return m;
}

/// Thresholded maxima followed by the plateau rule, using union-find over all
/// candidate pairs.
inline std::vector<Cell> local_maxima(const SaliencyGrid& s, int d, double t) {
  std::vector<Cell> cand;
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      if (s.at(x, y) == window_max(s, x, y, d) && s.at(x, y) >= t) cand.push_back({x, y});
    }
  }
  std::vector<std::size_t> parent(cand.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = i + 1; j < cand.size(); ++j) {
      const bool adjacent = std::abs(cand[i].x - cand[j].x) <= 1 && std::abs(cand[i].y - cand[j].y) <= 1;
      if (adjacent && s.at(cand[i]) == s.at(cand[j])) parent[find(i)] = find(j);
    }
  }
  std::vector<Cell> out;
  for (std::size_t root = 0; root < cand.size(); ++root) {
    if (find(root) != root) continue;
    std::vector<Cell> members;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (find(i) == root) members.push_back(cand[i]);
    }
    double cx = 0, cy = 0;
    for (auto m : members) {
      cx += m.x;
      cy += m.y;
    }
    cx /= members.size();
    cy /= members.size();
    const Cell r{static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy))};
    if (std::find(members.begin(), members.end(), r) != members.end()) {
      out.push_back(r);
      continue;
    }
    // members are already in row-major order, first strict minimum wins
    Cell best = members.front();
    for (auto m : members) {
      if (std::hypot(m.x - cx, m.y - cy) < std::hypot(best.x - cx, best.y - cy)) best = m;
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end(), [](Cell a, Cell b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  return out;
}

/// Silhouette coefficient straight from its definition.
inline double silhouette(const std::vector<std::vector<double>>& pts, const std::vector<int>& labels) {
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t d = 0; d < pts[i].size(); ++d) s += (pts[i][d] - pts[j][d]) * (pts[i][d] - pts[j][d]);
    return std::sqrt(s);
  };
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double a_sum = 0;
    int a_n = 0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i && labels[j] == labels[i]) {
        a_sum += dist(i, j);
        ++a_n;
      }
    }
    if (a_n == 0) continue;  // singleton
    const double a = a_sum / a_n;
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == labels[i]) continue;
      double s = 0;
      int n = 0;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (labels[j] == c) {
          s += dist(i, j);
          ++n;
        }
      }
      if (n > 0) b = std::min(b, s / n);
    }
    if (std::max(a, b) > 0) total += (b - a) / std::max(a, b);
  }
  return total / pts.size();
}

/// Flip, translate, then rotate/scale about the center, one primitive at a
/// time with explicit trigonometry.
inline Point2 similarity_steps(Point2 p, bool flip, double width, Point2 t, double theta, double rho, Point2 center) {
  if (flip) p.x = width - p.x;
  p = p + t;
  const Point2 r = p - center;
  // clockwise in y-up terms == counter-clockwise on a y-down screen
  const Point2 rotated{std::cos(theta) * r.x + std::sin(theta) * r.y, -std::sin(theta) * r.x + std::cos(theta) * r.y};
  return center + rho * rotated;
}

inline SaliencyGrid random_grid(Rng& rng, int w, int h, int levels = 0) {
  std::vector<float> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) {
    x = levels > 0 ? static_cast<float>(rng.below(static_cast<std::uint64_t>(levels) + 1)) / levels
                   : static_cast<float>(rng.uniform());
  }
  return SaliencyGrid(w, h, std::move(v));
}

}  // namespace salient::oracle
