#pragma once

#include <functional>
#include <vector>

namespace salient {

struct NelderMeadOptions {
  int max_iterations = 256;
  /// Stop once every vertex lies within this distance of the best one.
  double diameter_tolerance = 1e-3;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Derivative-free minimization. The initial simplex is x0 plus one vertex per
/// axis offset by `steps[i]`.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const std::vector<double>& steps, const NelderMeadOptions& opts = {});

}  // namespace salient
