#pragma once

#include "barylab/model_space.hpp"

#include <vector>

namespace barylab {

/// f(x) = scale * d(x, anchor) + offset
struct MinimaxTerm {
  SpacePoint anchor;
  double scale = 1.0;
  double offset = 0.0;
};

struct MinimaxResult {
  SpacePoint point;
  double value = 0.0;
  int iterations = 0;
};

double minimax_value(const ModelSpace& space, const std::vector<MinimaxTerm>& terms, const SpacePoint& x);

/// Minimises max_i f_i by descent along the min-norm element of the hull of
/// near-active gradients, with step halving. Stops early once the value drops
/// below `stop_below`.
MinimaxResult minimax_descent(const ModelSpace& space, const std::vector<MinimaxTerm>& terms, const SpacePoint& start,
                              int max_iter = 1000, double stop_below = -std::numeric_limits<double>::infinity());

/// Min-norm point of the convex hull of the columns of g; returns the weights.
Vec min_norm_hull_weights(const Mat& g);

}  // namespace barylab
