#include "barylab/minimax.hpp"

#include <algorithm>
#include <cmath>

namespace barylab {

double minimax_value(const ModelSpace& space, const std::vector<MinimaxTerm>& terms, const SpacePoint& x) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) v = std::max(v, t.scale * space.distance(x, t.anchor) + t.offset);
  return v;
}

namespace {

// Euclidean projection onto the probability simplex.
Vec project_simplex(const Vec& y) {
  const auto n = y.size();
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += u[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  return (y.array() - theta).max(0.0).matrix();
}

}  // namespace

Vec min_norm_hull_weights(const Mat& g) {
  const auto k = g.cols();
  Vec w = Vec::Constant(k, 1.0 / static_cast<double>(k));
  if (k == 1) return w;
  const Mat gram = g.transpose() * g;
  const double lip = std::max(gram.diagonal().sum(), 1e-300);
  for (int it = 0; it < 400; ++it) {
    const Vec next = project_simplex(w - (gram * w) / lip);
    if ((next - w).lpNorm<Eigen::Infinity>() < 1e-15) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

MinimaxResult minimax_descent(const ModelSpace& space, const std::vector<MinimaxTerm>& terms, const SpacePoint& start,
                              int max_iter, double stop_below) {
  MinimaxResult res;
  res.point = start;
  res.value = minimax_value(space, terms, start);
  if (terms.empty()) return res;

  double scale = 0.0;
  for (const auto& t : terms) scale = std::max(scale, std::abs(t.scale) * std::max(1.0, space.distance(start, t.anchor)));
  double step = std::max(scale, 1e-3);
  double eta = 1e-2 * step;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    if (res.value < stop_below) break;
    const auto basis = space.tangent_basis(res.point);
    const auto dim = static_cast<Eigen::Index>(basis.size());
    std::vector<Vec> grads;
    for (const auto& t : terms) {
      const double v = t.scale * space.distance(res.point, t.anchor) + t.offset;
      if (v < res.value - eta) continue;
      const Vec g = t.scale * space.distance_gradient(res.point, t.anchor);
      Vec c(dim);
      for (Eigen::Index i = 0; i < dim; ++i) c[i] = space.tangent_dot(res.point, g, basis[i]);
      grads.push_back(c);
    }
    Mat gm(dim, static_cast<Eigen::Index>(grads.size()));
    for (std::size_t i = 0; i < grads.size(); ++i) gm.col(static_cast<Eigen::Index>(i)) = grads[i];
    const Vec dir_coords = -(gm * min_norm_hull_weights(gm));
    const double norm = dir_coords.norm();

    bool improved = false;
    if (norm > 1e-14) {
      Vec dir = Vec::Zero(res.point.size());
      for (Eigen::Index i = 0; i < dim; ++i) dir += (dir_coords[i] / norm) * basis[i];
      double t = step;
      for (int halving = 0; halving < 60 && t > 1e-15; ++halving, t *= 0.5) {
        const SpacePoint cand = space.exp_map(res.point, t * dir);
        const double v = minimax_value(space, terms, cand);
        if (v < res.value) {
          res.point = cand;
          res.value = v;
          step = std::min(2.0 * t, std::max(scale, 1e-3));
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      // Stationary for this active set; tighten it and try again.
      eta *= 0.25;
      if (eta < 1e-15) break;
    }
  }
  return res;
}

}  // namespace barylab
