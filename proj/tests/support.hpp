#pragma once

#include "barylab/model_space.hpp"

#include <cmath>
#include <random>

namespace testing {

inline constexpr double kPi = 3.14159265358979323846;

inline barylab::SpacePoint random_point(const barylab::ModelSpace& s, std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::normal_distribution<double> g;
  barylab::Vec v;
  switch (s.kind()) {
    case barylab::SpaceKind::euclidean:
      v = barylab::Vec(s.dim());
      for (auto& x : v) x = u(rng);
      return barylab::SpacePoint(v);
    case barylab::SpaceKind::hyperboloid:
      v = barylab::Vec(s.dim());
      for (auto& x : v) x = u(rng);
      return s.lift(v);
    case barylab::SpaceKind::circle:
    case barylab::SpaceKind::sphere:
      v = barylab::Vec(s.ambient_dim());
      for (auto& x : v) x = g(rng);
      return barylab::SpacePoint(v * (s.radius() / v.norm()));
    case barylab::SpaceKind::finite: {
      std::uniform_int_distribution<int> i(0, static_cast<int>(s.distance_matrix().rows()) - 1);
      return barylab::SpacePoint{static_cast<double>(i(rng))};
    }
  }
  return {};
}

}  // namespace testing
