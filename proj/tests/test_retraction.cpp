#include "barylab/retraction.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace barylab;
using testing::kPi;
using testing::random_point;

namespace {

const ModelSpace e2 = ModelSpace::euclidean(2);
const ModelSpace h2 = ModelSpace::hyperboloid(2);

Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }

ConvexBody h2_axis() { return ConvexBody::line(h2, h2.origin(), h2.lift(v2(1, 0))); }

Scene segment_scene() {
  Scene s;
  s.space = e2;
  s.body = ConvexBody::segment(e2, {0, 0}, {1, 0});
  s.eps = 1.0;
  s.R = 2.0;
  s.delta = 0.3;
  s.delta_prime = 0.9;
  s.rule = BarycenterRule::minimax;
  s.density = 100;
  s.interior_samples = 50;
  s.continuity_pairs = 20;
  return s;
}

Scene point_scene() {
  Scene s;
  s.space = e2;
  s.body = ConvexBody::point(e2, {0, 0});
  s.eps = 1.0;
  s.R = 2.0;
  s.delta = 0.14;
  s.delta_prime = 0.9;
  s.rule = BarycenterRule::minimax;
  s.density = 100;
  s.interior_samples = 100;
  s.interior_min_distance = 0.25;
  s.continuity_pairs = 20;
  return s;
}

}  // namespace

TEST_CASE("closest point projection") {
  const auto seg = ConvexBody::segment(e2, {0, 0}, {1, 0});
  const auto p = closest_point_projection(seg, {0.5, 2});
  CHECK((p.coords - v2(0.5, 0)).norm() < 1e-12);
  CHECK(dist_to_C(seg, {0.5, 2}) == doctest::Approx(2));
  CHECK((closest_point_projection(seg, {0.25, 0}).coords - v2(0.25, 0)).norm() < 1e-12);
  CHECK(dist_to_C(seg, {0.25, 0}) < 1e-12);
  CHECK(dist_to_C(seg, {3, 0}) == doctest::Approx(2));

  // Point at distance 1 along the perpendicular to the x-axis at the origin.
  const auto axis = h2_axis();
  const auto x = h2.geodesic_point(h2.origin(), h2.lift(v2(0, 1)), 1.0);
  CHECK(std::abs(dist_to_C(axis, x) - 1) < 1e-12);
  CHECK(h2.distance(closest_point_projection(axis, x), h2.origin()) < 1e-12);
}

TEST_CASE("projection is idempotent and distance is convex") {
  std::mt19937_64 rng(12);
  const std::vector<ConvexBody> bodies{
      h2_axis(), ConvexBody::segment(h2, h2.lift(v2(-0.5, 0.2)), h2.lift(v2(0.7, -0.1))),
      ConvexBody::hull(h2, {h2.lift(v2(0, 0)), h2.lift(v2(1, 0)), h2.lift(v2(0.3, 0.8)), h2.lift(v2(0.2, 0.3))}),
      ConvexBody::hull(e2, {SpacePoint{0, 0}, SpacePoint{2, 0}, SpacePoint{1, 1.5}})};
  for (const auto& body : bodies) {
    const auto& s = body.space();
    for (int i = 0; i < 200; ++i) {
      const auto x = random_point(s, rng);
      const auto p = closest_point_projection(body, x);
      CHECK(s.distance(closest_point_projection(body, p), p) < 1e-8);
      CHECK(dist_to_C(body, p) < 1e-8);
      const auto y = random_point(s, rng);
      const double d = s.distance(x, y);
      if (d < 1e-3) continue;
      for (int k = 1; k < 10; ++k) {
        const double t = k * d / 10, h = d / 10;
        const double second = dist_to_C(body, s.geodesic_point(x, y, t - h)) +
                              dist_to_C(body, s.geodesic_point(x, y, t + h)) -
                              2 * dist_to_C(body, s.geodesic_point(x, y, t));
        CHECK(second >= -1e-8);
      }
    }
  }
}

TEST_CASE("hull projection against a brute force oracle") {
  const auto hull = ConvexBody::hull(e2, {SpacePoint{0, 0}, SpacePoint{2, 0}, SpacePoint{1, 1.5}});
  const std::vector<std::pair<Vec, Vec>> edges{{v2(0, 0), v2(2, 0)}, {v2(2, 0), v2(1, 1.5)}, {v2(1, 1.5), v2(0, 0)}};
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto x = random_point(e2, rng, 4);
    double best = 1e9;
    for (const auto& [a, b] : edges)
      for (int k = 0; k <= 20000; ++k) best = std::min(best, (x.coords - (a + (b - a) * (k / 20000.0))).norm());
    const double d = dist_to_C(hull, x);
    if (d == 0) continue;  // inside
    CHECK(std::abs(d - best) < 2e-4);
    CHECK(d <= best + 1e-12);
  }
}

TEST_CASE("normal flow") {
  const auto pt = ConvexBody::point(e2, {0, 0});
  CHECK((normal_flow(pt, {1, 0}, 2).coords - v2(3, 0)).norm() < 1e-12);
  CHECK((normal_flow(pt, {0.3, 0.4}, 0).coords - v2(0.3, 0.4)).norm() < 1e-12);
  try {
    normal_flow(pt, {0, 0}, 1);
    FAIL("expected undefined_normal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_normal);
  }

  const auto axis = h2_axis();
  const double eps = 1, R = 3;
  const auto q = axis.fermi(0.7, eps);
  const auto y = normal_flow(axis, q, R - eps);
  CHECK(std::abs(dist_to_C(axis, y) - R) < 1e-9);
  const auto [s, z] = axis.fermi_coords(y);
  CHECK(std::abs(s - 0.7) < 1e-9);
  CHECK(std::abs(z - R) < 1e-9);
}

TEST_CASE("flow to infinity") {
  const auto pt = ConvexBody::point(h2, h2.origin());
  const auto x = h2.lift(v2(0.5, 0));
  const auto xi = flow_to_infinity(pt, x);
  CHECK((xi.direction.normalized() - v2(1, 0)).norm() < 1e-12);
  const auto later = flow_to_infinity(pt, normal_flow(pt, x, 2.5));
  CHECK((later.direction.normalized() - xi.direction.normalized()).norm() < 1e-9);

  const auto axis = h2_axis();
  const auto a = flow_to_infinity(axis, axis.fermi(0, 1));
  const auto b = flow_to_infinity(axis, axis.fermi(1, 1));
  CHECK(visual_metric(h2, h2.origin(), a, b) > 0.01);
}

TEST_CASE("angle to C") {
  const auto pt = ConvexBody::point(e2, {0, 0});
  const SpacePoint q{1, 0};
  CHECK(angle_to_C(pt, q, normal_flow(pt, q, 0.5)) == doctest::Approx(kPi));
  CHECK(angle_to_C(pt, q, closest_point_projection(pt, q)) == doctest::Approx(0).epsilon(1e-12));
  // Explicit tangent computation: directions (0.5, 1) and (-1, 0) at q.
  const double expected = std::acos(-0.5 / std::sqrt(1.25));
  CHECK(std::abs(angle_to_C(pt, q, {1.5, 1}) - expected) < 1e-12);

  const auto axis = h2_axis();
  const auto qa = axis.fermi(0.2, 1);
  CHECK(std::abs(angle_to_C(axis, qa, normal_flow(axis, qa, 1)) - kPi) < 1e-9);
}

TEST_CASE("large angle escape") {
  const auto axis = h2_axis();
  const double eps = 1;
  const auto q = axis.fermi(0.3, eps);
  CHECK(check_large_angle_escape(axis, eps, q, normal_flow(axis, q, 0.5)));

  // In the plane, a direction at pi/2 - 0.1 from the way to C dips inside C_eps.
  const auto pt = ConvexBody::point(e2, {0, 0});
  const SpacePoint qe{1, 0};
  const double a = kPi / 2 - 0.1;  // angle between q' - q and -q
  const SpacePoint inward{1 - 0.5 * std::cos(a), 0.5 * std::sin(a)};
  CHECK(std::abs(angle_to_C(pt, qe, inward) - a) < 1e-12);
  CHECK_FALSE(check_large_angle_escape(pt, eps, qe, inward));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ang(kPi / 2 + 1e-3, kPi), len(0.01, 3);
  for (int i = 0; i < 200; ++i) {
    const double t = ang(rng), l = len(rng);
    const SpacePoint qp{1 - l * std::cos(t), l * std::sin(t)};
    CHECK(check_large_angle_escape(pt, eps, qe, qp));
  }

  try {
    check_large_angle_escape(pt, eps, SpacePoint{2, 0}, SpacePoint{3, 0});
    FAIL("expected precondition");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }
}

TEST_CASE("eps neighborhood samples") {
  const EpsNeighborhood seg{ConvexBody::segment(e2, {0, 0}, {1, 0}), 1.0, 1};
  for (const auto& p : seg.sample_sigma(200)) CHECK(std::abs(dist_to_C(seg.body, p) - 1) < 1e-9);
  for (const auto& p : seg.sample_region(0.2)) CHECK(dist_to_C(seg.body, p) <= 1 + 1e-9);

  const EpsNeighborhood line{h2_axis(), 1.0, 1};
  for (const auto& p : line.sample_sigma(100, 4.0)) {
    CHECK(std::abs(dist_to_C(line.body, p) - 1) < 1e-9);
    CHECK(line.body.fermi_coords(p).second > 0);
  }
  CHECK(line.contains(line.body.fermi(0, 0.5)));
  CHECK_FALSE(line.contains(line.body.fermi(0, 1.5)));
}

TEST_CASE("boundary grid around a segment") {
  const Scene scene = segment_scene();
  const PushOffGrid grid = build_boundary_grid(scene);
  CHECK(grid.uncovered == 0);
  CHECK(std::abs(grid.push_off_distance() - (scene.R - scene.eps)) < 1e-9);
  for (double a : grid.witness_angles) CHECK(std::abs(a - kPi) < 1e-9);
  for (std::size_t i = 0; i < grid.labels.size(); ++i) CHECK(std::abs(dist_to_C(scene.body, grid.labels[i]) - scene.R) < 1e-9);
  CHECK(grid.iota_diameter(true) <= grid.delta_prime);

  const auto small = check_small_relative(grid, kPi, 1, 20);
  CHECK(small.cond1);
  CHECK(small.cond2);
  CHECK(small.cond2_distance > scene.delta_prime);
  CHECK(std::abs(small.cond3_gate - kPi / 4) < 1e-12);
}

TEST_CASE("push-off by coning") {
  const Scene scene = point_scene();
  const PushOffGrid grid = build_boundary_grid(scene);
  SubdivisionOptions opts;
  opts.rule = scene.rule;
  const PushOff j(grid, scene.lambda, 1, opts);
  const auto& tower = j.tower();

  const int a = grid.adj.encode(0, 0);
  const auto la = tower.label(0, a);
  CHECK(tower.cone(0, NervePoint{{a}, {1.0}}).coords == la.coords);
  for (const auto& e : grid.nerve.simplices_of_dim(1)) {
    const auto mid = tower.cone(0, NervePoint{e, {0.5, 0.5}});
    const Vec oracle = 0.5 * (tower.label(0, e[0]).coords + tower.label(0, e[1]).coords);
    CHECK((mid.coords - oracle).norm() < 1e-12);
    break;
  }

  for (std::size_t i = 0; i < grid.boundary.size(); ++i) {
    if (!grid.boundary[i]) continue;
    const auto& q = grid.witnesses[i];
    const auto y = j.evaluate(q);
    CHECK(e2.distance(y, grid.labels[i]) <= scene.delta_prime + 1e-9);
    CHECK(angle_to_C(scene.body, q, y) >= 3 * kPi / 4 - 1e-6);
  }
}

TEST_CASE("retraction onto the circle matches radial projection") {
  const Scene scene = point_scene();
  const PushOffGrid grid = build_boundary_grid(scene);
  SubdivisionOptions opts;
  opts.rule = scene.rule;
  const PushOff j(grid, scene.lambda, 2, opts);
  for (const auto& q : grid.nbhd.sample_sigma(50)) CHECK(e2.distance(j.retract(q), q) <= 1e-8);
  // On the x-axis the construction is symmetric, so r is the radial projection.
  for (int i = 0; i < 100; ++i) {
    const double x = (i % 2 ? -1 : 1) * (0.3 + 0.7 * i / 100.0);
    const auto r = j.retract(SpacePoint{x, 0});
    CHECK(std::abs(r[0] - (x > 0 ? 1 : -1)) < 1e-6);
    CHECK(std::abs(r[1]) < 1e-6);
  }
}

TEST_CASE("pipeline on the Euclidean point scene") {
  const auto rep = run_pipeline(point_scene());
  CHECK_MESSAGE(rep.passed, rep.failure);
  CHECK(rep.max_identity_residual <= 1e-8);
  CHECK(rep.max_idempotence <= 1e-8);
  CHECK(rep.min_boundary_angle >= 3 * kPi / 4 - 1e-6);
  CHECK(rep.escape);
}

TEST_CASE("too large delta prime fails smallness condition (2)") {
  Scene s = point_scene();
  s.delta_prime = 1.5;  // R - eps = 1
  const auto rep = run_pipeline(s);
  CHECK_FALSE(rep.passed);
  CHECK(rep.failure == "smallness condition (2)");
  CHECK_FALSE(rep.retraction_attempted);
}
