#include "barylab/barycenters.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace barylab;
using testing::kPi;
using testing::random_point;

namespace {

std::vector<SpacePoint> equilateral() { return {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}; }

std::vector<SpacePoint> circle_triple(const ModelSpace& c) {
  return {c.circle_point(0), c.circle_point(2 * kPi / 3), c.circle_point(4 * kPi / 3)};
}

// Replays the certificate numbers from scratch.
void check_replay(const ModelSpace& s, const BarycenterCertificate& c, const std::vector<SpacePoint>& P,
                  const std::vector<SpacePoint>& Q) {
  double worst = 0;
  for (const auto& p : P) worst = std::max(worst, s.distance(c.point, p));
  const double dP = diameter(s, P);
  CHECK(std::abs(worst / dP - c.achieved_lambda) < 10 * s.tol());
  REQUIRE(c.relative_slacks.size() == Q.size());
  for (std::size_t i = 0; i < Q.size(); ++i) {
    auto pq = P;
    pq.push_back(Q[i]);
    CHECK(std::abs(diameter(s, pq) - s.distance(c.point, Q[i]) - c.relative_slacks[i]) < 10 * s.tol());
  }
}

}  // namespace

TEST_CASE("lambda_of examples") {
  const auto e2 = ModelSpace::euclidean(2);
  CHECK(lambda_of(e2, {0.5, 0}, {SpacePoint{0, 0}, SpacePoint{1, 0}}) == doctest::Approx(0.5));
  CHECK(lambda_of(e2, {0, 0}, {SpacePoint{0, 0}, SpacePoint{1, 0}}) == doctest::Approx(1));
  const SpacePoint circumcentre{0.5, std::sqrt(3.0) / 6};
  CHECK(std::abs(lambda_of(e2, circumcentre, equilateral()) - 1 / std::sqrt(3.0)) < 1e-12);
  CHECK_THROWS_AS(lambda_of(e2, {0, 0}, {SpacePoint{1, 1}, SpacePoint{1, 1}}), Error);
}

TEST_CASE("solve_barycenter examples") {
  const auto e2 = ModelSpace::euclidean(2);
  BarycenterProblem seg{e2, {{0, 0}, {2, 0}}, {}, std::nullopt};
  const auto c = solve_barycenter(seg, 0.5);
  REQUIRE(c.status == BarycenterStatus::found);
  CHECK(e2.distance(c.point, {1, 0}) < 1e-6);
  CHECK(c.achieved_lambda <= 0.5 + 1e-9);

  BarycenterProblem square{e2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, std::nullopt};
  const auto s = solve_barycenter(square, 0.75);
  REQUIRE(s.status == BarycenterStatus::found);
  CHECK(s.achieved_lambda <= 0.75 + 1e-9);
  // Oracle: the centre of the square, (sqrt2/2)/sqrt2.
  CHECK(std::abs(s.achieved_lambda - 0.5) < 1e-6);
  check_replay(e2, s, square.P, square.Q);

  BarycenterProblem point{e2, {{3, 4}, {3, 4}}, {}, std::nullopt};
  const auto p = solve_barycenter(point, 0.5);
  CHECK(p.status == BarycenterStatus::found);
  CHECK(p.achieved_lambda == 0.0);
  CHECK(e2.distance(p.point, {3, 4}) == 0.0);
}

TEST_CASE("circle obstruction") {
  const auto c1 = ModelSpace::circle(1);
  const auto P = circle_triple(c1);
  CHECK(std::abs(diameter(c1, P) - std::sqrt(3.0)) < 1e-9);
  SolveOptions opts;
  opts.resolution = 1e-3;
  for (double lambda : {0.5, 0.9, 0.99}) {
    const auto cert = solve_barycenter({c1, P, {}, std::nullopt}, lambda, opts);
    CHECK(cert.status == BarycenterStatus::not_found);
    CHECK(cert.lambda_bound >= lambda);
    CHECK(cert.lambda_bound <= 1.0);
  }
}

TEST_CASE("relative obstruction on the circle") {
  const auto c1 = ModelSpace::circle(1);
  // Chord sqrt3 (1 - 1e-3): half-angle asin of half the chord.
  const double half = std::asin(std::sqrt(3.0) * (1 - 1e-3) / 2);
  const std::vector<SpacePoint> P{c1.circle_point(-half), c1.circle_point(half)};
  const std::vector<SpacePoint> Q{c1.circle_point(kPi)};
  SolveOptions opts;
  opts.resolution = 1e-3;
  const auto cert = solve_barycenter({c1, P, Q, std::nullopt}, 0.9, opts);
  CHECK(cert.status == BarycenterStatus::not_found);
  CHECK(cert.lambda_bound > 0.9);
  CHECK(cert.lambda_bound < 1.0);
}

TEST_CASE("cat0 midpoint rule") {
  const auto e2 = ModelSpace::euclidean(2);
  const auto seg = cat0_midpoint_rule(e2, {SpacePoint{0, 0}, SpacePoint{1, 0}}, {});
  CHECK(e2.distance(seg.point, {0.5, 0}) < 1e-12);
  CHECK(seg.achieved_lambda == doctest::Approx(0.5));

  const auto tri = cat0_midpoint_rule(e2, equilateral(), {});
  CHECK(std::abs(tri.achieved_lambda - std::sqrt(3.0) / 2) < 1e-12);
  CHECK(e2.distance(tri.point, {0.5, 0}) < 1e-12);  // first farthest pair is (0, 1)

  CHECK_THROWS_AS(cat0_midpoint_rule(ModelSpace::circle(1), {SpacePoint{1, 0}, SpacePoint{0, 1}}, {}), Error);

  std::mt19937_64 rng(17);
  const auto h2 = ModelSpace::hyperboloid(2);
  for (int i = 0; i < 1000; ++i) {
    const auto c = random_point(h2, rng, 1.0);
    std::vector<SpacePoint> P, Q;
    while (P.size() < 3) {
      const auto p = random_point(h2, rng, 3.0);
      if (h2.distance(p, c) <= 0.5) P.push_back(p);
    }
    for (int k = 0; k < 5; ++k) Q.push_back(random_point(h2, rng, 2.0));
    if (diameter(h2, P) == 0) continue;
    const auto cert = cat0_midpoint_rule(h2, P, Q);
    CHECK(cert.achieved_lambda <= std::sqrt(3.0) / 2 + 1e-9);
    CHECK(cert.min_slack() >= -1e-9);
    check_replay(h2, cert, P, Q);
  }
}

TEST_CASE("circle arc rule") {
  const auto c1 = ModelSpace::circle(1);
  const double half = std::asin(0.25);
  const auto two = circle_arc_rule(c1, {c1.circle_point(1 - half), c1.circle_point(1 + half)}, {});
  REQUIRE(two.status == BarycenterStatus::found);
  CHECK(std::abs(c1.circle_angle(two.point) - 1) < 1e-12);
  CHECK(two.achieved_lambda <= 0.5 + 1e-9);

  const auto one = circle_arc_rule(c1, {c1.circle_point(2)}, {});
  CHECK(one.achieved_lambda == 0.0);
  CHECK(c1.distance(one.point, c1.circle_point(2)) < 1e-12);

  CHECK_THROWS_AS(circle_arc_rule(c1, circle_triple(c1), {}), Error);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-0.4, 0.4), base(0, 2 * kPi);
  for (int i = 0; i < 1000; ++i) {
    const double a = base(rng);
    std::vector<SpacePoint> P, Q;
    for (int k = 0; k < 3; ++k) P.push_back(c1.circle_point(a + u(rng)));
    for (int k = 0; k < 2; ++k) Q.push_back(c1.circle_point(a + u(rng)));
    auto all = P;
    all.insert(all.end(), Q.begin(), Q.end());
    if (diameter(c1, all) > 0.8) continue;
    const auto cert = circle_arc_rule(c1, P, Q);
    CHECK(cert.status == BarycenterStatus::found);
    CHECK(cert.achieved_lambda <= 0.5 + 1e-9);
    CHECK(cert.min_slack() >= -1e-9);
  }
}

TEST_CASE("has_barycenters_sample") {
  const auto e2 = ModelSpace::euclidean(2);
  CHECK(has_barycenters_sample(e2, std::sqrt(3.0) / 2, 5.0, 300, 1).pass_rate == 1.0);

  const auto c1 = ModelSpace::circle(1);
  CHECK(has_barycenters_sample(c1, 0.5, 0.8, 300, 1).pass_rate == 1.0);
  const auto obstructed = has_barycenters_sample(c1, 0.99, std::sqrt(3.0), 50, 1);
  CHECK(obstructed.witness_planted);
  CHECK(obstructed.pass_rate < 1.0);
  CHECK_FALSE(obstructed.failures.empty());

  const auto again = has_barycenters_sample(c1, 0.99, std::sqrt(3.0), 50, 1);
  CHECK(again.passed == obstructed.passed);
  CHECK(again.worst_lambda == obstructed.worst_lambda);
}

TEST_CASE("found certificates are monotone in lambda") {
  const auto e2 = ModelSpace::euclidean(2);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 20; ++i) {
    std::vector<SpacePoint> P{random_point(e2, rng), random_point(e2, rng), random_point(e2, rng)};
    std::vector<SpacePoint> Q{random_point(e2, rng)};
    const auto c = solve_barycenter({e2, P, Q, std::nullopt}, 0.7);
    if (c.status != BarycenterStatus::found) continue;
    CHECK(lambda_of(e2, c.point, P) <= 0.8 + 1e-9);
    CHECK(solve_barycenter({e2, P, Q, std::nullopt}, 0.8).status == BarycenterStatus::found);
  }
}

TEST_CASE("scale equivariance in the plane") {
  const auto e2 = ModelSpace::euclidean(2);
  const std::vector<SpacePoint> P{{0, 0}, {2, 0.3}, {0.7, 1.9}};
  const std::vector<SpacePoint> Q{{3, 3}};
  const auto base = cat0_midpoint_rule(e2, P, Q);
  const auto solved = solve_barycenter({e2, P, Q, std::nullopt}, 0.8);
  for (double s : {0.5, 2.0}) {
    std::vector<SpacePoint> sP, sQ;
    for (const auto& p : P) sP.emplace_back(p.coords * s);
    for (const auto& q : Q) sQ.emplace_back(q.coords * s);
    const auto scaled = cat0_midpoint_rule(e2, sP, sQ);
    CHECK(std::abs(scaled.achieved_lambda - base.achieved_lambda) < 1e-12);
    CHECK((scaled.point.coords - base.point.coords * s).norm() < 1e-12);
    CHECK(std::abs(scaled.relative_slacks[0] - s * base.relative_slacks[0]) < 1e-12);
    const auto sv = solve_barycenter({e2, sP, sQ, std::nullopt}, 0.8);
    CHECK(sv.status == solved.status);
    CHECK(std::abs(sv.achieved_lambda - solved.achieved_lambda) < 1e-6);
  }
}

TEST_CASE("centroid of the regular simplex with edge sqrt2") {
  for (int n = 1; n <= 4; ++n) {
    // Vertices e_0..e_n of R^{n+2}; the extra basis vector plays a room vertex.
    const auto s = ModelSpace::euclidean(n + 2);
    std::vector<SpacePoint> P;
    for (int i = 0; i <= n; ++i) P.emplace_back(Vec::Unit(n + 2, i));
    const std::vector<SpacePoint> Q{SpacePoint(Vec::Unit(n + 2, n + 1))};
    Vec centroid = Vec::Zero(n + 2);
    for (const auto& p : P) centroid += p.coords / (n + 1);
    const SpacePoint b(centroid);
    const double expected = std::sqrt(n / (2.0 * (n + 1)));
    CHECK(std::abs(lambda_of(s, b, P) - expected) < 1e-9);
    CHECK(expected <= 1 / std::sqrt(2.0));
    for (double slack : relative_slacks(s, b, P, Q)) CHECK(slack >= -1e-9);
  }
}
