#include "barylab/covers.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace barylab;

namespace {

BallCover line_cover(int count, double radius) {
  BallCover c{ModelSpace::euclidean(1), {}, {}};
  for (int i = 0; i < count; ++i) c.elements.push_back({SpacePoint{static_cast<double>(i)}, radius, i});
  return c;
}

GroupAction shift(const ModelSpace& s, Vec by, int word_length) {
  return GroupAction{{Isometry::translation(s, by)}, word_length};
}

Vec v1(double x) { return (Vec(1) << x).finished(); }

// Strip [0, 10) x [0, 3] covered by a square lattice of balls, H = <shift by 10>.
BallCover strip_cover() {
  BallCover c{ModelSpace::euclidean(2), {}, {}};
  int label = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j <= 3; ++j) c.elements.push_back({SpacePoint{i + 0.5, static_cast<double>(j)}, 0.8, label++});
  return c;
}

}  // namespace

TEST_CASE("nerve of three pairwise intersecting balls") {
  const auto e2 = ModelSpace::euclidean(2);
  const std::vector<SpacePoint> c{{0, 0}, {1.5, 0}, {0.75, 1.3}};
  // Oracle: for an acute triangle the minimax point is the circumcentre, so the
  // balls share a point iff the circumradius is below the radius.
  const double a = e2.distance(c[0], c[1]), b = e2.distance(c[1], c[2]), d = e2.distance(c[0], c[2]);
  const double area = 0.5 * std::abs((c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]));
  const double circumradius = a * b * d / (4 * area);
  REQUIRE(std::abs(circumradius - 0.866346) < 1e-6);

  for (double r : {0.8, 1.0}) {
    REQUIRE(std::max({a, b, d}) < 2 * r);
    BallCover cover{e2, {{c[0], r, 0}, {c[1], r, 1}, {c[2], r, 2}}, {}};
    const auto n = build_nerve(cover);
    CHECK(n.vertices().size() == 3);
    CHECK(n.simplices_of_dim(1).size() == 3);
    CHECK(n.simplices_of_dim(2).size() == (circumradius < r ? 1u : 0u));
    const auto t = balls_intersect(e2, cover.elements);
    CHECK(t.nonempty == (circumradius < r));
    // Descent stops once a common point is certified, so only the empty case is sharp.
    if (t.nonempty)
      CHECK(t.value < 0);
    else
      CHECK(std::abs(t.value - (circumradius - r)) < 1e-6);
  }
}

TEST_CASE("nerve of disjoint and single balls") {
  const auto e2 = ModelSpace::euclidean(2);
  const auto two = build_nerve(BallCover{e2, {{SpacePoint{0, 0}, 1, 0}, {SpacePoint{5, 0}, 1, 1}}, {}});
  CHECK(two.vertices().size() == 2);
  CHECK(two.simplices_of_dim(1).empty());
  const auto one = build_nerve(BallCover{e2, {{SpacePoint{0, 0}, 1, 0}}, {}});
  CHECK(one.size() == 1);
}

TEST_CASE("tangency") {
  const auto e2 = ModelSpace::euclidean(2);
  // Two open balls touching at one point are disjoint.
  CHECK_FALSE(balls_intersect(e2, {{SpacePoint{0, 0}, 1, 0}, {SpacePoint{2, 0}, 1, 1}}).nonempty);
  // Three balls through a common boundary point cannot be decided numerically.
  const double r = 1.0;
  std::vector<Ball> balls;
  for (int k = 0; k < 3; ++k) {
    const double t = 2 * testing::kPi * k / 3;
    balls.push_back({SpacePoint{r * std::cos(t), r * std::sin(t)}, r, k});
  }
  try {
    balls_intersect(e2, balls);
    FAIL("expected indeterminate_intersection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::indeterminate_intersection);
  }
}

TEST_CASE("adjacency") {
  const auto cover = line_cover(10, 1.0);
  const auto trivial = adjacency(cover, GroupAction{});
  CHECK(trivial.elements.size() == 10);

  const auto adj = adjacency(cover, shift(cover.space, v1(10), 2));
  std::set<double> extra;
  for (const auto& el : adj.elements)
    if (el.group != 0) extra.insert(el.ball.center[0]);
  CHECK(extra == std::set<double>{-1.0, 10.0});
  for (std::size_t i = 0; i < 10; ++i) CHECK(adj.elements[i].group == 0);

  const auto far = adjacency(cover, shift(cover.space, v1(100), 2));
  CHECK(far.elements.size() == 10);

  try {
    adjacency(cover, shift(cover.space, v1(10), 1));
    FAIL("expected enumeration_bound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::enumeration_bound);
  }
}

TEST_CASE("H-fineness") {
  const auto cover = line_cover(10, 1.0);
  CHECK(is_H_fine(cover, GroupTable(cover.space, shift(cover.space, v1(10), 2))));
  const BallCover big{ModelSpace::euclidean(1), {{SpacePoint{0}, 6, 0}}, {}};
  CHECK_FALSE(is_H_fine(big, GroupTable(big.space, shift(big.space, v1(10), 2))));
  CHECK(is_H_fine(big, GroupTable::trivial(big.space)));
}

TEST_CASE("fine covers have no edge between an element and its translate") {
  const auto cover = strip_cover();
  const GroupTable table(cover.space, shift(cover.space, (Vec(2) << 10, 0).finished(), 2));
  REQUIRE(is_H_fine(cover, table));
  const auto adj = adjacency(cover, table);
  const auto nerve = build_nerve(adj);
  for (const auto& e : nerve.simplices_of_dim(1)) CHECK(adj.base_of(e[0]) != adj.base_of(e[1]));
}

TEST_CASE("project_to_nerve examples") {
  const auto e2 = ModelSpace::euclidean(2);
  BallCover one{e2, {{SpacePoint{0, 0}, 1, 0}, {SpacePoint{5, 0}, 1, 1}}, {}};
  const auto adj1 = adjacency(one, GroupAction{});
  const auto p = project_to_nerve(adj1, SpacePoint{0.2, 0.1});
  CHECK(p.simplex == Simplex{adj1.encode(0, 0)});
  CHECK(p.weights == std::vector<double>{1.0});

  BallCover two{e2, {{SpacePoint{0, 0}, 1, 0}, {SpacePoint{1, 0}, 1, 1}}, {}};
  const auto q = project_to_nerve(adjacency(two, GroupAction{}), SpacePoint{0.5, 0.3});
  REQUIRE(q.weights.size() == 2);
  CHECK(std::abs(q.weights[0] - 0.5) < 1e-12);
  CHECK(std::abs(q.weights[1] - 0.5) < 1e-12);

  // Tent values at the centre of U: x_U = 1, x_V = 4/3 - 1 = 1/3.
  BallCover skew{e2, {{SpacePoint{0, 0}, 1, 0}, {SpacePoint{1, 0}, 4.0 / 3.0, 1}}, {}};
  const auto r = project_to_nerve(adjacency(skew, GroupAction{}), SpacePoint{0, 0});
  REQUIRE(r.weights.size() == 2);
  CHECK(std::abs(r.weights[0] - 0.75) < 1e-12);
  CHECK(std::abs(r.weights[1] - 0.25) < 1e-12);

  try {
    project_to_nerve(adj1, SpacePoint{3, 3});
    FAIL("expected uncovered_point");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::uncovered_point);
  }
}

TEST_CASE("psi weights, support and equivariance") {
  const auto cover = strip_cover();
  const GroupTable table(cover.space, shift(cover.space, (Vec(2) << 10, 0).finished(), 2));
  const auto adj = adjacency(cover, table);
  const auto nerve = build_nerve(adj);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(0, 10), uy(0, 3);
  for (int i = 0; i < 1000; ++i) {
    const SpacePoint q{ux(rng), uy(rng)};
    const auto p = project_to_nerve(adj, q);
    double sum = 0;
    for (double w : p.weights) {
      CHECK(w > 0);
      sum += w;
    }
    CHECK(std::abs(sum - 1) < 1e-9);
    CHECK(nerve.contains(p.simplex));
    for (const auto& el : adj.elements)
      if (cover.space.distance(q, el.ball.center) < el.ball.radius) {
        const int id = adj.encode(el.base, el.group);
        CHECK(std::binary_search(p.simplex.begin(), p.simplex.end(), id));
      }
  }

  // Orbit pairs (q, hq) with h the generator.
  const int h = 1;
  for (int i = 0; i < 100; ++i) {
    const SpacePoint q{ux(rng), uy(rng)};
    const auto hq = table.element(h).apply(q);
    const auto lhs = project_equivariant(adj, hq);
    const auto rhs = translate(adj, h, project_equivariant(adj, q));
    CHECK(lhs.simplex == rhs.simplex);
    REQUIRE(lhs.weights.size() == rhs.weights.size());
    for (std::size_t k = 0; k < lhs.weights.size(); ++k) CHECK(std::abs(lhs.weights[k] - rhs.weights[k]) < 1e-12);
  }
}

TEST_CASE("diam_K_Kout") {
  const auto e2 = ModelSpace::euclidean(2);
  const std::vector<SpacePoint> k{{0, 0}, {1, 0}};
  const std::vector<SpacePoint> kout{{0, 0}, {3, 4}};
  CHECK(diam_K_Kout(e2, GroupTable::trivial(e2), k, kout, 0.1) == doctest::Approx(5));

  // Rotation by 2pi/3 about the z-axis; K hugs the axis so it meets its rotates.
  const auto e3 = ModelSpace::euclidean(3);
  const GroupTable rot(e3, GroupAction{{Isometry::rotation(e3, 0, 1, 2 * testing::kPi / 3)}, 2});
  const std::vector<SpacePoint> k3{{0.01, 0, 0}, {0, 0.01, 0}, {0, 0, 1}};
  const SpacePoint p{5, 0, 0};
  double oracle = 0;
  for (int n = 0; n < 3; ++n) {
    const double a = 2 * testing::kPi * n / 3;
    oracle = std::max(oracle, e3.distance(p, SpacePoint{5 * std::cos(a), 5 * std::sin(a), 0}));
  }
  CHECK(std::abs(diam_K_Kout(e3, rot, k3, {p}, 0.1) - oracle) < 1e-9);

  std::vector<SpacePoint> bigger{p, SpacePoint{0, 0, 7}};
  CHECK(diam_K_Kout(e3, rot, k3, bigger, 0.1) >= diam_K_Kout(e3, rot, k3, {p}, 0.1));
}

TEST_CASE("group enumeration is duplicate free") {
  const auto e3 = ModelSpace::euclidean(3);
  const GroupTable rot(e3, GroupAction{{Isometry::rotation(e3, 0, 1, 2 * testing::kPi / 3)}, 4});
  CHECK(rot.size() == 3);
  for (int a = 0; a < rot.size(); ++a) CHECK(rot.compose(a, rot.inverse(a)) == 0);
}
