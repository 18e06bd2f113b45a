#include "barylab/subdivision.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace barylab;

namespace {

SimplicialComplex edge() { return SimplicialComplex::closure({{0, 1}}); }
SimplicialComplex triangle() { return SimplicialComplex::closure({{0, 1, 2}}); }

VertexMap unit_edge() { return VertexMap{ModelSpace::euclidean(1), {{0, SpacePoint{0}}, {1, SpacePoint{1}}}}; }

VertexMap equilateral() {
  return VertexMap{ModelSpace::euclidean(2),
                   {{0, SpacePoint{0, 0}}, {1, SpacePoint{1, 0}}, {2, SpacePoint{0.5, std::sqrt(3.0) / 2}}}};
}

double max_top_diameter(const ShrinkResult& r) {
  double worst = 0;
  for (const auto& s : r.complex.simplices_of_dim(r.complex.dimension()))
    worst = std::max(worst, diameter(r.iota.target, r.iota.images(s)));
  return worst;
}

}  // namespace

TEST_CASE("one subdivision of an edge") {
  const auto r = shrinking_subdivide(edge(), unit_edge(), 0.5);
  CHECK(r.complex.vertices().size() == 3);
  int mid = -1;
  for (const auto& [v, src] : r.provenance.sources)
    if (src == Simplex{0, 1}) mid = v;
  REQUIRE(mid >= 0);
  CHECK(std::abs(r.iota.at(mid)[0] - 0.5) < 1e-12);
  for (const auto& e : r.complex.simplices_of_dim(1))
    CHECK(std::abs(diameter(r.iota.target, r.iota.images(e)) - 0.5) < 1e-12);
}

TEST_CASE("one subdivision of an equilateral triangle") {
  SubdivisionOptions opts;
  opts.rule = BarycenterRule::midpoint;
  const auto r = shrinking_subdivide(triangle(), equilateral(), std::sqrt(3.0) / 2, opts);
  CHECK(r.complex.simplices_of_dim(2).size() == 6);
  // Exhaustive oracle over the six sub-triangles.
  for (const auto& s : r.complex.simplices_of_dim(2)) {
    const auto pts = r.iota.images(s);
    double d = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i].coords - pts[j].coords).norm());
    CHECK(d <= std::sqrt(3.0) / 2 + 1e-9);
  }
}

TEST_CASE("zero dimensional complexes are unchanged") {
  const auto pts = SimplicialComplex::closure({{0}, {1}});
  const VertexMap iota{ModelSpace::euclidean(1), {{0, SpacePoint{0}}, {1, SpacePoint{3}}}};
  const auto r = shrinking_subdivide(pts, iota, 0.5);
  CHECK(r.complex.simplices() == pts.simplices());
  CHECK(r.record.rows.empty());
}

TEST_CASE("edge of length one, order three") {
  const auto r = iterate_subdivision(edge(), unit_edge(), 0.5, 3);
  CHECK(r.complex.vertices().size() == 9);
  CHECK(max_top_diameter(r) <= 0.125 + 1e-9);
  const auto rep = verify_shrinking(r.record, 1.0);
  CHECK(rep.ok);
  CHECK(rep.final_bound == doctest::Approx(0.125));
  CHECK(rep.image_bound == doctest::Approx(2.0));
  CHECK(rep.max_final_diam <= 0.125 + 1e-9);
  CHECK(rep.max_displacement_excess <= 1e-9);
  // Every vertex keeps its least containing original simplex.
  for (int v : r.complex.vertices()) {
    const auto orig = least_containing_simplex(edge(), r.provenance, {v});
    CHECK(edge().contains(orig));
  }
}

TEST_CASE("order zero is the identity") {
  const auto r = iterate_subdivision(edge(), unit_edge(), 0.5, 0);
  CHECK(r.complex.simplices() == edge().simplices());
  CHECK(r.record.original_diam == 1.0);
  for (const auto& row : r.record.rows) CHECK(row.diam_after == row.diam_before);
}

TEST_CASE("triangle, order two") {
  const double lambda = std::sqrt(3.0) / 2;
  const auto iota = equilateral();
  const auto r = iterate_subdivision(triangle(), iota, lambda, 2);
  const double d = map_diameter(triangle(), iota);
  CHECK(max_top_diameter(r) <= 0.75 * d + 1e-9);
  const auto rep = verify_shrinking(r.record, d);
  CHECK(rep.ok);
  CHECK(std::abs(rep.final_bound - 0.75 * d) < 1e-12);
  CHECK(std::abs(rep.image_bound - d / (1 - lambda)) < 1e-12);
  for (const auto& c : r.record.containment) CHECK(c.diam_contained <= c.diam_original + 1e-9);
}

TEST_CASE("collapsed maps have zero bounds") {
  const VertexMap iota{ModelSpace::euclidean(2), {{0, SpacePoint{1, 1}}, {1, SpacePoint{1, 1}}, {2, SpacePoint{1, 1}}}};
  const auto r = iterate_subdivision(triangle(), iota, 0.6, 2);
  const auto rep = verify_shrinking(r.record, 0.0);
  CHECK(rep.ok);
  CHECK(rep.final_bound == 0.0);
  CHECK(rep.max_final_diam == 0.0);
}

TEST_CASE("missing barycenters abort with the stage") {
  // A triple spread evenly over the circle has no 0.9-barycenter.
  const auto c1 = ModelSpace::circle(1);
  const VertexMap iota{c1, {{0, c1.circle_point(0)}, {1, c1.circle_point(2 * testing::kPi / 3)},
                            {2, c1.circle_point(4 * testing::kPi / 3)}}};
  SubdivisionOptions opts;
  opts.rule = BarycenterRule::solve;
  try {
    iterate_subdivision(triangle(), iota, 0.9, 1, opts);
    FAIL("expected NoBarycenter");
  } catch (const NoBarycenter& e) {
    CHECK(e.stage() == 1);
    CHECK(e.certificate().status != BarycenterStatus::found);
  }
}

TEST_CASE("subdivision is deterministic") {
  const auto a = iterate_subdivision(triangle(), equilateral(), 0.8, 2);
  const auto b = iterate_subdivision(triangle(), equilateral(), 0.8, 2);
  REQUIRE(a.iota.assignment.size() == b.iota.assignment.size());
  for (const auto& [v, p] : a.iota.assignment) CHECK((p.coords - b.iota.at(v).coords).norm() == 0.0);
}

TEST_CASE("equivariant tower") {
  // Balls of radius 0.6 at 0..4 on the line, H = <shift by 5>.
  const auto e1 = ModelSpace::euclidean(1);
  BallCover cover{e1, {}, {}};
  std::vector<SpacePoint> labels;
  for (int i = 0; i < 5; ++i) {
    cover.elements.push_back({SpacePoint{static_cast<double>(i)}, 0.6, i});
    labels.push_back(SpacePoint{static_cast<double>(i)});
  }
  const auto adj = adjacency(cover, GroupAction{{Isometry::translation(e1, (Vec(1) << 5).finished())}, 2});
  const auto nerve = build_nerve(adj);
  EquivariantTower tower(e1, adj.group, nerve, labels);
  tower.subdivide(0.9);
  tower.subdivide(0.9);
  CHECK(tower.levels() == 2);

  const auto& group = adj.group;
  for (int level = 0; level <= 2; ++level)
    for (int orbit = 0; orbit < tower.orbit_count(level); ++orbit)
      for (int g = 0; g < group.size(); ++g) {
        const int id = tower.encode(orbit, g);
        for (int h = 0; h < group.size(); ++h) {
          const int moved = tower.translate(h, id);
          if (moved < 0) continue;
          const auto lhs = tower.label(level, moved);
          const auto rhs = group.element(h).apply(tower.label(level, id));
          CHECK(std::abs(lhs[0] - rhs[0]) < 1e-12);
        }
      }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.4, 4.4);
  for (int i = 0; i < 200; ++i) {
    const SpacePoint q{u(rng)};
    NervePoint p = project_to_nerve(adj, q);
    double lo = 1e9, hi = -1e9;
    for (int v : p.simplex) {
      lo = std::min(lo, tower.label(0, v)[0]);
      hi = std::max(hi, tower.label(0, v)[0]);
    }
    for (int level = 0; level <= 2; ++level) {
      double sum = 0;
      for (double w : p.weights) sum += w;
      CHECK(std::abs(sum - 1) < 1e-9);
      // Coning stays in the hull of the original support labels.
      const double x = tower.cone(level, p)[0];
      CHECK(x >= lo - 1e-9);
      CHECK(x <= hi + 1e-9);
      if (level < 2) p = tower.refine(level, p);
    }
  }
}
