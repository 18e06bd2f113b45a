#include "barylab/simplicial.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace barylab;

namespace {

int id_of(const SubdivisionProvenance& prov, const Simplex& j) {
  for (const auto& [v, src] : prov.sources)
    if (src == j) return v;
  return -1;
}

SimplicialComplex full_simplex(int n) {
  Simplex s(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) s[static_cast<std::size_t>(i)] = i;
  return SimplicialComplex::closure({s});
}

long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(SimplicialComplex::closure({{0, 1, 2}})).empty());
  CHECK(validate(SimplicialComplex()).empty());

  const auto broken = SimplicialComplex::raw({0, 1, 2}, {{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 1, 2}});
  const auto v = validate(broken);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find(simplex_to_string({0, 2})) != std::string::npos);

  const auto repeated = SimplicialComplex::raw({0, 1}, {{0}, {1}, {1, 1}});
  CHECK_FALSE(validate(repeated).empty());
}

TEST_CASE("barycentric subdivision of an edge and a triangle") {
  const auto edge = barycentric_subdivision(SimplicialComplex::closure({{0, 1}}));
  CHECK(edge.complex.vertices().size() == 3);
  CHECK(edge.complex.simplices_of_dim(1).size() == 2);
  const int u01 = id_of(edge.provenance, {0, 1});
  CHECK(edge.complex.contains({0, u01}));
  CHECK(edge.complex.contains({1, u01}));
  CHECK_FALSE(edge.complex.contains({0, 1}));

  const auto tri = barycentric_subdivision(full_simplex(2));
  CHECK(tri.complex.vertices().size() == 7);
  CHECK(tri.complex.simplices_of_dim(1).size() == 12);
  CHECK(tri.complex.simplices_of_dim(2).size() == 6);
  CHECK(validate(tri.complex).empty());

  const auto points = SimplicialComplex::closure({{3}, {5}});
  const auto same = barycentric_subdivision(points);
  CHECK(same.complex.vertices() == points.vertices());
  CHECK(same.complex.simplices() == points.simplices());
}

TEST_CASE("subdivision counts of the n-simplex") {
  for (int n = 1; n <= 4; ++n) {
    const auto sd = barycentric_subdivision(full_simplex(n));
    CHECK(validate(sd.complex).empty());
    CHECK(static_cast<long>(sd.complex.vertices().size()) == (1L << (n + 1)) - 1);
    CHECK(static_cast<long>(sd.complex.simplices_of_dim(n).size()) == factorial(n + 1));
    // Edges join U_J, U_J' exactly when one set contains the other.
    for (const auto& e : sd.complex.simplices_of_dim(1)) {
      const auto& a = sd.provenance.of(e[0]);
      const auto& b = sd.provenance.of(e[1]);
      const bool nested = std::includes(a.begin(), a.end(), b.begin(), b.end()) ||
                          std::includes(b.begin(), b.end(), a.begin(), a.end());
      CHECK(nested);
    }
  }
}

TEST_CASE("room") {
  const auto tri = full_simplex(2);
  CHECK(room(tri, {0, 1, 2}).simplices() == tri.simplices());

  const auto two = SimplicialComplex::closure({{0, 1, 2}, {1, 2, 3}});
  CHECK(room(two, {1, 2}).simplices() == two.simplices());
  CHECK(room_vertices(two, {1, 2}) == std::vector<int>{0, 1, 2, 3});
  CHECK(room_vertices(two, {0}) == std::vector<int>{0, 1, 2});

  const auto path = SimplicialComplex::closure({{0, 1}, {1, 2}});
  const auto r = room(path, {1});
  CHECK(r.contains({0, 1}));
  CHECK(r.contains({1, 2}));
  CHECK(r.vertices() == std::vector<int>{0, 1, 2});

  try {
    room(path, {0, 2});
    FAIL("expected unknown_simplex");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_simplex);
  }
}

TEST_CASE("map_diameter") {
  const auto e1 = ModelSpace::euclidean(1);
  const auto e2 = ModelSpace::euclidean(2);
  const auto edge = SimplicialComplex::closure({{0, 1}});
  CHECK(map_diameter(edge, VertexMap{e1, {{0, SpacePoint{0}}, {1, SpacePoint{1}}}}) == 1.0);
  CHECK(map_diameter(edge, VertexMap{e1, {{0, SpacePoint{4}}, {1, SpacePoint{4}}}}) == 0.0);

  const auto tri = full_simplex(2);
  const VertexMap iota{e2, {{0, SpacePoint{0, 0}}, {1, SpacePoint{1, 0}}, {2, SpacePoint{0, 2}}}};
  CHECK(map_diameter(tri, iota) == doctest::Approx(std::sqrt(5.0)));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = full_simplex(4);
    VertexMap m{e2, {}};
    for (int v : s.vertices()) m.assignment.emplace(v, testing::random_point(e2, rng));
    CHECK(map_diameter(s, m, true) == map_diameter(s, m, false));
  }
}

TEST_CASE("least containing simplex") {
  const auto edge = SimplicialComplex::closure({{0, 1}});
  const auto sd = barycentric_subdivision(edge);
  const int u01 = id_of(sd.provenance, {0, 1});
  CHECK(least_containing_simplex(edge, sd.provenance, {0, u01}) == Simplex{0, 1});
  CHECK(least_containing_simplex(edge, sd.provenance, {0}) == Simplex{0});

  const auto tri = full_simplex(2);
  const auto st = barycentric_subdivision(tri);
  const int u012 = id_of(st.provenance, {0, 1, 2});
  const int t01 = id_of(st.provenance, {0, 1});
  CHECK(least_containing_simplex(tri, st.provenance, {u012}) == Simplex{0, 1, 2});
  Simplex sub{0, t01, u012};
  std::sort(sub.begin(), sub.end());
  CHECK(least_containing_simplex(tri, st.provenance, sub) == Simplex{0, 1, 2});

  SubdivisionProvenance corrupt = sd.provenance;
  corrupt.sources[u01] = {0, 7};
  try {
    least_containing_simplex(edge, corrupt, {0, u01});
    FAIL("expected provenance_corruption");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::provenance_corruption);
  }
}

TEST_CASE("composed provenance tracks the original simplex") {
  const auto tri = full_simplex(2);
  const auto s1 = barycentric_subdivision(tri);
  const auto s2 = barycentric_subdivision(s1.complex);
  const auto prov = compose(s2.provenance, s1.provenance);
  for (const auto& sigma : s2.complex.simplices()) {
    const auto parent = least_containing_simplex(tri, prov, sigma);
    CHECK(tri.contains(parent));
  }
}
