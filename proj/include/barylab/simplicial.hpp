#pragma once

#include "barylab/model_space.hpp"

#include <map>
#include <string>
#include <vector>

namespace barylab {

/// Sorted tuple of vertex ids.
using Simplex = std::vector<int>;

/// Orders simplices by size, then lexicographically.
struct SimplexLess {
  bool operator()(const Simplex& a, const Simplex& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

std::string simplex_to_string(const Simplex& s);

class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Face-closed complex generated by `generators` (tuples are sorted first).
  static SimplicialComplex closure(const std::vector<Simplex>& generators);
  /// Stores the data as given; use validate() to inspect it.
  static SimplicialComplex raw(std::vector<int> vertices, std::vector<Simplex> simplices);

  const std::vector<int>& vertices() const { return vertices_; }
  /// All simplices, including vertices, in SimplexLess order.
  const std::vector<Simplex>& simplices() const { return simplices_; }
  std::size_t size() const { return simplices_.size(); }
  bool empty() const { return vertices_.empty(); }
  int dimension() const;

  bool contains(const Simplex& s) const;
  bool has_vertex(int v) const;
  std::vector<Simplex> simplices_of_dim(int k) const;
  /// Every simplex that contains `s` (including `s`).
  std::vector<Simplex> cofaces(const Simplex& s) const;

 private:
  std::vector<int> vertices_;
  std::vector<Simplex> simplices_;
  std::map<int, std::vector<std::size_t>> star_;

  void index();
};

/// Every missing face and malformed tuple, as readable messages. Empty means valid.
std::vector<std::string> validate(const SimplicialComplex& s);

/// New vertex id -> sorted set J of parent vertex ids it stands for.
struct SubdivisionProvenance {
  std::map<int, Simplex> sources;

  const Simplex& of(int vertex) const;
};

struct Subdivision {
  SimplicialComplex complex;
  SubdivisionProvenance provenance;
};

/// Vertices U_J for every simplex J; simplices are strict chains. A singleton
/// J = {v} keeps id v, the other U_J get fresh ids above max(v) in SimplexLess order.
Subdivision barycentric_subdivision(const SimplicialComplex& s);

/// Provenance relative to the grandparent: outer maps the newest complex to its
/// parent, inner maps the parent to the grandparent.
SubdivisionProvenance compose(const SubdivisionProvenance& outer, const SubdivisionProvenance& inner);

/// Closure of the union of all simplices containing sigma.
SimplicialComplex room(const SimplicialComplex& s, const Simplex& sigma);
std::vector<int> room_vertices(const SimplicialComplex& s, const Simplex& sigma);

/// Union of provenance sets, which must span a parent simplex.
Simplex least_containing_simplex(const SimplicialComplex& parent, const SubdivisionProvenance& prov,
                                 const Simplex& sigma_sub);

struct VertexMap {
  ModelSpace target;
  std::map<int, SpacePoint> assignment;

  const SpacePoint& at(int vertex) const;
  std::vector<SpacePoint> images(const Simplex& s) const;
};

/// max over simplices of diam(iota(sigma)). With edges_only the scan stops at
/// the 1-skeleton, which gives the same value.
double map_diameter(const SimplicialComplex& s, const VertexMap& iota, bool edges_only = true);

}  // namespace barylab
