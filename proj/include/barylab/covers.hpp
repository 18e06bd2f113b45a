#pragma once

#include "barylab/model_space.hpp"
#include "barylab/simplicial.hpp"

#include <map>
#include <vector>

namespace barylab {

struct Ball {
  SpacePoint center;
  double radius = 0.0;
  int label = 0;
};

struct BallCover {
  ModelSpace space;
  std::vector<Ball> elements;
  std::vector<SpacePoint> window;  // samples that must be covered

  /// Window samples that lie in no element.
  std::vector<std::size_t> uncovered() const;
};

struct GroupAction {
  std::vector<Isometry> generators;
  int word_length = 1;
};

/// Elements of a group up to a word-length bound, with a composition table.
/// Element 0 is the identity. Order is breadth first over the generator list
/// (g1, g1^-1, g2, g2^-1, ...), duplicates removed at tolerance.
class GroupTable {
 public:
  GroupTable() = default;
  GroupTable(const ModelSpace& space, const GroupAction& action);
  static GroupTable trivial(const ModelSpace& space);

  int size() const { return static_cast<int>(elements_.size()); }
  const Isometry& element(int i) const { return elements_[static_cast<std::size_t>(i)]; }
  int word_length(int i) const { return lengths_[static_cast<std::size_t>(i)]; }
  int max_word_length() const { return max_length_; }
  /// Index of a∘b, or -1 when the product was not enumerated.
  int compose(int a, int b) const { return table_[static_cast<std::size_t>(a * size() + b)]; }
  int inverse(int a) const { return inverses_[static_cast<std::size_t>(a)]; }
  /// Index of an enumerated element equal to g, or -1.
  int find(const Isometry& g) const;

 private:
  std::vector<Isometry> elements_;
  std::vector<int> lengths_;
  std::vector<int> table_;
  std::vector<int> inverses_;
  int max_length_ = 0;
  double tol_ = 1e-9;
};

/// Element `base` of the cover translated by group element `group`.
struct AdjElement {
  int base = 0;
  int group = 0;
  Ball ball;
};

/// Vertex ids of the adjacency nerve encode (base, group) as base * G + group.
struct AdjacencySet {
  BallCover cover;
  GroupTable group;
  std::vector<AdjElement> elements;  // base elements first, then translates
  std::map<int, std::size_t> index;  // vertex id -> position in elements

  int encode(int base, int g) const { return base * group.size() + g; }
  int base_of(int id) const { return id / group.size(); }
  int group_of(int id) const { return id % group.size(); }
  const AdjElement& by_id(int id) const;
  /// id of h·(element id), or -1 if the product leaves the enumerated table.
  int translate(int h, int id) const;
};

/// Sign-certified test for a common point of several balls. value is the
/// minimum over x of max_i (d(x, c_i) - r_i).
struct IntersectionTest {
  bool nonempty = false;
  double value = 0.0;
  SpacePoint witness;
};
IntersectionTest balls_intersect(const ModelSpace& space, const std::vector<Ball>& balls);

SimplicialComplex build_nerve(const BallCover& cover);
SimplicialComplex build_nerve(const AdjacencySet& adj);

AdjacencySet adjacency(const BallCover& cover, const GroupAction& action);
AdjacencySet adjacency(const BallCover& cover, const GroupTable& table);
bool is_H_fine(const BallCover& cover, const GroupTable& table);

/// Point of the nerve: a simplex with barycentric weights (same order).
struct NervePoint {
  Simplex simplex;
  std::vector<double> weights;
};

/// Normalised tent weights max(0, r - d(q, c)) over the elements of Adj(U)
/// containing q. q must lie in some element.
NervePoint project_to_nerve(const AdjacencySet& adj, const SpacePoint& q);

/// Group element h (smallest index) such that h^-1 q lies in a base element, or -1.
int locate_group_element(const AdjacencySet& adj, const SpacePoint& q);
/// Psi through the base cover: Psi(q) = h Psi(h^-1 q) with h = locate_group_element(q).
NervePoint project_equivariant(const AdjacencySet& adj, const SpacePoint& q);
/// Relabel the vertices of p by h.
NervePoint translate(const AdjacencySet& adj, int h, const NervePoint& p);

/// sup over h with hK close to K (sample distance <= slack) of diam(hK_out ∪ K_out).
double diam_K_Kout(const ModelSpace& space, const GroupTable& table, const std::vector<SpacePoint>& k,
                   const std::vector<SpacePoint>& k_out, double slack);

}  // namespace barylab
