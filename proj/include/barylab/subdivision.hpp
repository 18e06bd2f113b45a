#pragma once

#include "barylab/barycenters.hpp"
#include "barylab/covers.hpp"
#include "barylab/simplicial.hpp"

#include <map>
#include <string>
#include <vector>

namespace barylab {

enum class BarycenterRule { automatic, midpoint, minimax, solve };
const char* to_string(BarycenterRule r);
BarycenterRule barycenter_rule_from_string(const std::string& name);

struct SubdivisionOptions {
  BarycenterRule rule = BarycenterRule::automatic;
  SolveOptions solve;
};

/// Picks a lambda-barycenter of P relative to Q with the requested rule.
/// automatic: midpoint rule in CAT(0) spaces when lambda >= sqrt(3)/2, arc rule
/// on small circle configurations, the solver otherwise.
BarycenterCertificate choose_barycenter(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                        const std::vector<SpacePoint>& Q, double lambda, BarycenterRule rule,
                                        const SolveOptions& solve = {});

class NoBarycenter : public Error {
 public:
  NoBarycenter(int stage, const Simplex& j, BarycenterCertificate cert);
  int stage() const { return stage_; }
  const BarycenterCertificate& certificate() const { return cert_; }

 private:
  int stage_;
  BarycenterCertificate cert_;
};

/// Condition (1): image of a sub-simplex against lambda times its least
/// containing parent's image.
struct ShrinkRow {
  int stage = 0;
  Simplex simplex;
  Simplex parent;
  double diam_before = 0.0;
  double diam_after = 0.0;
  double bound = 0.0;
  double slack = 0.0;
};

/// Condition (2): all subdivision vertices inside an original simplex.
struct ContainmentRow {
  int stage = 0;
  Simplex original;
  double diam_original = 0.0;
  double diam_contained = 0.0;
};

struct DisplacementRow {
  int vertex = 0;
  Simplex original;           // least containing original simplex
  double displacement = 0.0;  // max distance to its vertices
  double bound = 0.0;         // diam(iota(original)) / (1 - lambda)
  double nearest_original = 0.0;
};

struct ShrinkRecord {
  double lambda = 0.0;
  int order = 0;
  double original_diam = 0.0;
  std::vector<ShrinkRow> rows;
  std::vector<ContainmentRow> containment;
  std::vector<DisplacementRow> displacement;
  int barycenters_solved = 0;
  double min_certificate_slack = std::numeric_limits<double>::infinity();
  double max_certificate_lambda = 0.0;
};

struct ShrinkResult {
  SimplicialComplex complex;
  SubdivisionProvenance provenance;  // relative to the original complex
  VertexMap iota;
  ShrinkRecord record;
};

ShrinkResult shrinking_subdivide(const SimplicialComplex& s, const VertexMap& iota, double lambda,
                                 const SubdivisionOptions& opts = {});
ShrinkResult iterate_subdivision(const SimplicialComplex& s, const VertexMap& iota, double lambda, int n,
                                 const SubdivisionOptions& opts = {});

struct ShrinkReport {
  bool ok = true;
  double max_final_diam = 0.0;
  double final_bound = 0.0;         // lambda^n diam(iota)
  double max_displacement_excess = -std::numeric_limits<double>::infinity();  // displacement - bound
  double max_nearest_original = 0.0;
  double image_bound = 0.0;         // diam(iota) / (1 - lambda)
  double max_containment_excess = -std::numeric_limits<double>::infinity();
  std::vector<std::string> violations;
};

ShrinkReport verify_shrinking(const ShrinkRecord& record, double iota_original_diam, double tol = 1e-9);

/// Iterated barycentric subdivision of N(H U) with one stored simplex per
/// H-orbit. Level-k vertex ids encode (orbit, g) as orbit * G + g; level 0 uses
/// the ids of the adjacency nerve. A level-k orbit (k >= 1) is a canonical
/// simplex of level k-1: among the translates moving one of its vertices to
/// the identity element, the lexicographically smallest.
class EquivariantTower {
 public:
  EquivariantTower(const ModelSpace& space, const GroupTable& group, const SimplicialComplex& nerve,
                   std::vector<SpacePoint> base_labels);

  /// Adds level k+1 with labels chosen for canonical orbits only.
  void subdivide(double lambda, const SubdivisionOptions& opts = {});

  int levels() const { return static_cast<int>(orbits_.size()) - 1; }
  int group_size() const { return group_.size(); }
  int orbit_count(int level) const;
  const Simplex& rep(int level, int orbit) const;  // level >= 1
  int encode(int orbit, int g) const { return orbit * group_.size() + g; }
  int orbit_of(int id) const { return id / group_.size(); }
  int element_of(int id) const { return id % group_.size(); }
  /// Level-k id translated by group element h, or -1 outside the table.
  int translate(int h, int id) const;

  SpacePoint label(int level, int id) const;
  const SpacePoint& orbit_label(int level, int orbit) const;

  /// Level-(k) id of the vertex U_s for a simplex s of level k-1; -1 if unknown.
  int vertex_for(int level, const Simplex& s) const;
  /// Simplex of level k-1 represented by a level-k id (k >= 1).
  Simplex decode(int level, int id) const;

  /// All level-k simplices containing s.
  std::vector<Simplex> cofaces(int level, const Simplex& s) const;
  /// Canonical representatives of all level-k simplex orbits.
  std::vector<Simplex> simplex_orbits(int level) const;

  /// Barycentric coordinates at level k -> coordinates at level k+1.
  NervePoint refine(int level, const NervePoint& p) const;
  /// Geodesic coning of the labelled vertices of a level-k point, folding in
  /// ascending vertex id with weight ratio w_i / W_i.
  SpacePoint cone(int level, const NervePoint& p) const;

  const ShrinkRecord& record() const { return record_; }
  const ModelSpace& space() const { return space_; }

 private:
  struct Level {
    std::map<Simplex, int> orbit_index;
    std::vector<Simplex> reps;
    std::vector<SpacePoint> labels;
    mutable std::map<int, std::vector<Simplex>> star_cache;
  };

  ModelSpace space_;
  GroupTable group_;
  SimplicialComplex nerve_;
  std::vector<Level> orbits_;
  ShrinkRecord record_;

  const std::vector<Simplex>& star(int level, int orbit) const;
  Simplex translate_simplex(int h, const Simplex& s) const;
  /// (canonical simplex, g) with s = g · canonical; g = -1 on failure.
  std::pair<Simplex, int> canonical(const Simplex& s) const;
};

}  // namespace barylab
