#pragma once

#include "barylab/covers.hpp"
#include "barylab/subdivision.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace barylab {

enum class BodyKind { point, segment, line, hull };
const char* to_string(BodyKind k);
BodyKind body_kind_from_string(const std::string& name);

/// Closed convex set in Euclidean(2) or Hyperboloid(2).
class ConvexBody {
 public:
  /// Unit-speed parametrisation s -> a cosh s + u sinh s (hyperboloid) or
  /// a + s u (Euclidean), with unit normal n. Segments run over [0, length].
  struct Frame {
    SpacePoint a;
    Vec u;
    Vec n;
    double length = 0.0;
  };

  ConvexBody() = default;
  static ConvexBody point(const ModelSpace& space, const SpacePoint& p);
  static ConvexBody segment(const ModelSpace& space, const SpacePoint& a, const SpacePoint& b);
  static ConvexBody line(const ModelSpace& space, const SpacePoint& a, const SpacePoint& b);
  static ConvexBody line(const ModelSpace& space, const BoundaryPoint& xi, const BoundaryPoint& eta);
  static ConvexBody hull(const ModelSpace& space, const std::vector<SpacePoint>& points);

  BodyKind kind() const { return kind_; }
  const ModelSpace& space() const { return space_; }
  const std::vector<SpacePoint>& points() const { return points_; }
  const Frame& frame() const;  // segment and line only

  SpacePoint project(const SpacePoint& x) const;
  double distance(const SpacePoint& x) const;

  /// Fermi coordinates relative to the frame: point at arc length s along the
  /// geodesic, then distance z along the normal.
  SpacePoint fermi(double s, double z) const;
  std::pair<double, double> fermi_coords(const SpacePoint& x) const;

 private:
  BodyKind kind_ = BodyKind::point;
  ModelSpace space_;
  std::vector<SpacePoint> points_;
  Frame frame_;
  std::vector<Vec> klein_;  // hull vertices in counter-clockwise order (Klein / Euclidean coordinates)

  double param_of(const SpacePoint& x) const;  // unclamped foot parameter on the frame geodesic
  SpacePoint on_frame(double s) const;
  bool hull_contains(const SpacePoint& x) const;
};

SpacePoint closest_point_projection(const ConvexBody& body, const SpacePoint& x);
double dist_to_C(const ConvexBody& body, const SpacePoint& x);
/// Phi_N^t(x): the point at distance d(x, C) + t on the geodesic from pi_C(x) through x.
SpacePoint normal_flow(const ConvexBody& body, const SpacePoint& x, double t);
BoundaryPoint flow_to_infinity(const ConvexBody& body, const SpacePoint& x);
/// Angle at q between q' and pi_C(q).
double angle_to_C(const ConvexBody& body, const SpacePoint& q, const SpacePoint& q_prime);
/// True iff the geodesic from q (on Sigma_eps) to q' stays outside C_eps after q.
bool check_large_angle_escape(const ConvexBody& body, double eps, const SpacePoint& q, const SpacePoint& q_prime,
                              int samples = 100);

/// C_eps with a chosen boundary component Sigma_eps. For a line the two
/// components are told apart by the sign of the Fermi coordinate z.
struct EpsNeighborhood {
  ConvexBody body;
  double eps = 1.0;
  int side = 1;

  bool contains(const SpacePoint& x) const;
  /// Nearest point of Sigma_eps to a point of C_eps.
  SpacePoint foot(const SpacePoint& c) const;
  double distance_to_sigma(const SpacePoint& c) const;
  /// Arc-length uniform samples of Sigma_eps (one period for a line).
  std::vector<SpacePoint> sample_sigma(int count, double period = 0.0) const;
  /// Samples of C_eps over one period, on a grid of the given spacing.
  std::vector<SpacePoint> sample_region(double spacing, double period = 0.0) const;
};

struct CoverSpec {
  std::string kind = "auto";  // strip (line), rings (point), hex (Euclidean)
  double spacing = 1.4;       // lattice spacing in units of the ball radius
};

struct Scene {
  ModelSpace space = ModelSpace::hyperboloid(2);
  ConvexBody body;
  double eps = 1.0;
  double R = 3.0;
  int side = 1;
  GroupAction group;
  CoverSpec cover;
  double delta = 0.14;
  double delta_prime = 1.8;
  double lambda = 0.8660254037844386;
  int order = 2;
  BarycenterRule rule = BarycenterRule::automatic;
  bool strict_preconditions = false;
  int density = 400;           // Sigma_eps samples
  int interior_samples = 400;  // random samples of C_eps
  double interior_min_distance = 0.0;
  int continuity_pairs = 100;
  std::uint64_t seed = 1;
};

struct Calibration {
  int halvings = 0;
  double delta = 0.0;
  double max_image_distance = 0.0;  // max d(Phi p, Phi q) over sampled pairs with d(p, q) <= 2 delta
  int pairs = 0;
};

struct PushOffGrid {
  EpsNeighborhood nbhd;
  double R = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;
  double period = 0.0;
  AdjacencySet adj;
  SimplicialComplex nerve;
  std::vector<bool> boundary;            // per base element: meets Sigma_eps
  std::vector<SpacePoint> witnesses;     // per base element (boundary ones meaningful)
  std::vector<SpacePoint> labels;        // per base element
  std::vector<double> witness_angles;    // per boundary element
  std::vector<SpacePoint> k_samples;     // sample of K (inside base elements)
  double k_spacing = 0.0;
  std::vector<SpacePoint> sigma_k;       // sample of K ∩ Sigma_eps
  std::vector<SpacePoint> k_out;         // Phi^{R-eps}(K ∩ Sigma_eps) plus interior labels
  Calibration calibration;
  int uncovered = 0;  // region samples outside every translate of a base element
  bool h_fine = true;

  double push_off_distance() const;
  /// max edge image diameter on the level-0 nerve, optionally boundary edges only.
  double iota_diameter(bool boundary_only) const;
};

PushOffGrid build_boundary_grid(const Scene& scene);

struct SmallnessReport {
  bool cond1 = true;
  double cond1_min_gap = std::numeric_limits<double>::infinity();  // over translates disjoint from K
  bool cond2 = true;
  double cond2_distance = 0.0;  // d(K_out, C_eps), must exceed delta'
  bool cond3 = true;
  double cond3_max_deviation = 0.0;
  double cond3_gate = 0.0;
  long cond3_pairs = 0;
};

SmallnessReport check_small_relative(const PushOffGrid& grid, double alpha, std::uint64_t seed, int density = 40);

/// Staged precondition of the extension lemma that did not hold.
struct Diagnostic {
  std::string name;
  bool holds = true;
  double value = 0.0;
  double threshold = 0.0;
};

/// The push-off j on N(Adj(U)) by geodesic coning over the order-n subdivision.
class PushOff {
 public:
  PushOff(const PushOffGrid& grid, double lambda, int n, const SubdivisionOptions& opts);

  const PushOffGrid& grid() const { return grid_; }
  const EquivariantTower& tower() const { return *tower_; }
  int order() const { return n_; }
  double lambda() const { return lambda_; }

  /// j∘Psi(q) for q in C_eps.
  SpacePoint evaluate(const SpacePoint& q) const;
  /// r(q): the point where the geodesic from q to j∘Psi(q) crosses Sigma_eps.
  SpacePoint retract(const SpacePoint& q) const;

  double level_push_off_distance() const;  // min over level-n vertex labels of d(., C_eps)
  double level_diameter() const;           // max level-n edge image diameter

 private:
  PushOffGrid grid_;
  double lambda_;
  int n_;
  std::unique_ptr<EquivariantTower> tower_;
};

struct Gate {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct SampleRecord {
  std::string kind;  // "boundary" or "interior"
  SpacePoint q;
  SpacePoint r;
  double dist = 0.0;      // d(q, C)
  double residual = 0.0;  // boundary: d(r(q), q); interior: |d(r(q), C) - eps|
  double idempotence = 0.0;
  double angle = 0.0;     // boundary only
  bool escape = true;     // boundary only
};

struct RetractionReport {
  bool passed = false;
  bool retraction_attempted = false;
  std::string failure;  // first failing gate or error
  std::vector<Gate> gates;
  std::vector<Diagnostic> diagnostics;
  SmallnessReport smallness;
  Calibration calibration;
  int base_elements = 0;
  int boundary_elements = 0;
  int group_elements = 0;
  int nerve_simplices = 0;
  std::vector<int> level_orbits;
  double diam_iota = 0.0;
  double diam_K_Kout = 0.0;
  double push_off_distance = 0.0;
  double level_push_off_distance = 0.0;
  double max_identity_residual = 0.0;
  double max_level_residual = 0.0;
  double max_idempotence = 0.0;
  double min_boundary_angle = 0.0;
  bool escape = true;
  std::vector<double> continuity_scales{1e-2, 1e-3, 1e-4};
  std::vector<double> continuity_moduli;
  ShrinkReport shrink;
  int barycenters_solved = 0;
  std::vector<SampleRecord> samples;
  double seconds = 0.0;
};

RetractionReport run_pipeline(const Scene& scene);

/// Worker count from BARYLAB_THREADS (default 1).
int worker_count();

}  // namespace barylab
