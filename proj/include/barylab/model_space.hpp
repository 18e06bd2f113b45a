#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace barylab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorCode {
  invalid_coordinates,
  degenerate_geodesic,
  degenerate_angle,
  unsupported_kind,
  invalid_isometry,
  non_convergence,
  uncovered_point,
  enumeration_bound,
  indeterminate_intersection,
  unknown_simplex,
  provenance_corruption,
  no_barycenter,
  model_space_violation,
  diameter_too_large,
  precondition,
  undefined_normal,
  calibration,
  pipeline_inconsistency,
  invalid_input,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. Every failure mode named by an operation contract
/// maps to one ErrorCode so callers (and the CLI exit-code table) can switch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class SpaceKind { euclidean, circle, sphere, hyperboloid, finite };

const char* to_string(SpaceKind kind);
SpaceKind space_kind_from_string(const std::string& name);

/// Model-specific coordinates. Euclidean: dim entries. Hyperboloid: dim+1
/// entries, x0 > 0 and Minkowski norm -1. Circle/Sphere: ambient vector of
/// length `radius`. Finite: a single entry holding the point index.
struct SpacePoint {
  Vec coords;

  SpacePoint() = default;
  explicit SpacePoint(Vec c) : coords(std::move(c)) {}
  SpacePoint(std::initializer_list<double> values);

  Eigen::Index size() const { return coords.size(); }
  double operator[](Eigen::Index i) const { return coords[i]; }
};

/// Ideal endpoint of a geodesic ray. For the hyperboloid the direction is the
/// spatial part of the null vector (1, direction).
struct BoundaryPoint {
  Vec direction;
};

/// Minkowski bilinear form <x,y> = -x0 y0 + sum xi yi.
double minkowski_dot(const Vec& x, const Vec& y);

class ModelSpace {
 public:
  static constexpr double default_tol = 1e-9;

  static ModelSpace euclidean(int dim, double tol = default_tol);
  static ModelSpace circle(double radius, double tol = default_tol);
  static ModelSpace sphere(int dim, double radius, double tol = default_tol);
  static ModelSpace hyperboloid(int dim, double tol = default_tol);
  static ModelSpace finite(Mat distances, double tol = default_tol);

  SpaceKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  double tol() const { return tol_; }
  const Mat& distance_matrix() const { return distances_; }
  ModelSpace with_tol(double tol) const;

  /// Length of the coordinate vector of a valid point.
  int ambient_dim() const;
  bool is_geodesic() const { return kind_ != SpaceKind::finite; }
  bool is_cat0() const { return kind_ == SpaceKind::euclidean || kind_ == SpaceKind::hyperboloid; }

  bool is_valid(const SpacePoint& x) const;
  /// Throws invalid_coordinates when `x` is not a point of this space.
  void validate(const SpacePoint& x) const;

  double distance(const SpacePoint& x, const SpacePoint& y) const;

  /// Point at arc-length t along the geodesic from x to y. Circle/Sphere use
  /// the chordal parametrisation: the returned point lies on the shorter arc
  /// with d(x, result) = t.
  SpacePoint geodesic_point(const SpacePoint& x, const SpacePoint& y, double t) const;

  /// Riemannian angle at o between the geodesics to p and q, in [0, pi].
  double angle_at(const SpacePoint& o, const SpacePoint& p, const SpacePoint& q) const;

  // Tangent-space machinery used by the descent solvers. Tangent vectors are
  // expressed in ambient coordinates.
  Vec log_map(const SpacePoint& base, const SpacePoint& target) const;
  SpacePoint exp_map(const SpacePoint& base, const Vec& tangent) const;
  /// Gradient of d(., target) at base (unit length except at base == target).
  Vec distance_gradient(const SpacePoint& base, const SpacePoint& target) const;
  double tangent_norm(const SpacePoint& base, const Vec& v) const;
  double tangent_dot(const SpacePoint& base, const Vec& a, const Vec& b) const;
  /// Orthonormal basis of the tangent space at base (dim() vectors).
  std::vector<Vec> tangent_basis(const SpacePoint& base) const;

  /// Snap a nearly-valid point back onto the model (hyperboloid sheet, sphere).
  SpacePoint normalize(const SpacePoint& x) const;

  // Helpers for specific kinds.
  SpacePoint origin() const;
  /// Hyperboloid point with the given spatial part.
  SpacePoint lift(const Vec& spatial) const;
  /// Circle point at angle theta.
  SpacePoint circle_point(double theta) const;
  double circle_angle(const SpacePoint& x) const;
  /// Intrinsic great-circle distance on Circle/Sphere.
  double arc_distance(const SpacePoint& x, const SpacePoint& y) const;

 private:
  SpaceKind kind_ = SpaceKind::euclidean;
  int dim_ = 0;
  double radius_ = 1.0;
  double tol_ = default_tol;
  Mat distances_;

  void require_geodesic(const char* op) const;
};

/// Diameter of a finite point set (0 for fewer than two points).
double diameter(const ModelSpace& space, const std::vector<SpacePoint>& points);

/// Point at distance t along the geodesic ray from o towards the ideal point xi.
SpacePoint ray_point(const ModelSpace& space, const SpacePoint& o, const BoundaryPoint& xi, double t);

/// Gromov product (xi|eta)_o as the numerical limit of t - d(ray_xi(t), ray_eta(t))/2.
/// Returns +infinity when xi == eta.
double gromov_product(const ModelSpace& space, const SpacePoint& o, const BoundaryPoint& xi,
                      const BoundaryPoint& eta);
/// exp(-(xi|eta)_o); 0 when xi == eta.
double visual_metric(const ModelSpace& space, const SpacePoint& o, const BoundaryPoint& xi,
                     const BoundaryPoint& eta);

/// Isometry of a model space. Euclidean: x -> linear x + translation with
/// orthogonal linear part. Sphere/Circle: orthogonal. Hyperboloid: Lorentz
/// transformation preserving the upper sheet.
class Isometry {
 public:
  Isometry() = default;
  Isometry(const ModelSpace& space, Mat linear, Vec translation = Vec());

  static Isometry identity(const ModelSpace& space);
  static Isometry translation(const ModelSpace& space, const Vec& offset);
  /// Hyperbolic translation of length `length` along the geodesic through the
  /// origin in direction of spatial axis `axis`.
  static Isometry boost(const ModelSpace& space, int axis, double length);
  /// Rotation by `angle` in the coordinate plane (i, j) of the ambient vector.
  static Isometry rotation(const ModelSpace& space, int i, int j, double angle);

  SpaceKind kind() const { return kind_; }
  const Mat& linear() const { return linear_; }
  const Vec& translation_part() const { return translation_; }

  SpacePoint apply(const SpacePoint& x) const;
  BoundaryPoint apply(const BoundaryPoint& xi) const;
  Isometry compose(const Isometry& inner) const;  // this o inner
  Isometry inverse() const;
  /// Max-norm distance between the affine parts.
  double difference(const Isometry& other) const;

 private:
  SpaceKind kind_ = SpaceKind::euclidean;
  Mat linear_;
  Vec translation_;
};

}  // namespace barylab
