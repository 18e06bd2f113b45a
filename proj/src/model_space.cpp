#include "barylab/model_space.hpp"

#include <algorithm>
#include <cmath>

namespace barylab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_coordinates: return "invalid-coordinates";
    case ErrorCode::degenerate_geodesic: return "degenerate-geodesic";
    case ErrorCode::degenerate_angle: return "degenerate-angle";
    case ErrorCode::unsupported_kind: return "unsupported-kind";
    case ErrorCode::invalid_isometry: return "invalid-isometry";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::uncovered_point: return "uncovered-point";
    case ErrorCode::enumeration_bound: return "enumeration-bound";
    case ErrorCode::indeterminate_intersection: return "indeterminate-intersection";
    case ErrorCode::unknown_simplex: return "unknown-simplex";
    case ErrorCode::provenance_corruption: return "provenance-corruption";
    case ErrorCode::no_barycenter: return "no-barycenter";
    case ErrorCode::model_space_violation: return "model-space-violation";
    case ErrorCode::diameter_too_large: return "diameter-too-large";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::undefined_normal: return "undefined-normal";
    case ErrorCode::calibration: return "calibration";
    case ErrorCode::pipeline_inconsistency: return "pipeline-inconsistency";
    case ErrorCode::invalid_input: return "invalid-input";
  }
  return "unknown";
}

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::euclidean: return "euclidean";
    case SpaceKind::circle: return "circle";
    case SpaceKind::sphere: return "sphere";
    case SpaceKind::hyperboloid: return "hyperboloid";
    case SpaceKind::finite: return "finite";
  }
  return "unknown";
}

SpaceKind space_kind_from_string(const std::string& name) {
  for (auto k : {SpaceKind::euclidean, SpaceKind::circle, SpaceKind::sphere, SpaceKind::hyperboloid,
                 SpaceKind::finite}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::invalid_input, "unknown space kind '" + name + "'");
}

SpacePoint::SpacePoint(std::initializer_list<double> values) : coords(static_cast<Eigen::Index>(values.size())) {
  Eigen::Index i = 0;
  for (double v : values) coords[i++] = v;
}

double minkowski_dot(const Vec& x, const Vec& y) {
  return -x[0] * y[0] + x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

ModelSpace ModelSpace::euclidean(int dim, double tol) {
  if (dim < 1) throw Error(ErrorCode::invalid_input, "euclidean dimension must be >= 1");
  ModelSpace s;
  s.kind_ = SpaceKind::euclidean;
  s.dim_ = dim;
  s.tol_ = tol;
  return s;
}

ModelSpace ModelSpace::circle(double radius, double tol) {
  if (!(radius > 0)) throw Error(ErrorCode::invalid_input, "circle radius must be positive");
  ModelSpace s;
  s.kind_ = SpaceKind::circle;
  s.dim_ = 1;
  s.radius_ = radius;
  s.tol_ = tol;
  return s;
}

ModelSpace ModelSpace::sphere(int dim, double radius, double tol) {
  if (dim < 1 || !(radius > 0)) throw Error(ErrorCode::invalid_input, "sphere needs dim >= 1 and radius > 0");
  ModelSpace s;
  s.kind_ = dim == 1 ? SpaceKind::circle : SpaceKind::sphere;
  s.dim_ = dim;
  s.radius_ = radius;
  s.tol_ = tol;
  return s;
}

ModelSpace ModelSpace::hyperboloid(int dim, double tol) {
  if (dim < 1) throw Error(ErrorCode::invalid_input, "hyperboloid dimension must be >= 1");
  ModelSpace s;
  s.kind_ = SpaceKind::hyperboloid;
  s.dim_ = dim;
  s.tol_ = tol;
  return s;
}

ModelSpace ModelSpace::finite(Mat distances, double tol) {
  if (distances.rows() != distances.cols() || distances.rows() == 0)
    throw Error(ErrorCode::invalid_input, "finite space needs a nonempty square distance matrix");
  const auto n = distances.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(distances(i, i)) > tol) throw Error(ErrorCode::invalid_input, "nonzero diagonal in distance matrix");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (distances(i, j) < -tol || std::abs(distances(i, j) - distances(j, i)) > tol)
        throw Error(ErrorCode::invalid_input, "distance matrix must be symmetric and nonnegative");
    }
  }
  ModelSpace s;
  s.kind_ = SpaceKind::finite;
  s.dim_ = 0;
  s.tol_ = tol;
  s.distances_ = std::move(distances);
  return s;
}

ModelSpace ModelSpace::with_tol(double tol) const {
  ModelSpace s = *this;
  s.tol_ = tol;
  return s;
}

int ModelSpace::ambient_dim() const {
  switch (kind_) {
    case SpaceKind::euclidean: return dim_;
    case SpaceKind::circle: return 2;
    case SpaceKind::sphere: return dim_ + 1;
    case SpaceKind::hyperboloid: return dim_ + 1;
    case SpaceKind::finite: return 1;
  }
  return 0;
}

bool ModelSpace::is_valid(const SpacePoint& x) const {
  if (x.size() != ambient_dim() || !x.coords.allFinite()) return false;
  switch (kind_) {
    case SpaceKind::euclidean: return true;
    case SpaceKind::circle:
    case SpaceKind::sphere: return std::abs(x.coords.norm() - radius_) <= tol_ * std::max(1.0, radius_);
    case SpaceKind::hyperboloid: {
      const double x0 = x.coords[0];
      return x0 > 0 && std::abs(minkowski_dot(x.coords, x.coords) + 1.0) <= tol_ * std::max(1.0, x0 * x0);
    }
    case SpaceKind::finite: {
      const double v = x.coords[0];
      return v >= 0 && v < static_cast<double>(distances_.rows()) && v == std::floor(v);
    }
  }
  return false;
}

void ModelSpace::validate(const SpacePoint& x) const {
  if (!is_valid(x)) throw Error(ErrorCode::invalid_coordinates, std::string("point is not valid in ") + to_string(kind_) + " space");
}

void ModelSpace::require_geodesic(const char* op) const {
  if (kind_ == SpaceKind::finite) throw Error(ErrorCode::unsupported_kind, std::string(op) + " is undefined on finite spaces");
}

double ModelSpace::distance(const SpacePoint& x, const SpacePoint& y) const {
  validate(x);
  validate(y);
  switch (kind_) {
    case SpaceKind::euclidean:
    case SpaceKind::circle:
    case SpaceKind::sphere: return (x.coords - y.coords).norm();
    case SpaceKind::hyperboloid: {
      const double c = -minkowski_dot(x.coords, y.coords);
      if (c > 2.0) return std::acosh(c);
      // 4 sinh^2(d/2) = <x-y, x-y>; accurate for nearby points.
      const Vec diff = x.coords - y.coords;
      return 2.0 * std::asinh(std::sqrt(std::max(0.0, minkowski_dot(diff, diff))) / 2.0);
    }
    case SpaceKind::finite:
      return distances_(static_cast<Eigen::Index>(x.coords[0]), static_cast<Eigen::Index>(y.coords[0]));
  }
  return 0.0;
}

double ModelSpace::arc_distance(const SpacePoint& x, const SpacePoint& y) const {
  if (kind_ != SpaceKind::circle && kind_ != SpaceKind::sphere)
    throw Error(ErrorCode::unsupported_kind, "arc distance needs a circle or sphere");
  const double chord = distance(x, y);
  return 2.0 * radius_ * std::asin(std::min(1.0, chord / (2.0 * radius_)));
}

SpacePoint ModelSpace::normalize(const SpacePoint& x) const {
  switch (kind_) {
    case SpaceKind::hyperboloid: {
      Vec c = x.coords;
      c[0] = std::sqrt(1.0 + c.tail(dim_).squaredNorm());
      return SpacePoint(std::move(c));
    }
    case SpaceKind::circle:
    case SpaceKind::sphere: return SpacePoint(x.coords * (radius_ / x.coords.norm()));
    default: return x;
  }
}

Vec ModelSpace::log_map(const SpacePoint& base, const SpacePoint& target) const {
  require_geodesic("log map");
  switch (kind_) {
    case SpaceKind::euclidean: return target.coords - base.coords;
    case SpaceKind::hyperboloid: {
      const double d = distance(base, target);
      Vec w = target.coords + minkowski_dot(base.coords, target.coords) * base.coords;
      const double n = std::sqrt(std::max(0.0, minkowski_dot(w, w)));
      if (n == 0.0 || d == 0.0) return Vec::Zero(base.size());
      return w * (d / n);
    }
    default: {
      const double r2 = radius_ * radius_;
      Vec w = target.coords - (base.coords.dot(target.coords) / r2) * base.coords;
      const double n = w.norm();
      const double arc = arc_distance(base, target);
      if (n == 0.0 || arc == 0.0) return Vec::Zero(base.size());
      return w * (arc / n);
    }
  }
}

SpacePoint ModelSpace::exp_map(const SpacePoint& base, const Vec& tangent) const {
  require_geodesic("exp map");
  switch (kind_) {
    case SpaceKind::euclidean: return SpacePoint(base.coords + tangent);
    case SpaceKind::hyperboloid: {
      const double n = std::sqrt(std::max(0.0, minkowski_dot(tangent, tangent)));
      if (n == 0.0) return base;
      return normalize(SpacePoint(std::cosh(n) * base.coords + (std::sinh(n) / n) * tangent));
    }
    default: {
      const double n = tangent.norm();
      if (n == 0.0) return base;
      const double phi = n / radius_;
      return normalize(SpacePoint(std::cos(phi) * base.coords + std::sin(phi) * (radius_ / n) * tangent));
    }
  }
}

double ModelSpace::tangent_dot(const SpacePoint&, const Vec& a, const Vec& b) const {
  return kind_ == SpaceKind::hyperboloid ? minkowski_dot(a, b) : a.dot(b);
}

double ModelSpace::tangent_norm(const SpacePoint& base, const Vec& v) const {
  return std::sqrt(std::max(0.0, tangent_dot(base, v, v)));
}

Vec ModelSpace::distance_gradient(const SpacePoint& base, const SpacePoint& target) const {
  require_geodesic("distance gradient");
  if (kind_ == SpaceKind::circle || kind_ == SpaceKind::sphere) {
    // Chordal distance, differentiated along the sphere.
    Vec g = base.coords - target.coords;
    const double n = g.norm();
    if (n == 0.0) return Vec::Zero(base.size());
    g /= n;
    return g - (g.dot(base.coords) / (radius_ * radius_)) * base.coords;
  }
  Vec v = log_map(base, target);
  const double n = tangent_norm(base, v);
  if (n == 0.0) return Vec::Zero(base.size());
  return -v / n;
}

std::vector<Vec> ModelSpace::tangent_basis(const SpacePoint& base) const {
  require_geodesic("tangent basis");
  std::vector<Vec> basis;
  const int n = ambient_dim();
  for (int i = 0; i < n && static_cast<int>(basis.size()) < dim_; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    Vec v = e;
    if (kind_ == SpaceKind::hyperboloid) {
      v = e + minkowski_dot(base.coords, e) * base.coords;
    } else if (kind_ != SpaceKind::euclidean) {
      v = e - (base.coords.dot(e) / (radius_ * radius_)) * base.coords;
    }
    for (const Vec& b : basis) v -= tangent_dot(base, v, b) * b;
    const double len = tangent_norm(base, v);
    if (len > 1e-6) basis.push_back(v / len);
  }
  return basis;
}

SpacePoint ModelSpace::geodesic_point(const SpacePoint& x, const SpacePoint& y, double t) const {
  require_geodesic("geodesic_point");
  const double d = distance(x, y);
  if (d <= tol_ * std::max(1.0, std::abs(x.coords[0]))) {
    if (std::abs(t) <= tol_) return x;
    throw Error(ErrorCode::degenerate_geodesic, "geodesic between coincident points");
  }
  switch (kind_) {
    case SpaceKind::euclidean: return SpacePoint(x.coords + (t / d) * (y.coords - x.coords));
    case SpaceKind::hyperboloid: {
      Vec w = y.coords + minkowski_dot(x.coords, y.coords) * x.coords;
      const double n = std::sqrt(std::max(0.0, minkowski_dot(w, w)));
      return normalize(SpacePoint(std::cosh(t) * x.coords + std::sinh(t) * (w / n)));
    }
    default: {
      const double r = radius_;
      if (t < -tol_ || t > 2 * r + tol_) throw Error(ErrorCode::degenerate_geodesic, "chordal parameter out of range");
      Vec w = y.coords - (x.coords.dot(y.coords) / (r * r)) * x.coords;
      const double n = w.norm();
      if (n <= tol_ * r) throw Error(ErrorCode::degenerate_geodesic, "antipodal points have no unique geodesic");
      const double phi = 2.0 * std::asin(std::clamp(t / (2.0 * r), -1.0, 1.0));
      return normalize(SpacePoint(std::cos(phi) * x.coords + std::sin(phi) * (r / n) * w));
    }
  }
}

double ModelSpace::angle_at(const SpacePoint& o, const SpacePoint& p, const SpacePoint& q) const {
  require_geodesic("angle_at");
  const double scale = std::max(1.0, std::abs(o.coords[0]));
  if (distance(o, p) <= tol_ * scale || distance(o, q) <= tol_ * scale)
    throw Error(ErrorCode::degenerate_angle, "angle at a point coinciding with an endpoint");
  if (distance(p, q) == 0.0) return 0.0;
  Vec a = log_map(o, p);
  Vec b = log_map(o, q);
  a /= tangent_norm(o, a);
  b /= tangent_norm(o, b);
  const double minus = tangent_norm(o, a - b);
  const double plus = tangent_norm(o, a + b);
  return 2.0 * std::atan2(minus, plus);
}

SpacePoint ModelSpace::origin() const {
  switch (kind_) {
    case SpaceKind::euclidean: return SpacePoint(Vec::Zero(dim_));
    case SpaceKind::hyperboloid: {
      Vec c = Vec::Zero(dim_ + 1);
      c[0] = 1.0;
      return SpacePoint(std::move(c));
    }
    case SpaceKind::circle:
    case SpaceKind::sphere: {
      Vec c = Vec::Zero(ambient_dim());
      c[0] = radius_;
      return SpacePoint(std::move(c));
    }
    case SpaceKind::finite: return SpacePoint{0.0};
  }
  return SpacePoint();
}

SpacePoint ModelSpace::lift(const Vec& spatial) const {
  if (kind_ != SpaceKind::hyperboloid || spatial.size() != dim_)
    throw Error(ErrorCode::unsupported_kind, "lift needs a hyperboloid and a spatial vector of length dim");
  Vec c(dim_ + 1);
  c[0] = std::sqrt(1.0 + spatial.squaredNorm());
  c.tail(dim_) = spatial;
  return SpacePoint(std::move(c));
}

SpacePoint ModelSpace::circle_point(double theta) const {
  if (kind_ != SpaceKind::circle) throw Error(ErrorCode::unsupported_kind, "circle_point needs a circle");
  return SpacePoint{radius_ * std::cos(theta), radius_ * std::sin(theta)};
}

double ModelSpace::circle_angle(const SpacePoint& x) const {
  if (kind_ != SpaceKind::circle) throw Error(ErrorCode::unsupported_kind, "circle_angle needs a circle");
  return std::atan2(x.coords[1], x.coords[0]);
}

double diameter(const ModelSpace& space, const std::vector<SpacePoint>& points) {
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) d = std::max(d, space.distance(points[i], points[j]));
  return d;
}

namespace {

void require_unit(const ModelSpace& space, const BoundaryPoint& xi) {
  if (xi.direction.size() != space.dim() || std::abs(xi.direction.norm() - 1.0) > 10 * space.tol())
    throw Error(ErrorCode::invalid_coordinates, "boundary direction must be a unit vector of length dim");
}

}  // namespace

SpacePoint ray_point(const ModelSpace& space, const SpacePoint& o, const BoundaryPoint& xi, double t) {
  require_unit(space, xi);
  space.validate(o);
  if (space.kind() == SpaceKind::euclidean) return SpacePoint(o.coords + t * xi.direction);
  if (space.kind() != SpaceKind::hyperboloid) throw Error(ErrorCode::unsupported_kind, "rays need euclidean or hyperboloid space");
  Vec null(space.dim() + 1);
  null[0] = 1.0;
  null.tail(space.dim()) = xi.direction;
  const double a = minkowski_dot(o.coords, null);  // negative for future null vectors
  const Vec u = (null + a * o.coords) / (-a);
  return SpacePoint(std::cosh(t) * o.coords + std::sinh(t) * u);
}

double gromov_product(const ModelSpace& space, const SpacePoint& o, const BoundaryPoint& xi,
                      const BoundaryPoint& eta) {
  if (space.kind() != SpaceKind::hyperboloid) throw Error(ErrorCode::unsupported_kind, "gromov product needs a hyperboloid");
  require_unit(space, xi);
  require_unit(space, eta);
  if ((xi.direction - eta.direction).norm() <= space.tol()) return std::numeric_limits<double>::infinity();

  auto f = [&](double t) {
    const SpacePoint a = ray_point(space, o, xi, t);
    const SpacePoint b = ray_point(space, o, eta, t);
    const double c = -minkowski_dot(a.coords, b.coords);
    double d;
    if (c > 2.0) {
      d = std::acosh(c);
    } else {
      const Vec diff = a.coords - b.coords;
      d = 2.0 * std::asinh(std::sqrt(std::max(0.0, minkowski_dot(diff, diff))) / 2.0);
    }
    return t - 0.5 * d;
  };

  constexpr double max_t = 1099511627776.0;  // 2^40
  double t = 1.0;
  double prev = f(t);
  while (t < max_t) {
    const double next = f(2.0 * t);
    if (!std::isfinite(next)) break;
    if (std::abs(next - prev) < space.tol()) return next;
    prev = next;
    t *= 2.0;
  }
  throw Error(ErrorCode::non_convergence, "gromov product limit did not converge before overflow");
}

double visual_metric(const ModelSpace& space, const SpacePoint& o, const BoundaryPoint& xi,
                     const BoundaryPoint& eta) {
  const double g = gromov_product(space, o, xi, eta);
  return std::isinf(g) ? 0.0 : std::exp(-g);
}

Isometry::Isometry(const ModelSpace& space, Mat linear, Vec translation)
    : kind_(space.kind()), linear_(std::move(linear)), translation_(std::move(translation)) {
  if (space.kind() == SpaceKind::finite) throw Error(ErrorCode::unsupported_kind, "isometries of finite spaces are not modelled");
  const int n = space.ambient_dim();
  if (linear_.rows() != n || linear_.cols() != n) throw Error(ErrorCode::invalid_isometry, "matrix size does not match space");
  if (translation_.size() == 0) translation_ = Vec::Zero(n);
  if (translation_.size() != n) throw Error(ErrorCode::invalid_isometry, "translation size does not match space");
  if (kind_ != SpaceKind::euclidean && translation_.norm() != 0.0)
    throw Error(ErrorCode::invalid_isometry, "only euclidean isometries carry a translation part");

  const double scale = std::max(1.0, linear_.cwiseAbs().maxCoeff());
  const double slack = 10 * space.tol() * scale * scale;
  if (kind_ == SpaceKind::hyperboloid) {
    Mat j = Mat::Identity(n, n);
    j(0, 0) = -1.0;
    if ((linear_.transpose() * j * linear_ - j).cwiseAbs().maxCoeff() > slack || linear_(0, 0) <= 0)
      throw Error(ErrorCode::invalid_isometry, "matrix does not preserve the upper sheet of the hyperboloid");
  } else if ((linear_.transpose() * linear_ - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > slack) {
    throw Error(ErrorCode::invalid_isometry, "matrix is not orthogonal");
  }
}

Isometry Isometry::identity(const ModelSpace& space) {
  return Isometry(space, Mat::Identity(space.ambient_dim(), space.ambient_dim()));
}

Isometry Isometry::translation(const ModelSpace& space, const Vec& offset) {
  if (space.kind() != SpaceKind::euclidean) throw Error(ErrorCode::unsupported_kind, "translations need euclidean space");
  return Isometry(space, Mat::Identity(space.dim(), space.dim()), offset);
}

Isometry Isometry::boost(const ModelSpace& space, int axis, double length) {
  if (space.kind() != SpaceKind::hyperboloid || axis < 0 || axis >= space.dim())
    throw Error(ErrorCode::unsupported_kind, "boost needs a hyperboloid and a valid spatial axis");
  Mat m = Mat::Identity(space.dim() + 1, space.dim() + 1);
  const int a = axis + 1;
  m(0, 0) = m(a, a) = std::cosh(length);
  m(0, a) = m(a, 0) = std::sinh(length);
  return Isometry(space, m);
}

Isometry Isometry::rotation(const ModelSpace& space, int i, int j, double angle) {
  const int n = space.ambient_dim();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j || (space.kind() == SpaceKind::hyperboloid && (i == 0 || j == 0)))
    throw Error(ErrorCode::invalid_isometry, "invalid rotation plane");
  Mat m = Mat::Identity(n, n);
  m(i, i) = m(j, j) = std::cos(angle);
  m(i, j) = -std::sin(angle);
  m(j, i) = std::sin(angle);
  return Isometry(space, m);
}

SpacePoint Isometry::apply(const SpacePoint& x) const {
  if (x.size() != linear_.cols()) throw Error(ErrorCode::invalid_coordinates, "point size does not match isometry");
  Vec y = linear_ * x.coords + translation_;
  if (kind_ == SpaceKind::hyperboloid) y[0] = std::sqrt(1.0 + y.tail(y.size() - 1).squaredNorm());
  return SpacePoint(std::move(y));
}

BoundaryPoint Isometry::apply(const BoundaryPoint& xi) const {
  if (kind_ == SpaceKind::hyperboloid) {
    Vec null(linear_.cols());
    null[0] = 1.0;
    null.tail(null.size() - 1) = xi.direction;
    const Vec image = linear_ * null;
    Vec dir = image.tail(image.size() - 1) / image[0];
    return BoundaryPoint{dir / dir.norm()};
  }
  if (kind_ == SpaceKind::euclidean) {
    Vec dir = linear_ * xi.direction;
    return BoundaryPoint{dir / dir.norm()};
  }
  throw Error(ErrorCode::unsupported_kind, "boundary points exist only for euclidean and hyperboloid spaces");
}

Isometry Isometry::compose(const Isometry& inner) const {
  Isometry out = *this;
  out.linear_ = linear_ * inner.linear_;
  out.translation_ = linear_ * inner.translation_ + translation_;
  return out;
}

Isometry Isometry::inverse() const {
  Isometry out = *this;
  if (kind_ == SpaceKind::hyperboloid) {
    const auto n = linear_.rows();
    Mat j = Mat::Identity(n, n);
    j(0, 0) = -1.0;
    out.linear_ = j * linear_.transpose() * j;
  } else {
    out.linear_ = linear_.transpose();
  }
  out.translation_ = -out.linear_ * translation_;
  return out;
}

double Isometry::difference(const Isometry& other) const {
  const double scale = std::max({1.0, linear_.cwiseAbs().maxCoeff(), translation_.cwiseAbs().maxCoeff()});
  const double d = std::max((linear_ - other.linear_).cwiseAbs().maxCoeff(),
                            (translation_ - other.translation_).cwiseAbs().maxCoeff());
  return d / scale;
}

}  // namespace barylab
