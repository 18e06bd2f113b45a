#include "barylab/retraction.hpp"

#include <algorithm>
#include <cmath>

namespace barylab {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_planar(const ModelSpace& space) {
  if (space.dim() != 2 || (space.kind() != SpaceKind::euclidean && space.kind() != SpaceKind::hyperboloid))
    throw Error(ErrorCode::unsupported_kind, "convex bodies live in Euclidean(2) or Hyperboloid(2)");
}

bool hyperbolic(const ModelSpace& space) { return space.kind() == SpaceKind::hyperboloid; }

double point_scale(const SpacePoint& x) { return std::max(1.0, std::abs(x.coords[0])); }

ConvexBody::Frame make_frame(const ModelSpace& space, const SpacePoint& a, const SpacePoint& b) {
  ConvexBody::Frame f;
  f.a = a;
  f.length = space.distance(a, b);
  if (f.length <= space.tol() * point_scale(a))
    throw Error(ErrorCode::degenerate_geodesic, "a segment or line needs two distinct points");
  if (hyperbolic(space)) {
    Vec w = b.coords + minkowski_dot(a.coords, b.coords) * a.coords;
    f.u = w / std::sqrt(minkowski_dot(w, w));
    Eigen::Vector3d c = Eigen::Vector3d(a.coords).cross(Eigen::Vector3d(f.u));
    Vec n(3);
    n << -c[0], c[1], c[2];
    f.n = n / std::sqrt(minkowski_dot(n, n));
  } else {
    f.u = (b.coords - a.coords) / f.length;
    Vec n(2);
    n << -f.u[1], f.u[0];
    f.n = n;
  }
  return f;
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Vec klein_coords(const ModelSpace& space, const SpacePoint& x) {
  if (hyperbolic(space)) return x.coords.tail(2) / x.coords[0];
  return x.coords;
}

SpacePoint segment_projection(const ModelSpace& space, const SpacePoint& a, const SpacePoint& b, const SpacePoint& x) {
  ConvexBody s = ConvexBody::segment(space, a, b);
  return s.project(x);
}

}  // namespace

const char* to_string(BodyKind k) {
  switch (k) {
    case BodyKind::point: return "point";
    case BodyKind::segment: return "segment";
    case BodyKind::line: return "line";
    case BodyKind::hull: return "hull";
  }
  return "unknown";
}

BodyKind body_kind_from_string(const std::string& name) {
  for (auto k : {BodyKind::point, BodyKind::segment, BodyKind::line, BodyKind::hull})
    if (name == to_string(k)) return k;
  throw Error(ErrorCode::invalid_input, "unknown body kind '" + name + "'");
}

ConvexBody ConvexBody::point(const ModelSpace& space, const SpacePoint& p) {
  require_planar(space);
  space.validate(p);
  ConvexBody b;
  b.kind_ = BodyKind::point;
  b.space_ = space;
  b.points_ = {p};
  return b;
}

ConvexBody ConvexBody::segment(const ModelSpace& space, const SpacePoint& a, const SpacePoint& c) {
  require_planar(space);
  space.validate(a);
  space.validate(c);
  ConvexBody b;
  b.kind_ = BodyKind::segment;
  b.space_ = space;
  b.points_ = {a, c};
  b.frame_ = make_frame(space, a, c);
  return b;
}

ConvexBody ConvexBody::line(const ModelSpace& space, const SpacePoint& a, const SpacePoint& c) {
  ConvexBody b = segment(space, a, c);
  b.kind_ = BodyKind::line;
  b.frame_.length = std::numeric_limits<double>::infinity();
  return b;
}

ConvexBody ConvexBody::line(const ModelSpace& space, const BoundaryPoint& xi, const BoundaryPoint& eta) {
  require_planar(space);
  if (!hyperbolic(space)) throw Error(ErrorCode::unsupported_kind, "ideal endpoints need a hyperboloid");
  auto null = [](const BoundaryPoint& p) {
    Vec v(3);
    v[0] = 1.0;
    v.tail(2) = p.direction / p.direction.norm();
    return v;
  };
  const Vec n1 = null(xi), n2 = null(eta);
  const double k = -minkowski_dot(n1, n2);
  if (k <= 1e-12) throw Error(ErrorCode::degenerate_geodesic, "a line needs two distinct ideal endpoints");
  ConvexBody b;
  b.kind_ = BodyKind::line;
  b.space_ = space;
  const SpacePoint a = space.normalize(SpacePoint(Vec((n1 + n2) / std::sqrt(2 * k))));
  const Vec u = (n1 - n2) / std::sqrt(2 * k);
  b.frame_ = make_frame(space, a, space.normalize(SpacePoint(Vec(std::cosh(1.0) * a.coords + std::sinh(1.0) * u))));
  b.frame_.length = std::numeric_limits<double>::infinity();
  b.points_ = {a, space.normalize(SpacePoint(Vec(std::cosh(1.0) * a.coords + std::sinh(1.0) * u)))};
  return b;
}

ConvexBody ConvexBody::hull(const ModelSpace& space, const std::vector<SpacePoint>& points) {
  require_planar(space);
  if (points.empty()) throw Error(ErrorCode::invalid_input, "hull of no points");
  std::vector<std::pair<Vec, SpacePoint>> pts;
  for (const auto& p : points) {
    space.validate(p);
    pts.push_back({klein_coords(space, p), p});
  }
  std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) {
    return x.first[0] != y.first[0] ? x.first[0] < y.first[0] : x.first[1] < y.first[1];
  });
  // Andrew's monotone chain; geodesics are straight in Klein coordinates.
  std::vector<std::pair<Vec, SpacePoint>> h;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t start = h.size();
    for (const auto& p : pts) {
      while (h.size() >= start + 2 && cross2(h[h.size() - 2].first, h.back().first, p.first) <= 1e-15) h.pop_back();
      h.push_back(p);
    }
    h.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  if (h.size() <= 1) return point(space, pts.front().second);
  if (h.size() == 2) return segment(space, h[0].second, h[1].second);
  ConvexBody b;
  b.kind_ = BodyKind::hull;
  b.space_ = space;
  for (auto& [k, p] : h) {
    b.klein_.push_back(k);
    b.points_.push_back(p);
  }
  return b;
}

const ConvexBody::Frame& ConvexBody::frame() const {
  if (kind_ != BodyKind::segment && kind_ != BodyKind::line)
    throw Error(ErrorCode::unsupported_kind, "only segments and lines carry a frame");
  return frame_;
}

double ConvexBody::param_of(const SpacePoint& x) const {
  if (hyperbolic(space_)) {
    const double alpha = -minkowski_dot(x.coords, frame_.a.coords);
    const double beta = minkowski_dot(x.coords, frame_.u);
    return std::atanh(std::clamp(beta / alpha, -1.0 + 1e-16, 1.0 - 1e-16));
  }
  return (x.coords - frame_.a.coords).dot(frame_.u);
}

SpacePoint ConvexBody::on_frame(double s) const {
  if (hyperbolic(space_))
    return space_.normalize(SpacePoint(Vec(std::cosh(s) * frame_.a.coords + std::sinh(s) * frame_.u)));
  return SpacePoint(Vec(frame_.a.coords + s * frame_.u));
}

SpacePoint ConvexBody::fermi(double s, double z) const {
  frame();
  if (hyperbolic(space_))
    return space_.normalize(SpacePoint(Vec(std::cosh(z) * on_frame(s).coords + std::sinh(z) * frame_.n)));
  return SpacePoint(Vec(frame_.a.coords + s * frame_.u + z * frame_.n));
}

std::pair<double, double> ConvexBody::fermi_coords(const SpacePoint& x) const {
  frame();
  if (hyperbolic(space_)) return {param_of(x), std::asinh(minkowski_dot(x.coords, frame_.n))};
  return {param_of(x), (x.coords - frame_.a.coords).dot(frame_.n)};
}

bool ConvexBody::hull_contains(const SpacePoint& x) const {
  const Vec k = klein_coords(space_, x);
  for (std::size_t i = 0; i < klein_.size(); ++i)
    if (cross2(klein_[i], klein_[(i + 1) % klein_.size()], k) < -1e-15) return false;
  return true;
}

SpacePoint ConvexBody::project(const SpacePoint& x) const {
  switch (kind_) {
    case BodyKind::point: return points_[0];
    case BodyKind::segment: return on_frame(std::clamp(param_of(x), 0.0, frame_.length));
    case BodyKind::line: return on_frame(param_of(x));
    case BodyKind::hull: {
      if (hull_contains(x)) return x;
      SpacePoint best;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < points_.size(); ++i) {
        SpacePoint p = segment_projection(space_, points_[i], points_[(i + 1) % points_.size()], x);
        const double d = space_.distance(x, p);
        if (d < best_d) {
          best_d = d;
          best = std::move(p);
        }
      }
      return best;
    }
  }
  return x;
}

double ConvexBody::distance(const SpacePoint& x) const { return space_.distance(x, project(x)); }

SpacePoint closest_point_projection(const ConvexBody& body, const SpacePoint& x) { return body.project(x); }
double dist_to_C(const ConvexBody& body, const SpacePoint& x) { return body.distance(x); }

SpacePoint normal_flow(const ConvexBody& body, const SpacePoint& x, double t) {
  const ModelSpace& space = body.space();
  const SpacePoint p = body.project(x);
  const double d = space.distance(p, x);
  if (d <= space.tol() * point_scale(x)) throw Error(ErrorCode::undefined_normal, "the normal flow is undefined on C");
  if (t < -(d - space.tol())) throw Error(ErrorCode::precondition, "flow time would cross C");
  if (t == 0.0) return x;
  return space.geodesic_point(p, x, d + t);
}

BoundaryPoint flow_to_infinity(const ConvexBody& body, const SpacePoint& x) {
  const ModelSpace& space = body.space();
  if (!hyperbolic(space)) throw Error(ErrorCode::unsupported_kind, "flow to infinity needs a hyperboloid");
  const SpacePoint p = body.project(x);
  const double d = space.distance(p, x);
  if (d <= space.tol() * point_scale(x)) throw Error(ErrorCode::undefined_normal, "the normal flow is undefined on C");
  const Vec v = space.log_map(p, x) / d;
  const Vec null = p.coords + v;
  return BoundaryPoint{Vec(null.tail(2) / null[0])};
}

double angle_to_C(const ConvexBody& body, const SpacePoint& q, const SpacePoint& q_prime) {
  const SpacePoint p = body.project(q);
  if (body.space().distance(p, q) <= body.space().tol() * point_scale(q))
    throw Error(ErrorCode::undefined_normal, "angle to C is undefined on C");
  return body.space().angle_at(q, q_prime, p);
}

bool check_large_angle_escape(const ConvexBody& body, double eps, const SpacePoint& q, const SpacePoint& q_prime,
                              int samples) {
  const ModelSpace& space = body.space();
  if (std::abs(body.distance(q) - eps) > 1e-6 * std::max(1.0, eps))
    throw Error(ErrorCode::precondition, "q must lie on the boundary of C_eps");
  // Angles at most pi/2 do not escape; the sampled check below would report
  // the first re-entry anyway, this short-cut only avoids the work.
  if (angle_to_C(body, q, q_prime) <= kPi / 2) return false;
  const double L = space.distance(q, q_prime);
  for (int i = 1; i <= samples; ++i) {
    const SpacePoint x = space.geodesic_point(q, q_prime, L * i / samples);
    if (!(body.distance(x) > eps)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

bool EpsNeighborhood::contains(const SpacePoint& x) const {
  return body.distance(x) <= eps + body.space().tol() * point_scale(x);
}

SpacePoint EpsNeighborhood::foot(const SpacePoint& c) const {
  if (body.kind() == BodyKind::line) {
    const auto [s, z] = body.fermi_coords(c);
    (void)z;
    return body.fermi(s, side * eps);
  }
  return normal_flow(body, c, eps - body.distance(c));
}

double EpsNeighborhood::distance_to_sigma(const SpacePoint& c) const {
  if (body.kind() == BodyKind::line) return std::abs(side * eps - body.fermi_coords(c).second);
  return std::abs(eps - body.distance(c));
}

namespace {

SpacePoint polar(const ModelSpace& space, const SpacePoint& center, double r, double theta) {
  if (space.kind() == SpaceKind::euclidean) {
    Vec c = center.coords;
    c[0] += r * std::cos(theta);
    c[1] += r * std::sin(theta);
    return SpacePoint(std::move(c));
  }
  const auto basis = space.tangent_basis(center);
  return space.exp_map(center, Vec(r * (std::cos(theta) * basis[0] + std::sin(theta) * basis[1])));
}

double circumference_factor(const ModelSpace& space, double r) {
  return hyperbolic(space) ? std::sinh(r) : r;
}

// Point at angle phi on the half circle of radius eps around an endpoint,
// phi = 0 along `out`, phi = +-pi/2 along +-n.
SpacePoint cap_point(const ModelSpace& space, const SpacePoint& at, const Vec& out, const Vec& n, double eps,
                     double phi) {
  return space.exp_map(at, Vec(eps * (std::cos(phi) * out + std::sin(phi) * n)));
}

}  // namespace

std::vector<SpacePoint> EpsNeighborhood::sample_sigma(int count, double period) const {
  if (count <= 0) throw Error(ErrorCode::invalid_input, "sample count must be positive");
  const ModelSpace& space = body.space();
  std::vector<SpacePoint> out;
  switch (body.kind()) {
    case BodyKind::point:
      for (int i = 0; i < count; ++i) out.push_back(polar(space, body.points()[0], eps, 2 * kPi * i / count));
      return out;
    case BodyKind::line:
      if (!(period > 0)) throw Error(ErrorCode::invalid_input, "sampling a line needs a period");
      for (int i = 0; i < count; ++i) out.push_back(body.fermi(period * i / count, side * eps));
      return out;
    case BodyKind::segment: {
      const auto& f = body.frame();
      const double L = f.length;
      const double side_len = L * (hyperbolic(space) ? std::cosh(eps) : 1.0);
      const double cap_len = kPi * circumference_factor(space, eps);
      const double total = 2 * side_len + 2 * cap_len;
      const SpacePoint b = body.fermi(L, 0.0);
      const Vec u_b = hyperbolic(space) ? Vec(std::sinh(L) * f.a.coords + std::cosh(L) * f.u) : f.u;
      for (int i = 0; i < count; ++i) {
        double t = total * i / count;
        if (t < side_len) {
          out.push_back(body.fermi(L * t / side_len, eps));
        } else if ((t -= side_len) < cap_len) {
          out.push_back(cap_point(space, b, u_b, f.n, eps, kPi / 2 - kPi * t / cap_len));
        } else if ((t -= cap_len) < side_len) {
          out.push_back(body.fermi(L - L * t / side_len, -eps));
        } else {
          t -= side_len;
          out.push_back(cap_point(space, f.a, Vec(-f.u), f.n, eps, -kPi / 2 + kPi * t / cap_len));
        }
      }
      return out;
    }
    case BodyKind::hull: break;
  }
  throw Error(ErrorCode::unsupported_kind, "boundary sampling of hull bodies is not supported");
}

std::vector<SpacePoint> EpsNeighborhood::sample_region(double spacing, double period) const {
  if (!(spacing > 0)) throw Error(ErrorCode::invalid_input, "sample spacing must be positive");
  const ModelSpace& space = body.space();
  std::vector<SpacePoint> out;
  switch (body.kind()) {
    case BodyKind::point: {
      const int rings = static_cast<int>(std::ceil(eps / spacing));
      out.push_back(body.points()[0]);
      for (int k = 1; k <= rings; ++k) {
        const double r = eps * k / rings;
        const int n = std::max(3, static_cast<int>(std::ceil(2 * kPi * circumference_factor(space, r) / spacing)));
        for (int i = 0; i < n; ++i) out.push_back(polar(space, body.points()[0], r, 2 * kPi * i / n));
      }
      return out;
    }
    case BodyKind::line: {
      if (!(period > 0)) throw Error(ErrorCode::invalid_input, "sampling a line needs a period");
      const double stretch = hyperbolic(space) ? std::cosh(eps) : 1.0;
      const int ns = static_cast<int>(std::ceil(period * stretch / spacing));
      const int nz = static_cast<int>(std::ceil(2 * eps / spacing));
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j <= nz; ++j) out.push_back(body.fermi(period * i / ns, -eps + 2 * eps * j / nz));
      return out;
    }
    case BodyKind::segment: {
      const double L = body.frame().length;
      const double stretch = hyperbolic(space) ? std::cosh(eps) : 1.0;
      const int ns = static_cast<int>(std::ceil((L + 2 * eps) * stretch / spacing));
      const int nz = static_cast<int>(std::ceil(2 * eps / spacing));
      for (int i = 0; i <= ns; ++i)
        for (int j = 0; j <= nz; ++j) {
          SpacePoint x = body.fermi(-eps + (L + 2 * eps) * i / ns, -eps + 2 * eps * j / nz);
          if (body.distance(x) <= eps) out.push_back(std::move(x));
        }
      return out;
    }
    case BodyKind::hull: break;
  }
  throw Error(ErrorCode::unsupported_kind, "region sampling of hull bodies is not supported");
}

}  // namespace barylab
