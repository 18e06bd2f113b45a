#include "barylab/barycenters.hpp"

#include "barylab/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace barylab {

const char* to_string(BarycenterStatus s) {
  switch (s) {
    case BarycenterStatus::found: return "found";
    case BarycenterStatus::not_found: return "not-found";
    case BarycenterStatus::indeterminate: return "indeterminate";
  }
  return "unknown";
}

double BarycenterCertificate::min_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (double s : relative_slacks) m = std::min(m, s);
  return m;
}

double lambda_of(const ModelSpace& space, const SpacePoint& b, const std::vector<SpacePoint>& P) {
  const double d = diameter(space, P);
  if (!(d > 0)) throw Error(ErrorCode::precondition, "lambda_of needs diam(P) > 0");
  double m = 0.0;
  for (const auto& p : P) m = std::max(m, space.distance(b, p));
  return m / d;
}

namespace {

double diam_with(const ModelSpace& space, const SpacePoint& q, const std::vector<SpacePoint>& P, double diam_p) {
  double d = diam_p;
  for (const auto& p : P) d = std::max(d, space.distance(q, p));
  return d;
}

double max_dist(const ModelSpace& space, const SpacePoint& b, const std::vector<SpacePoint>& P) {
  double m = 0.0;
  for (const auto& p : P) m = std::max(m, space.distance(b, p));
  return m;
}

void fill(BarycenterCertificate& c, const ModelSpace& space, const SpacePoint& b, const std::vector<SpacePoint>& P,
          const std::vector<SpacePoint>& Q) {
  c.point = b;
  c.diam_P = diameter(space, P);
  c.achieved_lambda = c.diam_P > 0 ? max_dist(space, b, P) / c.diam_P : 0.0;
  c.relative_slacks = relative_slacks(space, b, P, Q);
}

BarycenterCertificate trivial(const ModelSpace& space, const std::vector<SpacePoint>& P,
                              const std::vector<SpacePoint>& Q, double lambda) {
  BarycenterCertificate c;
  c.status = BarycenterStatus::found;
  c.method = "trivial";
  c.requested_lambda = lambda;
  fill(c, space, P.front(), P, Q);
  return c;
}

void require_points(const std::vector<SpacePoint>& P) {
  if (P.empty()) throw Error(ErrorCode::invalid_input, "P must be nonempty");
}

}  // namespace

std::vector<double> relative_slacks(const ModelSpace& space, const SpacePoint& b, const std::vector<SpacePoint>& P,
                                    const std::vector<SpacePoint>& Q) {
  const double dp = diameter(space, P);
  std::vector<double> out;
  out.reserve(Q.size());
  for (const auto& q : Q) out.push_back(diam_with(space, q, P, dp) - space.distance(b, q));
  return out;
}

BarycenterCertificate cat0_midpoint_rule(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                         const std::vector<SpacePoint>& Q) {
  require_points(P);
  if (!space.is_cat0()) throw Error(ErrorCode::unsupported_kind, "the midpoint rule needs a CAT(0) space");
  const double rule_lambda = std::sqrt(3.0) / 2.0;
  std::size_t bi = 0, bj = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i)
    for (std::size_t j = i + 1; j < P.size(); ++j) {
      const double d = space.distance(P[i], P[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  if (best == 0.0) return trivial(space, P, Q, rule_lambda);
  BarycenterCertificate c;
  c.status = BarycenterStatus::found;
  c.method = "cat0-midpoint";
  c.requested_lambda = rule_lambda;
  fill(c, space, space.geodesic_point(P[bi], P[bj], 0.5 * best), P, Q);
  const double slack = 10 * space.tol() * std::max(1.0, best);
  if (c.achieved_lambda > rule_lambda + 10 * space.tol() || c.min_slack() < -slack)
    throw Error(ErrorCode::model_space_violation, "midpoint of a diameter pair failed the CAT(0) bounds (lambda " +
                                                      std::to_string(c.achieved_lambda) + ", slack " +
                                                      std::to_string(c.min_slack()) + ")");
  return c;
}

BarycenterCertificate circle_arc_rule(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                      const std::vector<SpacePoint>& Q, std::optional<double> Delta) {
  require_points(P);
  if (space.kind() != SpaceKind::circle) throw Error(ErrorCode::unsupported_kind, "the arc rule needs a circle");
  const double r = space.radius();
  std::vector<SpacePoint> all = P;
  all.insert(all.end(), Q.begin(), Q.end());
  const double diam_all = diameter(space, all);
  const double delta = Delta.value_or(0.5 * diam_all);
  if (!(delta < 0.5 * std::sqrt(3.0) * r) || diam_all > 2 * delta + space.tol())
    throw Error(ErrorCode::diameter_too_large, "the arc rule needs diam(P ∪ Q) <= 2 Delta with Delta < (sqrt 3/2) r");

  std::vector<double> angles;
  for (const auto& p : P) angles.push_back(space.circle_angle(p));
  std::sort(angles.begin(), angles.end());
  // The shortest containing arc is the complement of the largest gap.
  const double two_pi = 2.0 * M_PI;
  std::size_t gap_end = 0;
  double gap = angles.front() + two_pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) {
    if (angles[i] - angles[i - 1] > gap) {
      gap = angles[i] - angles[i - 1];
      gap_end = i;
    }
  }
  const double start = angles[gap_end];
  const double length = two_pi - gap;
  const SpacePoint b = angles.size() == 1 ? P.front() : space.circle_point(start + 0.5 * length);

  BarycenterCertificate c;
  c.status = BarycenterStatus::found;
  c.method = "circle-arc";
  c.metric = "arc";
  c.requested_lambda = 0.5;
  fill(c, space, b, P, Q);
  c.chordal_lambda = c.achieved_lambda;
  double arc_diam = 0.0, arc_max = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    arc_max = std::max(arc_max, space.arc_distance(b, P[i]));
    for (std::size_t j = i + 1; j < P.size(); ++j) arc_diam = std::max(arc_diam, space.arc_distance(P[i], P[j]));
  }
  c.achieved_lambda = arc_diam > 0 ? arc_max / arc_diam : 0.0;
  if (c.achieved_lambda > 0.5 + 10 * space.tol() || c.min_slack() < -10 * space.tol())
    throw Error(ErrorCode::model_space_violation, "arc midpoint failed the arc-rule bounds");
  return c;
}

namespace {

struct EnclosingBall {
  Vec center;
  double radius2 = -1.0;
};

EnclosingBall circumball(const std::vector<Vec>& pts) {
  EnclosingBall b;
  if (pts.empty()) return b;
  const Vec& p0 = pts[0];
  if (pts.size() == 1) {
    b.center = p0;
    b.radius2 = 0.0;
    return b;
  }
  const auto k = static_cast<Eigen::Index>(pts.size() - 1);
  Mat a(p0.size(), k);
  for (Eigen::Index i = 0; i < k; ++i) a.col(i) = pts[static_cast<std::size_t>(i + 1)] - p0;
  const Mat gram = a.transpose() * a;
  Vec rhs = 0.5 * gram.diagonal();
  const Vec alpha = gram.completeOrthogonalDecomposition().solve(rhs);
  b.center = p0 + a * alpha;
  b.radius2 = 0.0;
  for (const auto& p : pts) b.radius2 = std::max(b.radius2, (p - b.center).squaredNorm());
  return b;
}

EnclosingBall welzl(const std::vector<Vec>& pts, std::size_t n, std::vector<Vec>& boundary, std::size_t dim) {
  if (n == 0 || boundary.size() == dim + 1) return circumball(boundary);
  EnclosingBall b = welzl(pts, n - 1, boundary, dim);
  const Vec& p = pts[n - 1];
  if (b.radius2 >= 0 && (p - b.center).squaredNorm() <= b.radius2 * (1 + 1e-12) + 1e-300) return b;
  boundary.push_back(p);
  b = welzl(pts, n - 1, boundary, dim);
  boundary.pop_back();
  return b;
}

}  // namespace

BarycenterCertificate minimax_center(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                     const std::vector<SpacePoint>& Q) {
  require_points(P);
  if (space.kind() != SpaceKind::euclidean) throw Error(ErrorCode::unsupported_kind, "minimax_center needs euclidean space");
  std::vector<Vec> pts;
  for (const auto& p : P) pts.push_back(p.coords);
  std::vector<Vec> boundary;
  const EnclosingBall ball = welzl(pts, pts.size(), boundary, static_cast<std::size_t>(space.dim()));
  BarycenterCertificate c;
  c.status = BarycenterStatus::found;
  c.method = "minimax";
  fill(c, space, SpacePoint(ball.center), P, Q);
  c.requested_lambda = c.achieved_lambda;
  return c;
}

namespace {

// Square cells in a chart around the search region.
struct Chart {
  const ModelSpace* space = nullptr;
  SpacePoint center;
  std::vector<Vec> basis;
  int dim = 0;
  double extent = 0.0;  // chart radius

  SpacePoint point(const Vec& x) const {
    switch (space->kind()) {
      case SpaceKind::circle: return space->circle_point(x[0]);
      case SpaceKind::euclidean: return SpacePoint(center.coords + x);
      default: {
        Vec v = Vec::Zero(center.size());
        for (int i = 0; i < dim; ++i) v += x[i] * basis[static_cast<std::size_t>(i)];
        return space->exp_map(center, v);
      }
    }
  }

  // Upper bound on the distance from the image of a cell centre to any point of the cell.
  double covering(double half_width) const {
    switch (space->kind()) {
      case SpaceKind::circle: return space->radius() * half_width;
      case SpaceKind::euclidean: return half_width * std::sqrt(static_cast<double>(dim));
      default: {
        const double t = extent + 2 * half_width * std::sqrt(static_cast<double>(dim));
        return half_width * std::sqrt(static_cast<double>(dim)) * std::sinh(t) / t;
      }
    }
  }
};

struct Cell {
  Vec x;
  double half_width = 0.0;
  double a = 0.0;  // max_p d / diam
  double v = 0.0;  // max_q (d - diam_q)
};

class GridSolver {
 public:
  GridSolver(const BarycenterProblem& prob, double lambda) : prob_(prob), lambda_(lambda) {
    diam_ = diameter(prob.space, prob.P);
    for (const auto& q : prob.Q) diam_q_.push_back(diam_with(prob.space, q, prob.P, diam_));
  }

  void eval(Cell& c, const SpacePoint& b) const {
    c.a = max_dist(prob_.space, b, prob_.P) / diam_;
    c.v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prob_.Q.size(); ++i)
      c.v = std::max(c.v, prob_.space.distance(b, prob_.Q[i]) - diam_q_[i]);
  }

  std::vector<MinimaxTerm> terms() const {
    std::vector<MinimaxTerm> t;
    for (const auto& p : prob_.P) t.push_back({p, 1.0 / diam_, 0.0});
    for (std::size_t i = 0; i < prob_.Q.size(); ++i)
      t.push_back({prob_.Q[i], 1.0 / diam_, lambda_ - diam_q_[i] / diam_});
    return t;
  }

  double diam() const { return diam_; }

 private:
  const BarycenterProblem& prob_;
  double lambda_;
  double diam_ = 0.0;
  std::vector<double> diam_q_;
};

bool grid_supported(const ModelSpace& space) {
  return space.kind() == SpaceKind::circle || (space.kind() == SpaceKind::euclidean && space.dim() <= 2) ||
         (space.kind() == SpaceKind::hyperboloid && space.dim() == 2);
}

}  // namespace

BarycenterCertificate solve_barycenter(const BarycenterProblem& prob, double lambda, const SolveOptions& opts) {
  require_points(prob.P);
  const ModelSpace& space = prob.space;
  if (!space.is_geodesic()) throw Error(ErrorCode::unsupported_kind, "solve_barycenter needs a geodesic space");
  if (!(lambda >= 0.5 && lambda < 1.0)) throw Error(ErrorCode::precondition, "lambda must lie in [1/2, 1)");
  for (const auto& p : prob.P) space.validate(p);
  for (const auto& q : prob.Q) space.validate(q);
  const double tol = space.tol();
  if (diameter(space, prob.P) == 0.0) return trivial(space, prob.P, prob.Q, lambda);

  GridSolver solver(prob, lambda);
  const double diam = solver.diam();
  const auto terms = solver.terms();

  std::vector<SpacePoint> all = prob.P;
  all.insert(all.end(), prob.Q.begin(), prob.Q.end());
  const SearchRegion region = prob.region.value_or(SearchRegion{prob.P.front(), diameter(space, all)});
  const bool bounded_region = space.kind() != SpaceKind::circle;

  BarycenterCertificate cert;
  cert.requested_lambda = lambda;
  cert.method = "grid+descent";
  cert.diam_P = diam;

  auto accept = [&](const SpacePoint& b) {
    if (bounded_region && space.distance(b, region.center) > region.radius + tol) return false;
    BarycenterCertificate c = cert;
    fill(c, space, b, prob.P, prob.Q);
    if (c.achieved_lambda <= lambda + tol && c.min_slack() >= -tol) {
      c.status = BarycenterStatus::found;
      cert = c;
      return true;
    }
    return false;
  };

  // After a feasible hit, keep descending towards the minimax point and take it
  // when it stays feasible.
  auto polish_found = [&]() {
    const MinimaxResult r =
        minimax_descent(space, terms, cert.point, opts.max_iter, -std::numeric_limits<double>::infinity());
    if (bounded_region && space.distance(r.point, region.center) > region.radius + tol) return;
    BarycenterCertificate c = cert;
    fill(c, space, r.point, prob.P, prob.Q);
    if (c.achieved_lambda < cert.achieved_lambda && c.min_slack() >= -tol) cert = c;
  };

  auto descend_from = [&](const SpacePoint& s) {
    MinimaxResult r = minimax_descent(space, terms, s, opts.max_iter, lambda - 1e-3 * tol);
    if (!accept(r.point)) return false;
    polish_found();
    return true;
  };

  // Descent from natural starting points first.
  std::vector<SpacePoint> starts = prob.P;
  for (std::size_t i = 0; i < prob.P.size(); ++i)
    for (std::size_t j = i + 1; j < prob.P.size(); ++j) {
      const double d = space.distance(prob.P[i], prob.P[j]);
      if (d > 0 && !(space.kind() == SpaceKind::circle && d >= 2 * space.radius() - tol))
        starts.push_back(space.geodesic_point(prob.P[i], prob.P[j], 0.5 * d));
    }
  for (const auto& s : starts)
    if (descend_from(s)) return cert;

  if (!grid_supported(space)) {
    cert.status = BarycenterStatus::indeterminate;
    return cert;
  }

  Chart chart;
  chart.space = &space;
  chart.center = region.center;
  chart.dim = space.dim();
  if (space.kind() == SpaceKind::hyperboloid) chart.basis = space.tangent_basis(region.center);
  chart.extent = region.radius;

  const double rho = opts.resolution > 0 ? opts.resolution : diam / 200.0;
  std::vector<Cell> cells;
  if (space.kind() == SpaceKind::circle) {
    const auto n = static_cast<long>(std::ceil(2 * M_PI * space.radius() / rho));
    const double hw = M_PI / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      Cell c;
      c.x = Vec::Constant(1, -M_PI + (2 * i + 1) * hw);
      c.half_width = hw;
      cells.push_back(c);
    }
  } else {
    double hw = 0.5 * rho;
    if (space.kind() == SpaceKind::hyperboloid) {
      // Shrink chart spacing so the covering radius matches the Euclidean case.
      const double t = region.radius + rho;
      hw *= t / std::sinh(t);
    }
    const auto n = static_cast<long>(std::ceil(region.radius / (2 * hw)));
    const double reach = region.radius + hw * std::sqrt(static_cast<double>(chart.dim));
    std::vector<long> idx(static_cast<std::size_t>(chart.dim), -n);
    while (true) {
      Cell c;
      c.x = Vec(chart.dim);
      for (int k = 0; k < chart.dim; ++k) c.x[k] = 2 * hw * static_cast<double>(idx[static_cast<std::size_t>(k)]);
      c.half_width = hw;
      if (c.x.norm() <= reach) cells.push_back(c);
      int k = 0;
      while (k < chart.dim && ++idx[static_cast<std::size_t>(k)] > n) idx[static_cast<std::size_t>(k++)] = -n;
      if (k == chart.dim) break;
    }
  }

  const double eps_q = tol * std::max(1.0, diam);
  // Returns true and sets cert when a grid point is feasible; otherwise fills
  // the undecided list and the certified lower bound.
  auto sweep = [&](std::vector<Cell>& cs, std::vector<Cell>& undecided, double& bound) {
    for (auto& c : cs) {
      const SpacePoint b = chart.point(c.x);
      solver.eval(c, b);
      const double h = chart.covering(c.half_width);
      if (c.a <= lambda && c.v <= 0 && accept(b)) return true;
      if (c.v - h <= eps_q) bound = std::min(bound, c.a - h / diam);
      const bool excluded = (c.a - h / diam > lambda + tol) || (c.v - h > eps_q);
      if (!excluded) undecided.push_back(c);
      cert.grid_resolution = std::max(cert.grid_resolution, h);
    }
    return false;
  };

  double bound = std::numeric_limits<double>::infinity();
  std::vector<Cell> undecided;
  if (sweep(cells, undecided, bound)) {
    polish_found();
    return cert;
  }

  auto polish = [&](std::vector<Cell>& cs) {
    std::sort(cs.begin(), cs.end(), [](const Cell& a, const Cell& b) {
      return std::max(a.a, a.v) < std::max(b.a, b.v);
    });
    for (std::size_t i = 0; i < std::min<std::size_t>(5, cs.size()); ++i)
      if (descend_from(chart.point(cs[i].x))) return true;
    return false;
  };

  if (!undecided.empty() && polish(undecided)) return cert;

  if (!undecided.empty() && opts.refine) {
    const int sub = 10;
    const long per_cell = static_cast<long>(std::pow(sub, chart.dim));
    if (static_cast<long>(undecided.size()) * per_cell <= 4'000'000) {
      std::vector<Cell> finer;
      for (const auto& c : undecided) {
        const double hw = c.half_width / sub;
        std::vector<int> idx(static_cast<std::size_t>(chart.dim), 0);
        while (true) {
          Cell f;
          f.x = c.x;
          for (int k = 0; k < chart.dim; ++k) f.x[k] += -c.half_width + (2 * idx[static_cast<std::size_t>(k)] + 1) * hw;
          f.half_width = hw;
          finer.push_back(f);
          int k = 0;
          while (k < chart.dim && ++idx[static_cast<std::size_t>(k)] >= sub) idx[static_cast<std::size_t>(k++)] = 0;
          if (k == chart.dim) break;
        }
      }
      // Bounds from the coarse cells that were excluded stay valid.
      double refined_bound = std::numeric_limits<double>::infinity();
      for (const auto& c : cells) {
        const double h = chart.covering(c.half_width);
        const bool was_undecided = !((c.a - h / diam > lambda + tol) || (c.v - h > eps_q));
        if (!was_undecided && c.v - h <= eps_q) refined_bound = std::min(refined_bound, c.a - h / diam);
      }
      std::vector<Cell> still;
      cert.grid_resolution = 0.0;
      if (sweep(finer, still, refined_bound)) {
        polish_found();
        return cert;
      }
      for (const auto& c : cells) cert.grid_resolution = std::max(cert.grid_resolution, chart.covering(c.half_width) / sub);
      bound = refined_bound;
      undecided = std::move(still);
      if (!undecided.empty() && polish(undecided)) return cert;
    }
  }

  cert.lambda_bound = bound;
  cert.status = undecided.empty() ? BarycenterStatus::not_found : BarycenterStatus::indeterminate;
  return cert;
}

namespace {

SpacePoint random_near(const ModelSpace& space, const SpacePoint& base, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto basis = space.tangent_basis(base);
  if (space.kind() == SpaceKind::circle) {
    // Arc radius whose chord is `radius`.
    const double arc = 2 * space.radius() * std::asin(std::min(1.0, radius / (2 * space.radius())));
    return space.exp_map(base, unit(rng) * arc * basis[0]);
  }
  while (true) {
    Vec x(static_cast<Eigen::Index>(basis.size()));
    for (auto& v : x) v = unit(rng);
    if (x.norm() > 1.0) continue;
    Vec t = Vec::Zero(base.size());
    for (std::size_t i = 0; i < basis.size(); ++i) t += radius * x[static_cast<Eigen::Index>(i)] * basis[i];
    return space.exp_map(base, t);
  }
}

SpacePoint random_base(const ModelSpace& space, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (space.kind()) {
    case SpaceKind::euclidean: {
      Vec v(space.dim());
      for (auto& x : v) x = normal(rng);
      return SpacePoint(v);
    }
    case SpaceKind::hyperboloid: {
      Vec v(space.dim());
      for (auto& x : v) x = 0.5 * normal(rng);
      return space.lift(v);
    }
    default: {
      Vec v(space.ambient_dim());
      for (auto& x : v) x = normal(rng);
      return space.normalize(SpacePoint(v));
    }
  }
}

}  // namespace

SampleReport has_barycenters_sample(const ModelSpace& space, double lambda, double Delta, int trials,
                                    std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::invalid_input, "trials must be >= 1");
  if (!space.is_geodesic()) throw Error(ErrorCode::unsupported_kind, "sampling needs a geodesic space");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> p_size(2, 6), q_size(0, 6);
  const double r = space.radius();
  const bool plant = (space.kind() == SpaceKind::circle) && Delta >= std::sqrt(3.0) * r - space.tol();

  SampleReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::vector<SpacePoint> P, Q;
    if (plant && t == trials - 1) {
      const double phase = std::uniform_real_distribution<double>(0.0, 2 * M_PI)(rng);
      for (int k = 0; k < 3; ++k) P.push_back(space.circle_point(phase + 2 * M_PI * k / 3.0));
      rep.witness_planted = true;
    } else {
      const SpacePoint base = random_base(space, rng);
      const int np = p_size(rng), nq = q_size(rng);
      while (static_cast<int>(P.size()) < np) {
        SpacePoint p = random_near(space, base, 0.5 * Delta, rng);
        P.push_back(p);
        if (diameter(space, P) > Delta) P.pop_back();
      }
      const double dp = diameter(space, P);
      for (int attempt = 0; static_cast<int>(Q.size()) < nq && attempt < 100 * nq; ++attempt) {
        SpacePoint q = random_near(space, base, Delta, rng);
        std::vector<SpacePoint> all = P;
        all.insert(all.end(), Q.begin(), Q.end());
        all.push_back(q);
        if (diameter(space, all) <= 2 * Delta && dp <= Delta) Q.push_back(q);
      }
    }

    std::vector<SpacePoint> all = P;
    all.insert(all.end(), Q.begin(), Q.end());
    const double diam_all = diameter(space, all);
    BarycenterCertificate c;
    if (space.kind() == SpaceKind::circle && lambda >= 0.5 && diam_all < std::sqrt(3.0) * r) {
      c = circle_arc_rule(space, P, Q);
    } else if (space.is_cat0() && lambda >= std::sqrt(3.0) / 2.0) {
      c = cat0_midpoint_rule(space, P, Q);
    } else {
      BarycenterProblem prob{space, P, Q, std::nullopt};
      c = solve_barycenter(prob, lambda);
    }
    const bool ok = c.status == BarycenterStatus::found && c.achieved_lambda <= lambda + space.tol() &&
                    c.min_slack() >= -space.tol();
    if (ok) {
      ++rep.passed;
      rep.worst_lambda = std::max(rep.worst_lambda, c.achieved_lambda);
    } else {
      rep.failures.push_back({P, Q, c});
    }
  }
  rep.pass_rate = static_cast<double>(rep.passed) / trials;
  return rep;
}

}  // namespace barylab
