#include "barylab/retraction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <thread>

namespace barylab {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool hyperbolic(const ModelSpace& space) { return space.kind() == SpaceKind::hyperboloid; }

SpacePoint offset(const ModelSpace& space, const SpacePoint& at, double r, double theta) {
  const auto basis = space.tangent_basis(at);
  return space.exp_map(at, Vec(r * (std::cos(theta) * basis[0] + std::sin(theta) * basis[1])));
}

double circumference_factor(const ModelSpace& space, double r) { return hyperbolic(space) ? std::sinh(r) : r; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

double translation_period(const Scene& scene) {
  if (scene.body.kind() != BodyKind::line) return 0.0;
  if (scene.group.generators.empty())
    throw Error(ErrorCode::invalid_input, "a line scene needs a translation along the line");
  const auto& a = scene.body.frame().a;
  const SpacePoint ga = scene.group.generators[0].apply(a);
  if (scene.body.distance(ga) > 1e-7 * std::max(1.0, std::abs(ga.coords[0])))
    throw Error(ErrorCode::invalid_input, "the first generator must translate along the line");
  return scene.space.distance(a, ga);
}

std::vector<Ball> generate_cover(const Scene& scene, double rho, double period) {
  const ModelSpace& space = scene.space;
  const double a = scene.cover.spacing * rho;
  const double eps = scene.eps;
  std::string kind = scene.cover.kind;
  if (kind == "auto")
    kind = scene.body.kind() == BodyKind::line    ? "strip"
           : scene.body.kind() == BodyKind::point ? "rings"
                                                  : "hex";
  std::vector<Ball> balls;
  auto add = [&](SpacePoint c) { balls.push_back({std::move(c), rho, static_cast<int>(balls.size())}); };
  const double row_step = a * std::sqrt(3.0) / 2.0;

  if (kind == "strip") {
    if (scene.body.kind() != BodyKind::line) throw Error(ErrorCode::invalid_input, "strip covers need a line body");
    const int rows = static_cast<int>(std::ceil(2 * eps / row_step)) + 1;
    for (int j = 0; j < rows; ++j) {
      const double z = -eps + 2 * eps * j / (rows - 1);
      const double stretch = hyperbolic(space) ? std::cosh(z) : 1.0;
      const int n = std::max(1, static_cast<int>(std::lround(period * stretch / a)));
      for (int i = 0; i < n; ++i) add(scene.body.fermi((i + 0.5 * (j % 2)) * period / n, z));
    }
  } else if (kind == "rings") {
    if (scene.body.kind() != BodyKind::point) throw Error(ErrorCode::invalid_input, "ring covers need a point body");
    const SpacePoint& p = scene.body.points()[0];
    const double r0 = 0.5 * rho;
    for (int i = 0; i < 3; ++i) add(offset(space, p, r0, 2 * kPi * i / 3));
    const int rings = std::max(1, static_cast<int>(std::ceil((eps - r0) / row_step)));
    for (int k = 1; k <= rings; ++k) {
      const double r = r0 + (eps - r0) * k / rings;
      const int n = std::max(3, static_cast<int>(std::lround(2 * kPi * circumference_factor(space, r) / a)));
      for (int i = 0; i < n; ++i) add(offset(space, p, r, 2 * kPi * i / n));
    }
  } else if (kind == "hex") {
    if (space.kind() != SpaceKind::euclidean) throw Error(ErrorCode::invalid_input, "hex covers need Euclidean(2)");
    Vec lo = scene.body.points()[0].coords, hi = lo;
    for (const auto& q : scene.body.points()) {
      lo = lo.cwiseMin(q.coords);
      hi = hi.cwiseMax(q.coords);
    }
    const double m = eps + rho;
    const int rows = static_cast<int>(std::ceil((hi[1] - lo[1] + 2 * m) / row_step));
    const int cols = static_cast<int>(std::ceil((hi[0] - lo[0] + 2 * m) / a)) + 1;
    for (int j = 0; j <= rows; ++j)
      for (int i = 0; i <= cols; ++i) {
        SpacePoint c{lo[0] - m + (i + 0.5 * (j % 2)) * a, lo[1] - m + j * row_step};
        if (scene.body.distance(c) < eps + rho) add(std::move(c));
      }
  } else {
    throw Error(ErrorCode::invalid_input, "unknown cover kind '" + kind + "'");
  }
  return balls;
}

Calibration calibrate(const Scene& scene, const EpsNeighborhood& nbhd, double period) {
  const ModelSpace& space = scene.space;
  const double flow = scene.R - scene.eps;
  // perimeter of one period, from a coarse polyline
  const auto coarse = nbhd.sample_sigma(512, period);
  double perimeter = 0.0;
  for (std::size_t i = 1; i < coarse.size(); ++i) perimeter += space.distance(coarse[i - 1], coarse[i]);
  perimeter *= 512.0 / 511.0;

  Calibration cal;
  double delta = scene.delta;
  for (int halvings = 0; halvings <= 5; ++halvings, delta /= 2) {
    const int count = std::max(scene.density, static_cast<int>(std::ceil(8 * perimeter / delta)));
    const auto sig = nbhd.sample_sigma(count, period);
    std::vector<SpacePoint> pushed;
    for (const auto& q : sig) pushed.push_back(normal_flow(nbhd.body, q, flow));
    const Isometry* g = scene.body.kind() == BodyKind::line ? &scene.group.generators[0] : nullptr;
    auto at = [&](std::size_t i, const std::vector<SpacePoint>& v) {
      if (i < v.size()) return v[i];
      return g ? g->apply(v[i - v.size()]) : v[i - v.size()];
    };
    double worst = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      for (std::size_t k = 1; k < sig.size(); ++k) {
        const SpacePoint q = at(i + k, sig);
        if (space.distance(sig[i], q) > 2 * delta) break;
        ++pairs;
        worst = std::max(worst, space.distance(pushed[i], at(i + k, pushed)));
      }
    }
    cal = {halvings, delta, worst, pairs};
    if (worst <= scene.delta_prime) return cal;
  }
  throw Error(ErrorCode::calibration, "no delta <= delta/32 keeps the pushed-off images of 2 delta-close boundary points within delta'");
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("BARYLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

double PushOffGrid::push_off_distance() const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& l : labels) d = std::min(d, nbhd.body.distance(l) - nbhd.eps);
  return d;
}

double PushOffGrid::iota_diameter(bool boundary_only) const {
  const int G = adj.group.size();
  auto label = [&](int id) {
    const int g = id % G;
    const SpacePoint& l = labels[static_cast<std::size_t>(id / G)];
    return g == 0 ? l : adj.group.element(g).apply(l);
  };
  double d = 0.0;
  for (const auto& e : nerve.simplices_of_dim(1)) {
    if (boundary_only && !(boundary[static_cast<std::size_t>(e[0] / G)] && boundary[static_cast<std::size_t>(e[1] / G)]))
      continue;
    d = std::max(d, nbhd.body.space().distance(label(e[0]), label(e[1])));
  }
  return d;
}

PushOffGrid build_boundary_grid(const Scene& scene) {
  if (!(scene.R > scene.eps && scene.eps > 0)) throw Error(ErrorCode::precondition, "need R > eps > 0");
  PushOffGrid grid;
  grid.nbhd = EpsNeighborhood{scene.body, scene.eps, scene.body.kind() == BodyKind::line ? scene.side : 1};
  grid.R = scene.R;
  grid.delta_prime = scene.delta_prime;
  grid.period = translation_period(scene);
  grid.calibration = calibrate(scene, grid.nbhd, grid.period);
  grid.delta = grid.calibration.delta;
  const double rho = grid.delta / 2;

  BallCover cover{scene.space, generate_cover(scene, rho, grid.period), {}};
  const GroupTable table = scene.group.generators.empty() ? GroupTable::trivial(scene.space)
                                                          : GroupTable(scene.space, scene.group);
  grid.h_fine = is_H_fine(cover, table);
  grid.adj = adjacency(cover, table);

  // K: region samples moved into the base elements.
  grid.k_spacing = rho;
  for (const auto& x : grid.nbhd.sample_region(rho, grid.period)) {
    const int h = locate_group_element(grid.adj, x);
    if (h < 0) {
      ++grid.uncovered;
      continue;
    }
    grid.k_samples.push_back(h == 0 ? x : table.element(table.inverse(h)).apply(x));
  }
  grid.adj.cover.window = grid.k_samples;
  grid.nerve = build_nerve(grid.adj);

  const double flow = scene.R - scene.eps;
  for (const auto& b : cover.elements) {
    const bool on_boundary = grid.nbhd.distance_to_sigma(b.center) < b.radius;
    const SpacePoint q = grid.nbhd.foot(b.center);
    grid.boundary.push_back(on_boundary);
    grid.witnesses.push_back(q);
    grid.labels.push_back(normal_flow(scene.body, q, flow));
    if (on_boundary) grid.witness_angles.push_back(angle_to_C(scene.body, q, grid.labels.back()));
  }

  const int count = std::max(scene.density, static_cast<int>(std::ceil(4 * grid.period / rho)));
  for (const auto& q : grid.nbhd.sample_sigma(count, grid.period)) {
    const int h = locate_group_element(grid.adj, q);
    if (h < 0) continue;
    const SpacePoint p = h == 0 ? q : table.element(table.inverse(h)).apply(q);
    grid.sigma_k.push_back(p);
    grid.k_out.push_back(normal_flow(scene.body, p, flow));
  }
  for (std::size_t i = 0; i < grid.labels.size(); ++i)
    if (!grid.boundary[i]) grid.k_out.push_back(grid.labels[i]);
  return grid;
}

SmallnessReport check_small_relative(const PushOffGrid& grid, double alpha, std::uint64_t seed, int density) {
  SmallnessReport rep;
  const ModelSpace& space = grid.nbhd.body.space();
  const GroupTable& table = grid.adj.group;

  std::vector<SpacePoint> ks;
  const std::size_t stride = std::max<std::size_t>(1, grid.k_samples.size() / 1500 + 1);
  for (std::size_t i = 0; i < grid.k_samples.size(); i += stride) ks.push_back(grid.k_samples[i]);
  const double touch = 3 * grid.k_spacing * static_cast<double>(stride);
  for (int g = 1; g < table.size(); ++g) {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& a : ks) {
      const SpacePoint ga = table.element(g).apply(a);
      for (const auto& b : ks) gap = std::min(gap, space.distance(ga, b));
      if (gap <= touch) break;
    }
    if (gap <= touch) continue;  // hK meets K
    rep.cond1_min_gap = std::min(rep.cond1_min_gap, gap);
    if (!(gap > 2 * grid.delta)) rep.cond1 = false;
  }

  rep.cond2_distance = grid.k_out.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& k : grid.k_out) rep.cond2_distance = std::min(rep.cond2_distance, grid.nbhd.body.distance(k) - grid.nbhd.eps);
  rep.cond2 = rep.cond2_distance > grid.delta_prime;

  rep.cond3_gate = alpha / 2 - kPi / 4;
  if (grid.sigma_k.empty() || grid.k_out.empty()) return rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SpacePoint> outs;
  const std::size_t ostride = std::max<std::size_t>(1, grid.k_out.size() / static_cast<std::size_t>(density));
  for (std::size_t i = 0; i < grid.k_out.size(); i += ostride) {
    outs.push_back(grid.k_out[i]);
    for (int k = 0; k < 2; ++k)
      outs.push_back(offset(space, grid.k_out[i], grid.delta_prime * std::sqrt(unit(rng)), 2 * kPi * unit(rng)));
  }
  std::vector<std::pair<std::size_t, std::size_t>> close;
  for (std::size_t a = 0; a < outs.size(); ++a)
    for (std::size_t b = 0; b < outs.size(); ++b)
      if (space.distance(outs[a], outs[b]) <= grid.delta_prime) close.push_back({a, b});

  const auto& sig = grid.sigma_k;
  std::vector<std::vector<double>> angle(sig.size());
  auto angles_at = [&](std::size_t i) -> const std::vector<double>& {
    if (angle[i].empty())
      for (const auto& o : outs) angle[i].push_back(angle_to_C(grid.nbhd.body, sig[i], o));
    return angle[i];
  };
  const std::size_t sstride = std::max<std::size_t>(1, sig.size() / static_cast<std::size_t>(density));
  for (std::size_t i = 0; i < sig.size(); i += sstride) {
    for (std::size_t j = 0; j < sig.size(); ++j) {
      if (space.distance(sig[i], sig[j]) > grid.delta) continue;
      const auto& A = angles_at(i);
      const auto& B = angles_at(j);
      for (const auto& [a, b] : close) {
        rep.cond3_max_deviation = std::max(rep.cond3_max_deviation, std::abs(A[a] - B[b]));
        ++rep.cond3_pairs;
      }
    }
  }
  rep.cond3 = rep.cond3_max_deviation <= rep.cond3_gate;
  return rep;
}

// ---------------------------------------------------------------------------

PushOff::PushOff(const PushOffGrid& grid, double lambda, int n, const SubdivisionOptions& opts)
    : grid_(grid), lambda_(lambda), n_(n) {
  if (n < 0) throw Error(ErrorCode::invalid_input, "order must be nonnegative");
  tower_ = std::make_unique<EquivariantTower>(grid_.nbhd.body.space(), grid_.adj.group, grid_.nerve, grid_.labels);
  for (int k = 0; k < n; ++k) tower_->subdivide(lambda, opts);
}

SpacePoint PushOff::evaluate(const SpacePoint& q) const {
  const GroupTable& table = grid_.adj.group;
  const int h = locate_group_element(grid_.adj, q);
  if (h < 0) throw Error(ErrorCode::uncovered_point, "no enumerated translate of the cover contains the point");
  const SpacePoint q0 = h == 0 ? q : table.element(table.inverse(h)).apply(q);
  NervePoint p = project_to_nerve(grid_.adj, q0);
  for (int k = 0; k < n_; ++k) p = tower_->refine(k, p);
  const SpacePoint z = tower_->cone(n_, p);
  return h == 0 ? z : table.element(h).apply(z);
}

SpacePoint PushOff::retract(const SpacePoint& q) const {
  const ConvexBody& body = grid_.nbhd.body;
  const ModelSpace& space = body.space();
  const double eps = grid_.nbhd.eps;
  const double dq = body.distance(q);
  if (dq > eps + 1e-7 * std::max(1.0, eps)) throw Error(ErrorCode::precondition, "retract needs a point of C_eps");
  const SpacePoint y = evaluate(q);
  const double L = space.distance(q, y);
  auto gamma = [&](double t) { return t == 0.0 ? q : space.geodesic_point(q, y, t); };
  auto f = [&](double t) { return body.distance(gamma(t)) - eps; };
  if (!(f(L) > 0)) throw Error(ErrorCode::pipeline_inconsistency, "the push-off image lies in C_eps");

  // d(gamma(t), C) is convex: locate its minimum, then the crossing beyond it is unique.
  double t_min = 0.0;
  const bool outward = dq > space.tol() * std::max(1.0, std::abs(q.coords[0])) && angle_to_C(body, q, y) > kPi / 2;
  if (!outward) {
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double a = 0.0, b = L;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 200 && b - a > 1e-15 * std::max(1.0, L); ++i) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = f(d);
      }
    }
    t_min = f(0.0) <= std::min(fc, fd) ? 0.0 : (a + b) / 2;
  }
  double lo = t_min, hi = L;
  if (f(lo) >= 0) return lo == 0.0 ? q : gamma(lo);  // q itself lies on Sigma_eps
  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, L); ++i) {
    const double mid = (lo + hi) / 2;
    (f(mid) > 0 ? hi : lo) = mid;
  }
  return gamma((lo + hi) / 2);
}

double PushOff::level_push_off_distance() const {
  double d = std::numeric_limits<double>::infinity();
  for (int o = 0; o < tower_->orbit_count(n_); ++o)
    d = std::min(d, grid_.nbhd.body.distance(tower_->orbit_label(n_, o)) - grid_.nbhd.eps);
  return d;
}

double PushOff::level_diameter() const {
  if (n_ == 0) return grid_.iota_diameter(false);
  double d = 0.0;
  for (const auto& row : tower_->record().rows)
    if (row.stage == n_ && row.simplex.size() == 2) d = std::max(d, row.diam_after);
  return d;
}

// ---------------------------------------------------------------------------

namespace {

SpacePoint random_region_point(const EpsNeighborhood& nbhd, double period, double min_dist, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ConvexBody& body = nbhd.body;
  const ModelSpace& space = body.space();
  const double eps = nbhd.eps;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    SpacePoint x;
    switch (body.kind()) {
      case BodyKind::point: {
        const double r = std::sqrt(min_dist * min_dist + unit(rng) * (eps * eps - min_dist * min_dist));
        const double theta = 2 * kPi * unit(rng);
        x = offset(space, body.points()[0], r, theta);
        break;
      }
      case BodyKind::line: {
        const double s = period * unit(rng);
        const double z = -eps + 2 * eps * unit(rng);
        x = body.fermi(s, z);
        break;
      }
      case BodyKind::segment: {
        const double L = body.frame().length;
        const double s = -eps + (L + 2 * eps) * unit(rng);
        const double z = -eps + 2 * eps * unit(rng);
        x = body.fermi(s, z);
        break;
      }
      case BodyKind::hull: throw Error(ErrorCode::unsupported_kind, "hull scenes are not sampled");
    }
    const double d = body.distance(x);
    if (d <= eps && d >= min_dist) return x;
  }
  throw Error(ErrorCode::invalid_input, "interior sampling found no admissible point");
}

void gate(RetractionReport& rep, const std::string& name, bool ok, double value, double threshold,
          const std::string& detail = "") {
  rep.gates.push_back({name, ok, value, threshold, detail});
  if (!ok && rep.failure.empty()) rep.failure = name;
}

bool all_passed(const RetractionReport& rep) {
  for (const auto& g : rep.gates)
    if (!g.passed) return false;
  return true;
}

}  // namespace

RetractionReport run_pipeline(const Scene& scene) {
  const auto start = std::chrono::steady_clock::now();
  RetractionReport rep;
  auto finish = [&]() {
    rep.passed = rep.failure.empty() && all_passed(rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  };

  PushOffGrid grid;
  try {
    grid = build_boundary_grid(scene);
  } catch (const Error& e) {
    gate(rep, e.code() == ErrorCode::calibration ? "calibration" : "grid", false, 0, 0, e.what());
    return finish();
  }
  rep.calibration = grid.calibration;
  rep.base_elements = static_cast<int>(grid.labels.size());
  rep.boundary_elements = static_cast<int>(std::count(grid.boundary.begin(), grid.boundary.end(), true));
  rep.group_elements = grid.adj.group.size();
  rep.nerve_simplices = static_cast<int>(grid.nerve.size());
  rep.push_off_distance = grid.push_off_distance();
  gate(rep, "cover", grid.uncovered == 0, grid.uncovered, 0, "region samples outside H U");
  gate(rep, "H-fine", grid.h_fine, grid.h_fine ? 1 : 0, 1);
  gate(rep, "calibration", grid.calibration.max_image_distance <= scene.delta_prime,
       grid.calibration.max_image_distance, scene.delta_prime);
  gate(rep, "push-off distance", rep.push_off_distance > 0, rep.push_off_distance, 0);
  double min_witness = kPi;
  for (double a : grid.witness_angles) min_witness = std::min(min_witness, a);
  gate(rep, "push-off grid angle", min_witness >= kPi - 1e-9, min_witness, kPi);

  rep.smallness = check_small_relative(grid, kPi, scene.seed);
  gate(rep, "smallness condition (1)", rep.smallness.cond1, rep.smallness.cond1_min_gap, 2 * grid.delta);
  gate(rep, "smallness condition (2)", rep.smallness.cond2, rep.smallness.cond2_distance, scene.delta_prime,
       "N_delta'(K_out) must miss C_eps");
  rep.diagnostics.push_back({"smallness condition (3)", rep.smallness.cond3, rep.smallness.cond3_max_deviation,
                             rep.smallness.cond3_gate});
  if (!rep.failure.empty()) return finish();

  rep.diam_iota = grid.iota_diameter(false);
  try {
    rep.diam_K_Kout = diam_K_Kout(scene.space, grid.adj.group, grid.k_samples, grid.k_out, 2 * grid.delta);
  } catch (const Error& e) {
    gate(rep, "diam(iota) <= diam_K(K_out)", false, rep.diam_iota, 0, e.what());
    return finish();
  }
  gate(rep, "diam(iota) <= diam_K(K_out)", rep.diam_iota <= rep.diam_K_Kout + 1e-9, rep.diam_iota, rep.diam_K_Kout);
  const double boundary_diam = grid.iota_diameter(true);
  rep.diagnostics.push_back({"tight on the boundary at (delta, (1-lambda) delta')",
                             boundary_diam <= (1 - scene.lambda) * scene.delta_prime, boundary_diam,
                             (1 - scene.lambda) * scene.delta_prime});

  std::unique_ptr<PushOff> j;
  try {
    j = std::make_unique<PushOff>(grid, scene.lambda, scene.order, SubdivisionOptions{scene.rule, {}});
  } catch (const Error& e) {
    gate(rep, "subdivision", false, 0, 0, e.what());
    return finish();
  }
  for (int k = 0; k <= scene.order; ++k) rep.level_orbits.push_back(j->tower().orbit_count(k));
  rep.barycenters_solved = j->tower().record().barycenters_solved;
  rep.shrink = verify_shrinking(j->tower().record(), rep.diam_iota);
  gate(rep, "shrinking subdivision", rep.shrink.ok, rep.shrink.max_final_diam, rep.shrink.final_bound);
  rep.level_push_off_distance = j->level_push_off_distance();
  rep.diagnostics.push_back({"subdivision push-off distance > 0", rep.level_push_off_distance > 0,
                             rep.level_push_off_distance, 0});
  const double level_diam = j->level_diameter();
  rep.diagnostics.push_back({"subdivision (delta, delta')-tight", level_diam <= scene.delta_prime, level_diam,
                             scene.delta_prime});
  rep.diagnostics.push_back({"subdivision push-off distance > delta'", rep.level_push_off_distance > scene.delta_prime,
                             rep.level_push_off_distance, scene.delta_prime});
  if (scene.strict_preconditions)
    for (const auto& d : rep.diagnostics)
      if (!d.holds) gate(rep, "precondition: " + d.name, false, d.value, d.threshold);
  if (!rep.failure.empty()) return finish();

  // Retraction on samples.
  rep.retraction_attempted = true;
  const auto& nbhd = grid.nbhd;
  std::vector<SampleRecord> samples;
  for (const auto& q : nbhd.sample_sigma(scene.density, grid.period)) samples.push_back({"boundary", q, {}, scene.eps});
  std::mt19937_64 rng(scene.seed);
  for (int i = 0; i < scene.interior_samples; ++i) {
    SpacePoint q = random_region_point(nbhd, grid.period, scene.interior_min_distance, rng);
    const double d = scene.body.distance(q);
    samples.push_back({"interior", std::move(q), {}, d});
  }
  std::vector<std::string> errors(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    SampleRecord& s = samples[i];
    try {
      s.r = j->retract(s.q);
      s.idempotence = scene.space.distance(j->retract(s.r), s.r);
      if (s.kind == "boundary") {
        s.residual = scene.space.distance(s.r, s.q);
        const SpacePoint y = j->evaluate(s.q);
        s.angle = angle_to_C(scene.body, s.q, y);
        s.escape = check_large_angle_escape(scene.body, scene.eps, s.q, y);
      } else {
        s.residual = std::abs(scene.body.distance(s.r) - scene.eps);
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      gate(rep, "retraction", false, static_cast<double>(i), 0, errors[i]);
      rep.samples = std::move(samples);
      return finish();
    }

  rep.min_boundary_angle = kPi;
  for (const auto& s : samples) {
    rep.max_idempotence = std::max(rep.max_idempotence, s.idempotence);
    if (s.kind == "boundary") {
      rep.max_identity_residual = std::max(rep.max_identity_residual, s.residual);
      rep.min_boundary_angle = std::min(rep.min_boundary_angle, s.angle);
      rep.escape = rep.escape && s.escape;
    } else {
      rep.max_level_residual = std::max(rep.max_level_residual, s.residual);
    }
  }
  gate(rep, "identity on Sigma_eps", rep.max_identity_residual <= 1e-8, rep.max_identity_residual, 1e-8);
  gate(rep, "boundary angle", rep.min_boundary_angle >= 3 * kPi / 4 - 1e-6, rep.min_boundary_angle, 3 * kPi / 4);
  gate(rep, "escape", rep.escape, rep.escape ? 1 : 0, 1);
  gate(rep, "image on Sigma_eps", rep.max_level_residual <= 1e-8, rep.max_level_residual, 1e-8);
  gate(rep, "idempotence", rep.max_idempotence <= 1e-8, rep.max_idempotence, 1e-8);

  // Continuity moduli: same base points and directions at every scale.
  std::vector<SpacePoint> bases;
  std::vector<double> dirs;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& s : samples)
    if (s.kind == "interior" && s.dist <= scene.eps - 2e-2 && static_cast<int>(bases.size()) < scene.continuity_pairs) {
      bases.push_back(s.q);
      dirs.push_back(2 * kPi * unit(rng));
    }
  std::vector<SpacePoint> base_images(bases.size());
  parallel_for(bases.size(), [&](std::size_t i) { base_images[i] = j->retract(bases[i]); });
  bool monotone = true;
  for (double h : rep.continuity_scales) {
    std::vector<double> moved(bases.size());
    parallel_for(bases.size(), [&](std::size_t i) {
      moved[i] = scene.space.distance(base_images[i], j->retract(offset(scene.space, bases[i], h, dirs[i])));
    });
    const double m = moved.empty() ? 0.0 : *std::max_element(moved.begin(), moved.end());
    if (!rep.continuity_moduli.empty() && m > rep.continuity_moduli.back() + 1e-12) monotone = false;
    rep.continuity_moduli.push_back(m);
  }
  gate(rep, "continuity", monotone, rep.continuity_moduli.empty() ? 0 : rep.continuity_moduli.back(), 0,
       "moduli must not increase as the scale shrinks");
  rep.samples = std::move(samples);
  return finish();
}

}  // namespace barylab
