#include "barylab/subdivision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace barylab {

const char* to_string(BarycenterRule r) {
  switch (r) {
    case BarycenterRule::automatic: return "automatic";
    case BarycenterRule::midpoint: return "midpoint";
    case BarycenterRule::minimax: return "minimax";
    case BarycenterRule::solve: return "solve";
  }
  return "unknown";
}

BarycenterRule barycenter_rule_from_string(const std::string& name) {
  for (auto r : {BarycenterRule::automatic, BarycenterRule::midpoint, BarycenterRule::minimax, BarycenterRule::solve})
    if (name == to_string(r)) return r;
  throw Error(ErrorCode::invalid_input, "unknown barycenter rule '" + name + "'");
}

BarycenterCertificate choose_barycenter(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                        const std::vector<SpacePoint>& Q, double lambda, BarycenterRule rule,
                                        const SolveOptions& solve) {
  if (P.empty()) throw Error(ErrorCode::invalid_input, "P must be nonempty");
  // Label sets that coincide up to rounding have no meaningful lambda ratio.
  const double scale = std::max(1.0, std::abs(P.front().coords[0]));
  if (diameter(space, P) <= 10 * space.tol() * scale) {
    BarycenterCertificate c;
    c.status = BarycenterStatus::found;
    c.method = "trivial";
    c.requested_lambda = lambda;
    c.point = P.front();
    c.relative_slacks = relative_slacks(space, c.point, P, Q);
    return c;
  }
  if (rule == BarycenterRule::automatic) {
    std::vector<SpacePoint> all = P;
    all.insert(all.end(), Q.begin(), Q.end());
    if (space.is_cat0() && lambda >= std::sqrt(3.0) / 2.0 - 1e-12)
      rule = BarycenterRule::midpoint;
    else if (space.kind() == SpaceKind::circle && lambda >= 0.5 &&
             diameter(space, all) < std::sqrt(3.0) * space.radius())
      return circle_arc_rule(space, P, Q);
    else
      rule = BarycenterRule::solve;
  }
  switch (rule) {
    case BarycenterRule::midpoint: return cat0_midpoint_rule(space, P, Q);
    case BarycenterRule::minimax: return minimax_center(space, P, Q);
    default: return solve_barycenter(BarycenterProblem{space, P, Q, std::nullopt}, lambda, solve);
  }
}

NoBarycenter::NoBarycenter(int stage, const Simplex& j, BarycenterCertificate cert)
    : Error(ErrorCode::no_barycenter, "stage " + std::to_string(stage) + ": no lambda-barycenter for simplex " +
                                          simplex_to_string(j) + " (status " + to_string(cert.status) +
                                          ", achieved lambda " + std::to_string(cert.achieved_lambda) + ")"),
      stage_(stage),
      cert_(std::move(cert)) {}

namespace {

bool certificate_ok(const ModelSpace& space, const BarycenterCertificate& c, double lambda, double scale) {
  const double tol = space.tol();
  return c.status == BarycenterStatus::found && c.achieved_lambda <= lambda + 10 * tol &&
         c.min_slack() >= -10 * tol * std::max(1.0, scale);
}

void note_certificate(ShrinkRecord& rec, const BarycenterCertificate& c) {
  ++rec.barycenters_solved;
  rec.max_certificate_lambda = std::max(rec.max_certificate_lambda, c.achieved_lambda);
  if (!c.relative_slacks.empty()) rec.min_certificate_slack = std::min(rec.min_certificate_slack, c.min_slack());
}

// Nonempty faces of s, proper or not.
std::vector<Simplex> faces_of(const Simplex& s, bool include_self) {
  std::vector<Simplex> out;
  const std::size_t n = s.size();
  const unsigned long full = (1ul << n) - 1;
  for (unsigned long mask = 1; mask <= full; ++mask) {
    if (mask == full && !include_self) break;
    Simplex f;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ul << i)) f.push_back(s[i]);
    out.push_back(std::move(f));
  }
  return out;
}

bool is_subset(const Simplex& a, const Simplex& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

std::vector<SpacePoint> images(const VertexMap& iota, const Simplex& s) { return iota.images(s); }

struct Stage {
  Subdivision sd;
  VertexMap iota;
};

Stage subdivide_once(const SimplicialComplex& s, const VertexMap& iota, double lambda, int stage,
                     const SubdivisionOptions& opts, ShrinkRecord& rec) {
  Stage out;
  out.sd = barycentric_subdivision(s);
  out.iota.target = iota.target;
  const ModelSpace& space = iota.target;
  std::map<Simplex, int> id_of;
  for (const auto& [v, j] : out.sd.provenance.sources) id_of[j] = v;

  for (const auto& j : s.simplices()) {  // SimplexLess: increasing |J|, then lexicographic
    const int v = id_of.at(j);
    if (j.size() == 1) {
      out.iota.assignment[v] = iota.at(j[0]);
      continue;
    }
    std::vector<SpacePoint> P;
    for (const auto& f : faces_of(j, false)) P.push_back(out.iota.at(id_of.at(f)));
    std::set<int> q_ids;
    for (const auto& t : s.cofaces(j))
      for (const auto& f : faces_of(t, true))
        if (f.size() < j.size() && !is_subset(f, j)) q_ids.insert(id_of.at(f));
    std::vector<SpacePoint> Q;
    for (int q : q_ids) Q.push_back(out.iota.at(q));
    BarycenterCertificate c = choose_barycenter(space, P, Q, lambda, opts.rule, opts.solve);
    if (!certificate_ok(space, c, lambda, diameter(space, P))) throw NoBarycenter(stage, j, c);
    note_certificate(rec, c);
    out.iota.assignment[v] = c.point;
  }

  for (const auto& t : out.sd.complex.simplices()) {
    if (t.size() < 2) continue;
    ShrinkRow row;
    row.stage = stage;
    row.simplex = t;
    row.parent = least_containing_simplex(s, out.sd.provenance, t);
    row.diam_before = diameter(space, images(iota, row.parent));
    row.diam_after = diameter(space, images(out.iota, t));
    row.bound = lambda * row.diam_before;
    row.slack = row.bound - row.diam_after;
    rec.rows.push_back(std::move(row));
  }
  return out;
}

void containment_rows(const SimplicialComplex& original, const VertexMap& iota0, const SubdivisionProvenance& prov,
                      const VertexMap& iota, int stage, ShrinkRecord& rec) {
  std::map<Simplex, std::vector<int>> by_source;
  for (const auto& [v, j] : prov.sources) by_source[j].push_back(v);
  for (const auto& sigma : original.simplices()) {
    if (sigma.size() < 2) continue;
    std::vector<SpacePoint> inside;
    for (const auto& f : faces_of(sigma, true)) {
      auto it = by_source.find(f);
      if (it == by_source.end()) continue;
      for (int v : it->second) inside.push_back(iota.at(v));
    }
    rec.containment.push_back({stage, sigma, diameter(iota0.target, images(iota0, sigma)), diameter(iota.target, inside)});
  }
}

}  // namespace

ShrinkResult iterate_subdivision(const SimplicialComplex& s, const VertexMap& iota, double lambda, int n,
                                 const SubdivisionOptions& opts) {
  if (n < 0) throw Error(ErrorCode::invalid_input, "order must be nonnegative");
  if (!(lambda > 0 && lambda < 1)) throw Error(ErrorCode::precondition, "lambda must lie in (0, 1)");
  ShrinkResult res;
  res.complex = s;
  res.iota = iota;
  for (int v : s.vertices()) res.provenance.sources[v] = Simplex{v};
  res.record.lambda = lambda;
  res.record.order = n;
  res.record.original_diam = map_diameter(s, iota);

  if (n == 0) {
    for (const auto& t : s.simplices()) {
      if (t.size() < 2) continue;
      const double d = diameter(iota.target, images(iota, t));
      res.record.rows.push_back({0, t, t, d, d, d, 0.0});
    }
  }
  for (int stage = 1; stage <= n; ++stage) {
    Stage st = subdivide_once(res.complex, res.iota, lambda, stage, opts, res.record);
    res.provenance = compose(st.sd.provenance, res.provenance);
    res.complex = std::move(st.sd.complex);
    res.iota = std::move(st.iota);
    containment_rows(s, iota, res.provenance, res.iota, stage, res.record);
  }

  const ModelSpace& space = iota.target;
  for (const auto& [v, j] : res.provenance.sources) {
    DisplacementRow row;
    row.vertex = v;
    row.original = j;
    row.nearest_original = std::numeric_limits<double>::infinity();
    for (int u : j) {
      const double d = space.distance(res.iota.at(v), iota.at(u));
      row.displacement = std::max(row.displacement, d);
      row.nearest_original = std::min(row.nearest_original, d);
    }
    row.bound = diameter(space, images(iota, j)) / (1.0 - lambda);
    res.record.displacement.push_back(row);
  }
  return res;
}

ShrinkResult shrinking_subdivide(const SimplicialComplex& s, const VertexMap& iota, double lambda,
                                 const SubdivisionOptions& opts) {
  return iterate_subdivision(s, iota, lambda, 1, opts);
}

ShrinkReport verify_shrinking(const ShrinkRecord& record, double iota_original_diam, double tol) {
  ShrinkReport rep;
  const double lambda = record.lambda;
  rep.final_bound = std::pow(lambda, record.order) * iota_original_diam;
  rep.image_bound = iota_original_diam / (1.0 - lambda);
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    if (rep.violations.size() < 50) rep.violations.push_back(msg);
  };
  for (const auto& row : record.rows) {
    if (row.stage == record.order) {
      rep.max_final_diam = std::max(rep.max_final_diam, row.diam_after);
      if (row.diam_after > rep.final_bound + tol)
        fail("(a) stage " + std::to_string(row.stage) + " simplex " + simplex_to_string(row.simplex) + " diam " +
             std::to_string(row.diam_after) + " exceeds " + std::to_string(rep.final_bound));
    }
    if (row.slack < -tol)
      fail("condition (1) stage " + std::to_string(row.stage) + " simplex " + simplex_to_string(row.simplex));
  }
  for (const auto& row : record.displacement) {
    rep.max_displacement_excess = std::max(rep.max_displacement_excess, row.displacement - row.bound);
    rep.max_nearest_original = std::max(rep.max_nearest_original, row.nearest_original);
    if (row.displacement > row.bound + tol) fail("(b) vertex " + std::to_string(row.vertex) + " displaced too far");
    if (row.nearest_original > rep.image_bound + tol)
      fail("(c) vertex " + std::to_string(row.vertex) + " leaves the image neighbourhood");
  }
  for (const auto& row : record.containment) {
    rep.max_containment_excess = std::max(rep.max_containment_excess, row.diam_contained - row.diam_original);
    if (row.diam_contained > row.diam_original + tol)
      fail("condition (2) stage " + std::to_string(row.stage) + " simplex " + simplex_to_string(row.original));
  }
  return rep;
}

// ---------------------------------------------------------------------------

EquivariantTower::EquivariantTower(const ModelSpace& space, const GroupTable& group, const SimplicialComplex& nerve,
                                   std::vector<SpacePoint> base_labels)
    : space_(space), group_(group), nerve_(nerve) {
  Level base;
  base.labels = std::move(base_labels);
  orbits_.push_back(std::move(base));
  for (int v : nerve_.vertices())
    if (orbit_of(v) >= static_cast<int>(orbits_[0].labels.size()))
      throw Error(ErrorCode::invalid_input, "nerve vertex without a base label");
  double d = 0.0;
  for (const auto& t : nerve_.simplices_of_dim(1)) d = std::max(d, space_.distance(label(0, t[0]), label(0, t[1])));
  record_.original_diam = d;
}

int EquivariantTower::orbit_count(int level) const {
  const Level& l = orbits_.at(static_cast<std::size_t>(level));
  return static_cast<int>(level == 0 ? l.labels.size() : l.reps.size());
}

const Simplex& EquivariantTower::rep(int level, int orbit) const {
  return orbits_.at(static_cast<std::size_t>(level)).reps.at(static_cast<std::size_t>(orbit));
}

int EquivariantTower::translate(int h, int id) const {
  const int g = group_.compose(h, element_of(id));
  return g < 0 ? -1 : encode(orbit_of(id), g);
}

const SpacePoint& EquivariantTower::orbit_label(int level, int orbit) const {
  return orbits_.at(static_cast<std::size_t>(level)).labels.at(static_cast<std::size_t>(orbit));
}

SpacePoint EquivariantTower::label(int level, int id) const {
  const SpacePoint& base = orbit_label(level, orbit_of(id));
  const int g = element_of(id);
  return g == 0 ? base : group_.element(g).apply(base);
}

Simplex EquivariantTower::translate_simplex(int h, const Simplex& s) const {
  Simplex out;
  out.reserve(s.size());
  for (int id : s) {
    const int t = translate(h, id);
    if (t < 0) return {};
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<Simplex, int> EquivariantTower::canonical(const Simplex& s) const {
  std::pair<Simplex, int> best{{}, -1};
  for (int id : s) {
    const int g = element_of(id);
    const int inv = group_.inverse(g);
    if (inv < 0) continue;
    Simplex cand = translate_simplex(inv, s);
    if (cand.empty()) continue;
    if (best.second < 0 || cand < best.first) best = {std::move(cand), g};
  }
  return best;
}

int EquivariantTower::vertex_for(int level, const Simplex& s) const {
  auto [c, g] = canonical(s);
  if (g < 0) return -1;
  const Level& l = orbits_.at(static_cast<std::size_t>(level));
  auto it = l.orbit_index.find(c);
  return it == l.orbit_index.end() ? -1 : encode(it->second, g);
}

Simplex EquivariantTower::decode(int level, int id) const {
  Simplex s = translate_simplex(element_of(id), rep(level, orbit_of(id)));
  if (s.empty()) throw Error(ErrorCode::enumeration_bound, "decoded simplex leaves the enumerated group elements");
  return s;
}

namespace {

// All chains (including the empty one) of simplices from `pool`, as lists ordered by size.
void chains_of(const std::vector<Simplex>& pool, std::vector<std::vector<Simplex>>& out) {
  std::vector<Simplex> sorted = pool;
  std::sort(sorted.begin(), sorted.end(), SimplexLess());
  std::vector<Simplex> current;
  std::function<void(std::size_t)> grow = [&](std::size_t from) {
    out.push_back(current);
    for (std::size_t i = from; i < sorted.size(); ++i) {
      if (!current.empty() && (sorted[i].size() <= current.back().size() || !is_subset(current.back(), sorted[i])))
        continue;
      current.push_back(sorted[i]);
      grow(i + 1);
      current.pop_back();
    }
  };
  grow(0);
}

}  // namespace

const std::vector<Simplex>& EquivariantTower::star(int level, int orbit) const {
  const Level& l = orbits_.at(static_cast<std::size_t>(level));
  auto it = l.star_cache.find(orbit);
  if (it != l.star_cache.end()) return it->second;
  std::vector<Simplex> result;
  if (level == 0) {
    result = nerve_.cofaces(Simplex{encode(orbit, 0)});
  } else {
    const Simplex& j = rep(level, orbit);
    std::vector<Simplex> below = faces_of(j, false);
    std::vector<Simplex> above;
    for (auto& t : cofaces(level - 1, j))
      if (t.size() > j.size()) above.push_back(t);
    std::vector<std::vector<Simplex>> low, high;
    chains_of(below, low);
    chains_of(above, high);
    for (const auto& a : low) {
      for (const auto& b : high) {
        Simplex ids;
        for (const auto& k : a) ids.push_back(vertex_for(level, k));
        ids.push_back(encode(orbit, 0));
        for (const auto& k : b) ids.push_back(vertex_for(level, k));
        if (std::find(ids.begin(), ids.end(), -1) != ids.end())
          throw Error(ErrorCode::pipeline_inconsistency, "a simplex in the star has no orbit representative");
        std::sort(ids.begin(), ids.end());
        result.push_back(std::move(ids));
      }
    }
    std::sort(result.begin(), result.end(), SimplexLess());
  }
  return l.star_cache.emplace(orbit, std::move(result)).first->second;
}

std::vector<Simplex> EquivariantTower::cofaces(int level, const Simplex& s) const {
  std::vector<Simplex> out;
  if (s.empty()) return out;
  const int g = element_of(s[0]);
  for (const auto& t : star(level, orbit_of(s[0]))) {
    Simplex moved = g == 0 ? t : translate_simplex(g, t);
    if (moved.empty()) throw Error(ErrorCode::enumeration_bound, "coface leaves the enumerated group elements");
    if (is_subset(s, moved)) out.push_back(std::move(moved));
  }
  return out;
}

std::vector<Simplex> EquivariantTower::simplex_orbits(int level) const {
  std::set<Simplex, SimplexLess> canon;
  for (int o = 0; o < orbit_count(level); ++o) {
    for (const auto& t : star(level, o)) {
      auto [c, g] = canonical(t);
      if (g >= 0) canon.insert(std::move(c));
    }
  }
  return {canon.begin(), canon.end()};
}

void EquivariantTower::subdivide(double lambda, const SubdivisionOptions& opts) {
  const int prev = levels();
  const int k = prev + 1;
  if (record_.order == 0) record_.lambda = lambda;
  record_.order = k;

  Level next;
  next.reps = simplex_orbits(prev);
  for (std::size_t i = 0; i < next.reps.size(); ++i) next.orbit_index[next.reps[i]] = static_cast<int>(i);
  next.labels.resize(next.reps.size());
  orbits_.push_back(std::move(next));
  Level& cur = orbits_.back();

  for (std::size_t i = 0; i < cur.reps.size(); ++i) {
    const Simplex j = cur.reps[i];
    if (j.size() == 1) {
      cur.labels[i] = label(prev, j[0]);
      continue;
    }
    std::vector<SpacePoint> P;
    for (const auto& f : faces_of(j, false)) P.push_back(label(k, vertex_for(k, f)));
    std::set<int> q_ids;
    for (const auto& t : cofaces(prev, j))
      for (const auto& f : faces_of(t, true))
        if (f.size() < j.size() && !is_subset(f, j)) q_ids.insert(vertex_for(k, f));
    if (q_ids.count(-1)) throw Error(ErrorCode::pipeline_inconsistency, "room vertex without orbit representative");
    std::vector<SpacePoint> Q;
    for (int q : q_ids) Q.push_back(label(k, q));
    BarycenterCertificate c = choose_barycenter(space_, P, Q, lambda, opts.rule, opts.solve);
    if (!certificate_ok(space_, c, lambda, diameter(space_, P))) throw NoBarycenter(k, j, c);
    note_certificate(record_, c);
    cur.labels[i] = c.point;
  }

  // Condition (1) on every simplex orbit of the new level.
  for (const auto& t : simplex_orbits(k)) {
    if (t.size() < 2) continue;
    ShrinkRow row;
    row.stage = k;
    row.simplex = t;
    std::vector<Simplex> members;
    for (int id : t) members.push_back(decode(k, id));
    row.parent = *std::max_element(members.begin(), members.end(), SimplexLess());
    std::vector<SpacePoint> before, after;
    for (int id : row.parent) before.push_back(label(prev, id));
    for (int id : t) after.push_back(label(k, id));
    row.diam_before = diameter(space_, before);
    row.diam_after = diameter(space_, after);
    row.bound = lambda * row.diam_before;
    row.slack = row.bound - row.diam_after;
    record_.rows.push_back(std::move(row));
  }

  // Condition (2): level-k vertices inside each original simplex orbit.
  for (const auto& sigma : simplex_orbits(0)) {
    if (sigma.size() < 2) continue;
    std::vector<Simplex> inside = faces_of(sigma, true);
    for (int lvl = 1; lvl < k; ++lvl) {
      std::vector<std::vector<Simplex>> chains;
      chains_of(inside, chains);
      std::vector<Simplex> lifted;
      for (const auto& ch : chains) {
        if (ch.empty()) continue;
        Simplex ids;
        for (const auto& m : ch) ids.push_back(vertex_for(lvl, m));
        std::sort(ids.begin(), ids.end());
        lifted.push_back(std::move(ids));
      }
      inside = std::move(lifted);
    }
    std::vector<SpacePoint> pts, corners;
    for (const auto& t : inside) pts.push_back(label(k, vertex_for(k, t)));
    for (int id : sigma) corners.push_back(label(0, id));
    record_.containment.push_back({k, sigma, diameter(space_, corners), diameter(space_, pts)});
  }

  // Displacement of every level-k vertex orbit from its original simplex.
  std::function<Simplex(int, int)> provenance = [&](int level, int id) -> Simplex {
    if (level == 0) return {id};
    std::set<int> merged;
    for (int m : decode(level, id)) {
      const Simplex p = provenance(level - 1, m);
      merged.insert(p.begin(), p.end());
    }
    return {merged.begin(), merged.end()};
  };
  record_.displacement.clear();
  for (int o = 0; o < orbit_count(k); ++o) {
    DisplacementRow row;
    row.vertex = encode(o, 0);
    row.original = provenance(k, row.vertex);
    row.nearest_original = std::numeric_limits<double>::infinity();
    std::vector<SpacePoint> corners;
    const SpacePoint z = label(k, row.vertex);
    for (int u : row.original) {
      corners.push_back(label(0, u));
      const double d = space_.distance(z, corners.back());
      row.displacement = std::max(row.displacement, d);
      row.nearest_original = std::min(row.nearest_original, d);
    }
    row.bound = diameter(space_, corners) / (1.0 - lambda);
    record_.displacement.push_back(row);
  }
}

NervePoint EquivariantTower::refine(int level, const NervePoint& p) const {
  const std::size_t n = p.simplex.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (p.weights[a] != p.weights[b]) return p.weights[a] > p.weights[b];
    return p.simplex[a] < p.simplex[b];
  });
  std::vector<std::pair<int, double>> out;
  Simplex prefix;
  for (std::size_t m = 0; m < n; ++m) {
    prefix.push_back(p.simplex[order[m]]);
    const double next = m + 1 < n ? p.weights[order[m + 1]] : 0.0;
    const double beta = static_cast<double>(m + 1) * (p.weights[order[m]] - next);
    if (!(beta > 0)) continue;
    Simplex sorted = prefix;
    std::sort(sorted.begin(), sorted.end());
    const int id = vertex_for(level + 1, sorted);
    if (id < 0) throw Error(ErrorCode::pipeline_inconsistency, "point lies in a simplex outside the subdivided window");
    out.push_back({id, beta});
  }
  std::sort(out.begin(), out.end());
  NervePoint r;
  double total = 0.0;
  for (const auto& [id, w] : out) total += w;
  for (const auto& [id, w] : out) {
    r.simplex.push_back(id);
    r.weights.push_back(w / total);
  }
  return r;
}

SpacePoint EquivariantTower::cone(int level, const NervePoint& p) const {
  if (p.simplex.empty()) throw Error(ErrorCode::invalid_input, "coning an empty simplex");
  SpacePoint z = label(level, p.simplex[0]);
  double total = p.weights[0];
  for (std::size_t i = 1; i < p.simplex.size(); ++i) {
    const double w = p.weights[i];
    if (!(w > 0)) continue;
    total += w;
    const SpacePoint zi = label(level, p.simplex[i]);
    const double d = space_.distance(z, zi);
    if (d > 0) z = space_.geodesic_point(z, zi, (w / total) * d);
  }
  return z;
}

}  // namespace barylab
