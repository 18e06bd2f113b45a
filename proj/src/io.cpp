#include "barylab/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace barylab::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::invalid_input, what); }

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) bad(std::string("missing field \"") + name + "\"");
  return j.at(name);
}

double number(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) bad(std::string("field \"") + name + "\" must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* name, double fallback) {
  return j.contains(name) ? number(j, name) : fallback;
}

int integer_or(const json& j, const char* name, int fallback) {
  if (!j.contains(name)) return fallback;
  const json& v = j.at(name);
  if (!v.is_number_integer()) bad(std::string("field \"") + name + "\" must be an integer");
  return v.get<int>();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("matrix must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) bad("matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) bad("matrix entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Simplex simplex_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("simplex must be a non-empty array of vertex ids");
  Simplex s;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad("vertex ids must be integers");
    s.push_back(v.get<int>());
  }
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) bad("simplex has a repeated vertex");
  return s;
}

}  // namespace

Vec vec_from_json(const json& j) {
  if (!j.is_array()) bad("expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad("expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ModelSpace space_from_json(const json& j) {
  if (!j.is_object()) bad("space must be an object");
  const json& k = field(j, "kind");
  if (!k.is_string()) bad("space kind must be a string");
  const double tol = number_or(j, "tol", ModelSpace::default_tol);
  SpaceKind kind;
  try {
    kind = space_kind_from_string(lower(k.get<std::string>()));
  } catch (const Error&) {
    bad("unknown space kind \"" + k.get<std::string>() + "\"");
  }
  switch (kind) {
    case SpaceKind::euclidean: return ModelSpace::euclidean(integer_or(j, "dim", 2), tol);
    case SpaceKind::circle: return ModelSpace::circle(number_or(j, "radius", 1.0), tol);
    case SpaceKind::sphere: return ModelSpace::sphere(integer_or(j, "dim", 2), number_or(j, "radius", 1.0), tol);
    case SpaceKind::hyperboloid: return ModelSpace::hyperboloid(integer_or(j, "dim", 2), tol);
    case SpaceKind::finite: return ModelSpace::finite(matrix_from_json(field(j, "matrix")), tol);
  }
  bad("unsupported space kind");
}

json to_json(const ModelSpace& space) {
  json j;
  j["kind"] = to_string(space.kind());
  j["dim"] = space.dim();
  j["radius"] = space.radius();
  j["matrix"] = space.kind() == SpaceKind::finite ? matrix_to_json(space.distance_matrix()) : json::array();
  j["tol"] = space.tol();
  return j;
}

SpacePoint point_from_json(const ModelSpace& space, const json& j) {
  SpacePoint p(vec_from_json(j));
  if (!space.is_valid(p)) {
    // Hyperboloid points may be given by their spatial part alone.
    if (space.kind() == SpaceKind::hyperboloid && p.size() == space.dim()) return space.lift(p.coords);
    bad("point " + j.dump() + " is not a point of the " + to_string(space.kind()) + " space");
  }
  return p;
}

std::vector<SpacePoint> points_from_json(const ModelSpace& space, const json& j) {
  if (!j.is_array()) bad("expected an array of points");
  std::vector<SpacePoint> out;
  for (const auto& p : j) out.push_back(point_from_json(space, p));
  return out;
}

json to_json(const SpacePoint& p) { return to_json(p.coords); }

Isometry isometry_from_json(const ModelSpace& space, const json& j) {
  try {
    if (j.is_array()) return Isometry(space, matrix_from_json(j));
    if (!j.is_object()) bad("isometry must be a matrix or an object");
    if (j.contains("boost")) {
      const json& b = j.at("boost");
      return Isometry::boost(space, integer_or(b, "axis", 0), number(b, "length"));
    }
    if (j.contains("rotation")) {
      const json& r = j.at("rotation");
      return Isometry::rotation(space, integer_or(r, "i", 0), integer_or(r, "j", 1), number(r, "angle"));
    }
    if (j.contains("matrix")) {
      Vec t = j.contains("translation") ? vec_from_json(j.at("translation")) : Vec();
      return Isometry(space, matrix_from_json(j.at("matrix")), t);
    }
    if (j.contains("translation")) return Isometry::translation(space, vec_from_json(j.at("translation")));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_input) throw;
    bad(std::string("invalid isometry: ") + e.what());
  }
  bad("isometry needs one of matrix, boost, rotation, translation");
}

json to_json(const Isometry& g) {
  json j;
  j["matrix"] = matrix_to_json(g.linear());
  j["translation"] = to_json(g.translation_part());
  return j;
}

GroupAction group_from_json(const ModelSpace& space, const json& j) {
  GroupAction g;
  if (j.is_null()) return g;
  const json& gens = field(j, "generators");
  if (!gens.is_array()) bad("generators must be an array");
  for (const auto& m : gens) g.generators.push_back(isometry_from_json(space, m));
  g.word_length = integer_or(j, "word_length", 1);
  if (g.word_length < 0) bad("word_length must be non-negative");
  return g;
}

json to_json(const GroupAction& group) {
  json gens = json::array();
  for (const auto& g : group.generators) gens.push_back(to_json(g));
  return {{"generators", gens}, {"word_length", group.word_length}};
}

SimplicialComplex complex_from_json(const json& j) {
  std::vector<Simplex> gens;
  if (j.contains("vertices")) {
    const json& vs = j.at("vertices");
    if (!vs.is_array()) bad("vertices must be an array");
    for (const auto& v : vs) gens.push_back(simplex_from_json(json::array({v})));
  }
  const json& ss = field(j, "simplices");
  if (!ss.is_array()) bad("simplices must be an array");
  for (const auto& s : ss) gens.push_back(simplex_from_json(s));
  return SimplicialComplex::closure(gens);
}

json to_json(const SimplicialComplex& s) {
  json simplices = json::array();
  for (const auto& sigma : s.simplices()) simplices.push_back(sigma);
  return {{"vertices", s.vertices()}, {"simplices", simplices}};
}

VertexMap vertex_map_from_json(const ModelSpace& space, const json& j) {
  if (!j.is_object()) bad("vertex map must be an object keyed by vertex id");
  VertexMap m{space, {}};
  for (const auto& [key, coords] : j.items()) {
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      bad("vertex map key \"" + key + "\" is not an integer");
    }
    m.assignment.emplace(id, point_from_json(space, coords));
  }
  return m;
}

json to_json(const VertexMap& iota) {
  json j = json::object();
  for (const auto& [v, p] : iota.assignment) j[std::to_string(v)] = to_json(p);
  return j;
}

BallCover cover_from_json(const ModelSpace& space, const json& j) {
  BallCover c{space, {}, {}};
  const json& balls = field(j, "balls");
  if (!balls.is_array()) bad("balls must be an array");
  int next = 0;
  for (const auto& b : balls) {
    Ball ball{point_from_json(space, field(b, "center")), number(b, "radius"), integer_or(b, "label", next)};
    if (!(ball.radius > 0)) bad("ball radius must be positive");
    next = ball.label + 1;
    c.elements.push_back(ball);
  }
  if (j.contains("window")) c.window = points_from_json(space, j.at("window"));
  return c;
}

json to_json(const BallCover& cover) {
  json balls = json::array();
  for (const auto& b : cover.elements)
    balls.push_back({{"center", to_json(b.center)}, {"radius", b.radius}, {"label", b.label}});
  json window = json::array();
  for (const auto& p : cover.window) window.push_back(to_json(p));
  return {{"balls", balls}, {"window", window}};
}

ProblemFile problem_from_json(const json& j) {
  ProblemFile f;
  f.problem.space = space_from_json(field(j, "space"));
  f.problem.P = points_from_json(f.problem.space, field(j, "P"));
  if (f.problem.P.empty()) bad("P must be non-empty");
  if (j.contains("Q")) f.problem.Q = points_from_json(f.problem.space, j.at("Q"));
  f.lambda = number(j, "lambda");
  if (j.contains("Delta") && !j.at("Delta").is_null()) f.Delta = number(j, "Delta");
  if (j.contains("region")) {
    const json& r = j.at("region");
    f.problem.region = SearchRegion{point_from_json(f.problem.space, field(r, "center")), number(r, "radius")};
  }
  if (j.contains("rule")) {
    try {
      f.rule = barycenter_rule_from_string(field(j, "rule").get<std::string>());
    } catch (const std::exception&) {
      bad("unknown barycenter rule");
    }
  }
  f.solve.resolution = number_or(j, "resolution", 0.0);
  f.solve.seed = static_cast<std::uint64_t>(integer_or(j, "seed", 1));
  return f;
}

json to_json(const BarycenterCertificate& cert) {
  json slacks = json::array();
  for (double s : cert.relative_slacks) slacks.push_back(s);
  json j;
  j["schema_version"] = schema_version;
  j["status"] = to_string(cert.status);
  j["method"] = cert.method;
  j["metric"] = cert.metric;
  j["requested_lambda"] = cert.requested_lambda;
  j["point"] = cert.status == BarycenterStatus::found ? to_json(cert.point) : json(nullptr);
  j["achieved_lambda"] = cert.achieved_lambda;
  j["chordal_lambda"] = cert.chordal_lambda;
  j["lambda_bound"] = cert.status == BarycenterStatus::not_found ? json(cert.lambda_bound) : json(nullptr);
  j["relative_slacks"] = slacks;
  j["min_slack"] = cert.relative_slacks.empty() ? json(nullptr) : json(cert.min_slack());
  j["grid_resolution"] = cert.grid_resolution;
  j["diam_P"] = cert.diam_P;
  return j;
}

ConvexBody body_from_json(const ModelSpace& space, const json& j) {
  const json& k = field(j, "kind");
  if (!k.is_string()) bad("body kind must be a string");
  try {
    const BodyKind kind = body_kind_from_string(lower(k.get<std::string>()));
    if (kind == BodyKind::line && j.contains("ideal")) {
      const json& ideal = j.at("ideal");
      if (!ideal.is_array() || ideal.size() != 2) bad("ideal line needs two endpoints");
      return ConvexBody::line(space, BoundaryPoint{vec_from_json(ideal[0])}, BoundaryPoint{vec_from_json(ideal[1])});
    }
    const auto pts = points_from_json(space, field(j, "points"));
    const std::size_t need = kind == BodyKind::point ? 1 : kind == BodyKind::hull ? 0 : 2;
    if ((need && pts.size() != need) || pts.empty()) bad(std::string(to_string(kind)) + " body has the wrong number of points");
    switch (kind) {
      case BodyKind::point: return ConvexBody::point(space, pts[0]);
      case BodyKind::segment: return ConvexBody::segment(space, pts[0], pts[1]);
      case BodyKind::line: return ConvexBody::line(space, pts[0], pts[1]);
      case BodyKind::hull: return ConvexBody::hull(space, pts);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_input) throw;
    bad(std::string("invalid body: ") + e.what());
  }
  bad("unsupported body");
}

json to_json(const ConvexBody& body) {
  json j;
  j["kind"] = to_string(body.kind());
  json pts = json::array();
  for (const auto& p : body.points()) pts.push_back(to_json(p));
  j["points"] = pts;
  if (body.kind() == BodyKind::line || body.kind() == BodyKind::segment) {
    const auto& f = body.frame();
    j["frame"] = {{"a", to_json(f.a)}, {"u", to_json(f.u)}, {"n", to_json(f.n)}};
  }
  return j;
}

Scene scene_from_json(const json& j) {
  if (!j.is_object()) bad("scene must be an object");
  Scene s;
  s.space = space_from_json(field(j, "space"));
  s.body = body_from_json(s.space, field(j, "body"));
  s.eps = number_or(j, "eps", s.eps);
  s.R = number_or(j, "R", s.R);
  s.side = integer_or(j, "side", s.side);
  if (j.contains("group")) s.group = group_from_json(s.space, j.at("group"));
  if (j.contains("cover")) {
    const json& c = j.at("cover");
    if (c.contains("kind")) s.cover.kind = field(c, "kind").get<std::string>();
    s.cover.spacing = number_or(c, "spacing", s.cover.spacing);
  }
  s.delta = number_or(j, "delta", s.delta);
  s.delta_prime = number_or(j, "delta_prime", s.delta_prime);
  s.lambda = number_or(j, "lambda", s.lambda);
  s.order = integer_or(j, "order", s.order);
  if (j.contains("barycenter_rule")) {
    try {
      s.rule = barycenter_rule_from_string(field(j, "barycenter_rule").get<std::string>());
    } catch (const std::exception&) {
      bad("unknown barycenter rule");
    }
  }
  if (j.contains("strict_preconditions")) s.strict_preconditions = field(j, "strict_preconditions").get<bool>();
  s.density = integer_or(j, "density", s.density);
  s.interior_samples = integer_or(j, "interior_samples", s.interior_samples);
  s.interior_min_distance = number_or(j, "interior_min_distance", s.interior_min_distance);
  s.continuity_pairs = integer_or(j, "continuity_pairs", s.continuity_pairs);
  s.seed = static_cast<std::uint64_t>(integer_or(j, "seed", static_cast<int>(s.seed)));
  if (!(s.eps > 0) || !(s.R > s.eps)) bad("scene needs 0 < eps < R");
  if (s.side != 1 && s.side != -1) bad("side must be 1 or -1");
  if (!(s.delta > 0) || !(s.delta_prime > 0)) bad("delta and delta_prime must be positive");
  if (!(s.lambda > 0) || !(s.lambda < 1)) bad("lambda must lie in (0, 1)");
  if (s.order < 0) bad("order must be non-negative");
  if (s.density < 1 || s.interior_samples < 0 || s.continuity_pairs < 0) bad("sample counts out of range");
  return s;
}

json to_json(const Scene& s) {
  json j;
  j["space"] = to_json(s.space);
  j["body"] = to_json(s.body);
  j["eps"] = s.eps;
  j["R"] = s.R;
  j["side"] = s.side;
  j["group"] = to_json(s.group);
  j["cover"] = {{"kind", s.cover.kind}, {"spacing", s.cover.spacing}};
  j["delta"] = s.delta;
  j["delta_prime"] = s.delta_prime;
  j["lambda"] = s.lambda;
  j["order"] = s.order;
  j["barycenter_rule"] = to_string(s.rule);
  j["strict_preconditions"] = s.strict_preconditions;
  j["density"] = s.density;
  j["interior_samples"] = s.interior_samples;
  j["interior_min_distance"] = s.interior_min_distance;
  j["continuity_pairs"] = s.continuity_pairs;
  j["seed"] = s.seed;
  return j;
}

json to_json(const ShrinkReport& r) {
  return {{"ok", r.ok},
          {"max_final_diam", r.max_final_diam},
          {"final_bound", r.final_bound},
          {"max_displacement_excess", r.max_displacement_excess},
          {"max_nearest_original", r.max_nearest_original},
          {"image_bound", r.image_bound},
          {"max_containment_excess", r.max_containment_excess},
          {"violations", r.violations}};
}

json to_json(const RetractionReport& r) {
  json gates = json::array();
  for (const auto& g : r.gates)
    gates.push_back(
        {{"name", g.name}, {"passed", g.passed}, {"value", g.value}, {"threshold", g.threshold}, {"detail", g.detail}});
  json diags = json::array();
  for (const auto& d : r.diagnostics)
    diags.push_back({{"name", d.name}, {"holds", d.holds}, {"value", d.value}, {"threshold", d.threshold}});
  const auto& sm = r.smallness;
  json j;
  j["schema_version"] = schema_version;
  j["passed"] = r.passed;
  j["retraction_attempted"] = r.retraction_attempted;
  j["failure"] = r.failure;
  j["gates"] = gates;
  j["diagnostics"] = diags;
  j["smallness"] = {{"cond1", sm.cond1},
                    {"cond1_min_gap", sm.cond1_min_gap},
                    {"cond2", sm.cond2},
                    {"cond2_distance", sm.cond2_distance},
                    {"cond3", sm.cond3},
                    {"cond3_max_deviation", sm.cond3_max_deviation},
                    {"cond3_gate", sm.cond3_gate},
                    {"cond3_pairs", sm.cond3_pairs}};
  j["calibration"] = {{"halvings", r.calibration.halvings},
                      {"delta", r.calibration.delta},
                      {"max_image_distance", r.calibration.max_image_distance},
                      {"pairs", r.calibration.pairs}};
  j["base_elements"] = r.base_elements;
  j["boundary_elements"] = r.boundary_elements;
  j["group_elements"] = r.group_elements;
  j["nerve_simplices"] = r.nerve_simplices;
  j["level_orbits"] = r.level_orbits;
  j["diam_iota"] = r.diam_iota;
  j["diam_K_Kout"] = r.diam_K_Kout;
  j["push_off_distance"] = r.push_off_distance;
  j["level_push_off_distance"] = r.level_push_off_distance;
  j["max_identity_residual"] = r.max_identity_residual;
  j["max_level_residual"] = r.max_level_residual;
  j["max_idempotence"] = r.max_idempotence;
  j["min_boundary_angle"] = r.min_boundary_angle;
  j["escape"] = r.escape;
  j["continuity_scales"] = r.continuity_scales;
  j["continuity_moduli"] = r.continuity_moduli;
  j["shrink"] = to_json(r.shrink);
  j["barycenters_solved"] = r.barycenters_solved;
  j["sample_count"] = r.samples.size();
  return j;
}

namespace {

std::string num(double x) { return format_double(x); }

std::string ids(const Simplex& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " " : "") + std::to_string(s[i]);
  return out;
}

std::string coords(const SpacePoint& p) {
  std::string out;
  for (Eigen::Index i = 0; i < p.size(); ++i) out += (i ? " " : "") + num(p[i]);
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string shrink_record_csv(const ShrinkRecord& record) {
  std::ostringstream os;
  os << "# schema barylab.shrink_record v" << schema_version << " lambda=" << num(record.lambda)
     << " order=" << record.order << " original_diam=" << num(record.original_diam) << "\n";
  os << "stage,simplex,parent,diam_before,diam_after,bound,slack\n";
  for (const auto& r : record.rows)
    os << r.stage << ',' << ids(r.simplex) << ',' << ids(r.parent) << ',' << num(r.diam_before) << ','
       << num(r.diam_after) << ',' << num(r.bound) << ',' << num(r.slack) << "\n";
  return os.str();
}

std::string samples_csv(const RetractionReport& report) {
  std::ostringstream os;
  os << "# schema barylab.retraction_samples v" << schema_version << "\n";
  os << "kind,q,r,dist,residual,idempotence,angle,escape\n";
  for (const auto& s : report.samples)
    os << s.kind << ',' << coords(s.q) << ',' << coords(s.r) << ',' << num(s.dist) << ',' << num(s.residual) << ','
       << num(s.idempotence) << ',' << num(s.angle) << ',' << (s.escape ? 1 : 0) << "\n";
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad(path + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::invalid_input, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}
}  // namespace barylab::io
