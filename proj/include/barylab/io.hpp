#pragma once

#include "barylab/barycenters.hpp"
#include "barylab/covers.hpp"
#include "barylab/retraction.hpp"
#include "barylab/simplicial.hpp"
#include "barylab/subdivision.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace barylab::io {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

// Parsing throws Error(invalid_input) on malformed documents.
Vec vec_from_json(const json& j);
json to_json(const Vec& v);

ModelSpace space_from_json(const json& j);
json to_json(const ModelSpace& space);

SpacePoint point_from_json(const ModelSpace& space, const json& j);
std::vector<SpacePoint> points_from_json(const ModelSpace& space, const json& j);
json to_json(const SpacePoint& p);

/// Accepts a bare matrix, {"matrix", "translation"}, {"boost": {"axis", "length"}},
/// {"translation": [...]} or {"rotation": {"i", "j", "angle"}}.
Isometry isometry_from_json(const ModelSpace& space, const json& j);
json to_json(const Isometry& g);

GroupAction group_from_json(const ModelSpace& space, const json& j);
json to_json(const GroupAction& group);

SimplicialComplex complex_from_json(const json& j);
json to_json(const SimplicialComplex& s);

/// {"<vertex id>": [coords], ...}
VertexMap vertex_map_from_json(const ModelSpace& space, const json& j);
json to_json(const VertexMap& iota);

BallCover cover_from_json(const ModelSpace& space, const json& j);
json to_json(const BallCover& cover);

struct ProblemFile {
  BarycenterProblem problem;
  double lambda = 0.0;
  std::optional<double> Delta;
  BarycenterRule rule = BarycenterRule::solve;
  SolveOptions solve;
};

ProblemFile problem_from_json(const json& j);
json to_json(const BarycenterCertificate& cert);

ConvexBody body_from_json(const ModelSpace& space, const json& j);
json to_json(const ConvexBody& body);

Scene scene_from_json(const json& j);
json to_json(const Scene& scene);

/// Report without wall-clock time or per-sample rows (those go to samples_csv).
json to_json(const RetractionReport& report);
json to_json(const ShrinkReport& report);

/// Shortest decimal that round-trips; nan/inf spelled out.
std::string format_double(double x);

std::string shrink_record_csv(const ShrinkRecord& record);
std::string samples_csv(const RetractionReport& report);

json read_json_file(const std::string& path);
/// Two-space indented dump with a trailing newline.
std::string dump(const json& j);
/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace barylab::io
