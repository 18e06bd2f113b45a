#pragma once

#include "barylab/model_space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace barylab {

struct SearchRegion {
  SpacePoint center;
  double radius = 0.0;
};

struct BarycenterProblem {
  ModelSpace space;
  std::vector<SpacePoint> P;
  std::vector<SpacePoint> Q;
  std::optional<SearchRegion> region;
};

enum class BarycenterStatus { found, not_found, indeterminate };
const char* to_string(BarycenterStatus s);

struct BarycenterCertificate {
  BarycenterStatus status = BarycenterStatus::indeterminate;
  std::string method;       // "grid+descent", "cat0-midpoint", "circle-arc", "minimax", "trivial"
  std::string metric = "native";  // "arc" when lambda is measured along the circle
  double requested_lambda = 0.0;
  SpacePoint point;              // valid when found
  double achieved_lambda = 0.0;  // max_p d(b,p) / diam(P)
  double chordal_lambda = 0.0;   // same ratio in the chordal metric (circle-arc only)
  double lambda_bound = 0.0;     // not_found: no lambda-barycenter exists for lambda below this
  std::vector<double> relative_slacks;  // diam({q} ∪ P) - d(b, q)
  double grid_resolution = 0.0;  // covering radius of the certifying grid (0 if no grid)
  double diam_P = 0.0;

  double min_slack() const;
};

/// max_p d(b,p) / diam(P); throws precondition when diam(P) = 0.
double lambda_of(const ModelSpace& space, const SpacePoint& b, const std::vector<SpacePoint>& P);
std::vector<double> relative_slacks(const ModelSpace& space, const SpacePoint& b, const std::vector<SpacePoint>& P,
                                    const std::vector<SpacePoint>& Q);

struct SolveOptions {
  double resolution = 0.0;  // grid spacing; 0 means diam(P)/200
  bool refine = true;       // one refinement at resolution/10 when indeterminate
  int max_iter = 1000;
  std::uint64_t seed = 1;
};

BarycenterCertificate solve_barycenter(const BarycenterProblem& prob, double lambda, const SolveOptions& opts = {});

/// Midpoint of the farthest pair of P (lowest index pair on ties).
BarycenterCertificate cat0_midpoint_rule(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                         const std::vector<SpacePoint>& Q);

/// Midpoint of the shortest arc containing P. Delta defaults to diam(P ∪ Q)/2.
/// lambda is reported in the arc-length metric (see README).
BarycenterCertificate circle_arc_rule(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                      const std::vector<SpacePoint>& Q, std::optional<double> Delta = std::nullopt);

/// Centre of the smallest enclosing ball of P (Euclidean kinds only).
BarycenterCertificate minimax_center(const ModelSpace& space, const std::vector<SpacePoint>& P,
                                     const std::vector<SpacePoint>& Q);

struct SampleFailure {
  std::vector<SpacePoint> P;
  std::vector<SpacePoint> Q;
  BarycenterCertificate certificate;
};

struct SampleReport {
  int trials = 0;
  int passed = 0;
  double pass_rate = 0.0;
  double worst_lambda = 0.0;  // largest achieved lambda among passes
  std::vector<SampleFailure> failures;
  bool witness_planted = false;
};

/// Random P (2-6 points) and Q (0-6 points) with diam(P) <= Delta and
/// diam(P ∪ Q) <= 2 Delta. Uses the closed-form rule when it applies, the
/// solver otherwise. On the circle an equidistant triple is planted as the last
/// trial when Delta >= sqrt(3) r.
SampleReport has_barycenters_sample(const ModelSpace& space, double lambda, double Delta, int trials,
                                    std::uint64_t seed);

}  // namespace barylab
