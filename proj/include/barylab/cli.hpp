#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace barylab::cli {

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_not_found = 2;
inline constexpr int exit_indeterminate = 3;
inline constexpr int exit_gate_failure = 4;

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string output;  // empty: stdout
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> trials;
  std::optional<int> density;
  std::optional<double> lambda;
  std::optional<double> delta;
  std::optional<int> order;
};

int cmd_barycenter(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_phase(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_subdivide(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_retract(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Companion CSV path of a retract report: x.json -> x.samples.csv.
std::string samples_path(const std::string& report_path);

}  // namespace barylab::cli
