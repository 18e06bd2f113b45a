#include "barylab/cli.hpp"

#include "barylab/io.hpp"

#include <CLI11.hpp>

#include <sstream>
#include <utility>

namespace barylab::cli {

namespace {

using io::json;

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.output.empty())
    out << content;
  else
    io::write_atomic(cfg.output, content);
}

std::string num(double x) { return io::format_double(x); }

std::vector<double> doubles(const json& j, const char* name, std::vector<double> fallback) {
  if (!j.contains(name)) return fallback;
  std::vector<double> v;
  for (const auto& x : j.at(name)) {
    if (!x.is_number()) throw Error(ErrorCode::invalid_input, std::string(name) + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::string witness(const SampleFailure& f) {
  std::string s = to_string(f.certificate.status);
  s += ":bound=" + num(f.certificate.lambda_bound) + ":P=";
  for (std::size_t i = 0; i < f.P.size(); ++i) {
    if (i) s += ';';
    for (Eigen::Index k = 0; k < f.P[i].size(); ++k) s += (k ? " " : "") + num(f.P[i][k]);
  }
  return s;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return exit_error;
}

}  // namespace

std::string samples_path(const std::string& report_path) {
  const std::string ext = ".json";
  if (report_path.size() > ext.size() && report_path.compare(report_path.size() - ext.size(), ext.size(), ext) == 0)
    return report_path.substr(0, report_path.size() - ext.size()) + ".samples.csv";
  return report_path + ".samples.csv";
}

int cmd_barycenter(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    io::ProblemFile f = io::problem_from_json(io::read_json_file(cfg.input));
    if (cfg.tol) f.problem.space = f.problem.space.with_tol(*cfg.tol);
    if (cfg.lambda) f.lambda = *cfg.lambda;
    if (cfg.seed) f.solve.seed = *cfg.seed;
    if (!(f.lambda > 0) || !(f.lambda < 1)) throw Error(ErrorCode::invalid_input, "lambda must lie in (0, 1)");
    const BarycenterCertificate cert =
        f.rule == BarycenterRule::solve
            ? solve_barycenter(f.problem, f.lambda, f.solve)
            : choose_barycenter(f.problem.space, f.problem.P, f.problem.Q, f.lambda, f.rule, f.solve);
    emit(cfg, io::dump(io::to_json(cert)), out);
    switch (cert.status) {
      case BarycenterStatus::found: return exit_ok;
      case BarycenterStatus::not_found: return exit_not_found;
      case BarycenterStatus::indeterminate: return exit_indeterminate;
    }
    return exit_error;
  });
}

int cmd_phase(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json j = io::read_json_file(cfg.input);
    const json& sj = j.contains("space") ? j.at("space") : j;
    ModelSpace space = io::space_from_json(sj);
    if (cfg.tol) space = space.with_tol(*cfg.tol);
    std::vector<double> lambdas = doubles(j, "lambdas", {0.5, 0.75, 0.8660254037844386, 0.9, 0.99});
    std::vector<double> deltas = doubles(j, "deltas", {0.8, 1.5, 1.8});
    if (cfg.lambda) lambdas = {*cfg.lambda};
    if (cfg.delta) deltas = {*cfg.delta};
    const int trials = cfg.trials.value_or(j.value("trials", 1000));
    const std::uint64_t seed = cfg.seed.value_or(j.value("seed", std::uint64_t{1}));

    std::ostringstream csv;
    csv << "# schema barylab.phase v" << io::schema_version << " space=" << to_string(space.kind()) << "\n";
    csv << "lambda,delta,trials,pass_rate,worst_witness\n";
    for (double lambda : lambdas)
      for (double Delta : deltas) {
        const SampleReport r = has_barycenters_sample(space, lambda, Delta, trials, seed);
        std::string worst = "-";
        if (!r.failures.empty()) {
          const SampleFailure* w = &r.failures.front();
          for (const auto& f : r.failures)
            if (f.certificate.lambda_bound > w->certificate.lambda_bound) w = &f;
          worst = witness(*w);
        }
        csv << num(lambda) << ',' << num(Delta) << ',' << r.trials << ',' << num(r.pass_rate) << ',' << worst << "\n";
      }
    emit(cfg, csv.str(), out);
    return exit_ok;
  });
}

int cmd_subdivide(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json j = io::read_json_file(cfg.input);
    ModelSpace space = io::space_from_json(j.at("space"));
    if (cfg.tol) space = space.with_tol(*cfg.tol);
    if (!j.contains("complex") || !j.contains("iota"))
      throw Error(ErrorCode::invalid_input, "subdivide input needs \"complex\" and \"iota\"");
    const SimplicialComplex s = io::complex_from_json(j.at("complex"));
    const VertexMap iota = io::vertex_map_from_json(space, j.at("iota"));
    for (int v : s.vertices())
      if (!iota.assignment.count(v))
        throw Error(ErrorCode::invalid_input, "iota has no image for vertex " + std::to_string(v));
    const double lambda = cfg.lambda.value_or(j.value("lambda", 0.8660254037844386));
    const int order = cfg.order.value_or(j.value("order", 1));
    if (!(lambda > 0) || !(lambda < 1)) throw Error(ErrorCode::invalid_input, "lambda must lie in (0, 1)");
    if (order < 0) throw Error(ErrorCode::invalid_input, "order must be non-negative");
    SubdivisionOptions opts;
    if (j.contains("barycenter_rule")) opts.rule = barycenter_rule_from_string(j.at("barycenter_rule").get<std::string>());
    if (cfg.seed) opts.solve.seed = *cfg.seed;

    const ShrinkResult res = iterate_subdivision(s, iota, lambda, order, opts);
    const ShrinkReport check = verify_shrinking(res.record, res.record.original_diam, space.tol());
    emit(cfg, io::shrink_record_csv(res.record), out);
    if (!check.ok) {
      for (const auto& v : check.violations) err << "violation: " << v << "\n";
      return exit_gate_failure;
    }
    return exit_ok;
  });
}

int cmd_retract(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scene scene = io::scene_from_json(io::read_json_file(cfg.input));
    if (cfg.tol) scene.space = scene.space.with_tol(*cfg.tol);
    if (cfg.seed) scene.seed = *cfg.seed;
    if (cfg.density) scene.density = *cfg.density;
    if (cfg.lambda) scene.lambda = *cfg.lambda;
    if (cfg.delta) scene.delta = *cfg.delta;
    if (cfg.order) scene.order = *cfg.order;
    const RetractionReport rep = run_pipeline(scene);
    emit(cfg, io::dump(io::to_json(rep)), out);
    if (!cfg.output.empty()) io::write_atomic(samples_path(cfg.output), io::samples_csv(rep));
    if (!rep.passed) {
      err << "gate failed: " << rep.failure << "\n";
      return exit_gate_failure;
    }
    return exit_ok;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barycenter, subdivision and retraction experiments"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::uint64_t seed = 0;
  double tol = 0, lambda = 0, delta = 0;
  int trials = 0, density = 0, order = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "input JSON")->required();
    sub->add_option("--output", cfg.output, "output path (stdout when omitted)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--tol", tol, "numeric tolerance override");
    sub->add_option("--trials", trials, "trials per grid cell");
    sub->add_option("--density", density, "Sigma_eps sample count");
    sub->add_option("--lambda", lambda, "lambda override");
    sub->add_option("--delta", delta, "delta override");
    sub->add_option("--order", order, "subdivision order override");
  };
  const std::pair<const char*, const char*> subcommands[] = {
      {"barycenter", "find or rule out a lambda-barycenter of a problem file"},
      {"phase", "pass rates of has-barycenters sampling over a (lambda, Delta) grid"},
      {"subdivide", "iterated lambda-shrinking subdivision of a labelled complex"},
      {"retract", "run the retraction pipeline on a scene"}};
  for (const auto& [name, help] : subcommands) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_error;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.subcommand = sub->get_name();
  if (sub->count("--seed")) cfg.seed = seed;
  if (sub->count("--tol")) cfg.tol = tol;
  if (sub->count("--trials")) cfg.trials = trials;
  if (sub->count("--density")) cfg.density = density;
  if (sub->count("--lambda")) cfg.lambda = lambda;
  if (sub->count("--delta")) cfg.delta = delta;
  if (sub->count("--order")) cfg.order = order;

  if (cfg.subcommand == "barycenter") return cmd_barycenter(cfg, out, err);
  if (cfg.subcommand == "phase") return cmd_phase(cfg, out, err);
  if (cfg.subcommand == "subdivide") return cmd_subdivide(cfg, out, err);
  return cmd_retract(cfg, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"barylab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace barylab::cli
