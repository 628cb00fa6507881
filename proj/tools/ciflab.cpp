#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ciflab/catalog.hpp"
#include "ciflab/convergence_lab.hpp"
#include "ciflab/maxent.hpp"
#include "ciflab/numeric.hpp"
#include "ciflab/rotundity.hpp"
#include "ciflab/simple_function_io.hpp"
#include "ciflab/watson.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitProbeFailure = 4;
constexpr const char* kVersion = "ciflab 1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string format = "json";
  std::string output;

  std::string integrand;
  std::size_t d = 1;
  double p = 2.0;

  std::string problem;
  std::string mode = "auto";
  int max_iterations = 200;
  double gradient_tol = 1e-9;
  bool brute_force = false;
  std::string csv;
  std::size_t demo_cells = 128;
  int max_frequency = 8;
  std::vector<std::size_t> stability_schedule = {1, 2, 3, 4, 5, 6, 7, 8};

  bool threshold = false;
  std::vector<double> w;
  std::vector<double> alpha;
  std::string density_csv;
  int density_grid = 16;

  std::string family;
  std::string check = "II";
  std::vector<std::size_t> schedule;
  std::vector<double> etas = {0.01, 0.1, 1.0};
  std::uint64_t seed = 1;
  std::string json_out;
};

/// Relative output paths resolve against CIFLAB_OUTPUT_DIR when it is set.
std::filesystem::path output_path(const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("CIFLAB_OUTPUT_DIR"); dir && *dir) return std::filesystem::path(dir) / p;
  }
  return p;
}

void write_file(const std::string& name, const std::string& text) {
  const auto path = output_path(name);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << text;
}

std::string flatten_csv(const json& result) {
  std::ostringstream out;
  out << "key,value\n";
  const json flat = result.flatten();
  for (const auto& [k, v] : flat.items()) out << k << ',' << v.dump() << '\n';
  return out.str();
}

std::string flatten_table(const json& result) {
  std::size_t width = 0;
  const json flat = result.flatten();
  for (const auto& [k, v] : flat.items()) width = std::max(width, k.size());
  std::ostringstream out;
  for (const auto& [k, v] : flat.items()) out << k << std::string(width + 2 - k.size(), ' ') << v.dump() << '\n';
  return out.str();
}

/// Emits {config, metadata, result} as JSON, or a CSV/table projection of
/// the result. `csv` overrides the generic key,value projection.
void emit(const Options& o, const json& config, const json& metadata, const json& result,
          const std::string& csv = {}) {
  std::string text;
  if (o.format == "json") {
    text = json{{"config", config}, {"metadata", metadata}, {"result", result}}.dump(2) + "\n";
  } else if (o.format == "csv") {
    text = csv.empty() ? flatten_csv(result) : csv;
  } else {
    text = flatten_table(result);
  }
  if (o.output.empty()) {
    std::cout << text;
  } else {
    write_file(o.output, text);
  }
}

json base_metadata() { return {{"version", kVersion}}; }

cif::IntegrandPtr resolve_integrand(const Options& o) {
  try {
    return cif::any_integrand(o.integrand, o.d, o.p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

int run_integrands(const Options& o) {
  json result = json::array();
  if (o.integrand.empty()) {
    for (const auto& name : cif::catalog_names()) result.push_back(cif::integrand_metadata(*cif::catalog_get(name, o.d)));
  } else {
    result.push_back(cif::integrand_metadata(*resolve_integrand(o)));
  }
  const json config = {{"subcommand", "integrands"}, {"integrand", o.integrand}, {"d", o.d}, {"p", o.p},
                       {"format", o.format}};
  emit(o, config, base_metadata(), result);
  return kExitOk;
}

cif::SolverOptions solver_options(const Options& o) {
  cif::SolverOptions s;
  if (o.mode == "newton") {
    s.mode = cif::SolverOptions::Mode::kNewton;
  } else if (o.mode == "gradient") {
    s.mode = cif::SolverOptions::Mode::kGradient;
  } else if (o.mode != "auto") {
    throw UsageError("--mode must be auto, newton or gradient");
  }
  s.max_iterations = o.max_iterations;
  s.gradient_tol = o.gradient_tol;
  return s;
}

json solver_metadata(const cif::SolverOptions& s) {
  json m = base_metadata();
  m["solver"] = {{"max_iterations", s.max_iterations},
                 {"gradient_tol", s.gradient_tol},
                 {"divergence_threshold", s.divergence_threshold},
                 {"coefficients", "exact cell averages of each test functional"}};
  return m;
}

int run_maxent_solve(const Options& o) {
  const json spec = read_json_file(o.problem);
  cif::MomentProblem problem;
  try {
    problem = cif::moment_problem_from_json(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(o.problem + ": " + e.what());
  }
  const auto opts = solver_options(o);
  const auto sol = cif::solve(problem, opts);
  json result = cif::to_json(sol);
  if (o.brute_force) {
    const auto bf = cif::brute_force_primal(problem, problem.space);
    result["brute_force"] = {{"V", bf.value},
                             {"kkt_residual", bf.kkt_residual},
                             {"feasibility_residual", bf.feasibility_residual},
                             {"iterations", bf.iterations},
                             {"abs_difference", std::abs(bf.value - sol.primal_value)}};
  }
  std::ostringstream cells;
  cif::write_csv(cells, sol.primal);
  if (!o.csv.empty()) write_file(o.csv, cells.str());
  const json config = {{"subcommand", "maxent solve"}, {"problem", spec},        {"problem_file", o.problem},
                       {"mode", o.mode},               {"brute_force", o.brute_force}, {"format", o.format}};
  emit(o, config, solver_metadata(opts), result, cells.str());
  return sol.converged ? kExitOk : kExitNonConvergence;
}

int run_maxent_stability(const Options& o) {
  const auto opts = solver_options(o);
  const auto base = cif::trig_moment_demo(o.demo_cells, o.max_frequency);
  const auto report = cif::stability_run(base, o.stability_schedule, opts);
  std::ostringstream csv;
  csv << "n,V,l1_to_limit,iterations\n";
  for (const auto& r : report.rows) csv << r.n << ',' << json(r.value).dump() << ',' << json(r.l1_to_limit).dump()
                                        << ',' << r.iterations << '\n';
  const json config = {{"subcommand", "maxent stability"}, {"cells", o.demo_cells},
                       {"max_frequency", o.max_frequency}, {"schedule", o.stability_schedule},
                       {"mode", o.mode},                   {"format", o.format}};
  emit(o, config, solver_metadata(opts), cif::to_json(report), csv.str());
  return report.monotonicity_errors.empty() ? kExitOk : kExitProbeFailure;
}

int run_watson(const Options& o) {
  const int selected = int(o.threshold) + int(!o.w.empty()) + int(!o.alpha.empty());
  if (selected != 1) throw UsageError("watson: give exactly one of --threshold, --w, --alpha");
  json result;
  std::optional<cif::BurgDensity> density;
  if (o.threshold) {
    result = {{"alpha_bar", cif::alpha_bar()}, {"W1_at_1", cif::watson_bessel(1.0).value}};
  } else if (!o.w.empty()) {
    result = json::array();
    for (double w : o.w) {
      const auto r = cif::watson_at(w);
      json j = cif::to_json(r);
      if (w <= 0.999) j["W1_cube"] = cif::watson_cube(w);
      result.push_back(j);
      if (r.density) density = r.density;
    }
  } else {
    result = json::array();
    for (double a : o.alpha) {
      const auto r = cif::classify_attainment(a);
      result.push_back(cif::to_json(r));
      if (r.density) density = r.density;
    }
  }
  if (!o.density_csv.empty()) {
    if (!density) throw UsageError("--density-csv needs an attained point");
    std::ostringstream csv;
    cif::write_density_csv(csv, *density, o.density_grid);
    write_file(o.density_csv, csv.str());
  }
  json metadata = base_metadata();
  metadata["quadrature"] = cif::watson_metadata();
  const json config = {{"subcommand", "watson"}, {"threshold", o.threshold}, {"w", o.w},
                       {"alpha", o.alpha},       {"format", o.format}};
  emit(o, config, metadata, result);
  return kExitOk;
}

cif::SequenceFamily resolve_family(const std::string& name) {
  try {
    return cif::family(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

json lab_metadata(const cif::LabOptions& opts) {
  json m = base_metadata();
  m["lab"] = {{"etas", opts.etas},
              {"ui_thresholds", opts.ui_thresholds},
              {"dictionary_size", opts.dictionary.size()},
              {"verdict", {{"converged_below", 1e-3}, {"rate_factor", 10.0}, {"fails_at_or_above", 0.1}}},
              {"arithmetic", "exact simple-function arithmetic"}};
  return m;
}

json lab_config(const Options& o, const std::string& sub, const std::vector<std::size_t>& schedule) {
  return {{"subcommand", sub}, {"family", o.family}, {"integrand", o.integrand}, {"d", o.d},
          {"p", o.p},          {"schedule", schedule}, {"etas", o.etas},        {"format", o.format}};
}

int run_lab(const Options& o) {
  const auto fam = resolve_family(o.family);
  const auto phi = resolve_integrand(o);
  const auto schedule = o.schedule.empty() ? fam.default_schedule : o.schedule;
  cif::LabOptions opts;
  opts.etas = o.etas;
  cif::ConvergenceReport report;
  try {
    report = cif::run(fam, *phi, schedule, opts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::ostringstream csv;
  cif::write_csv(csv, report);
  if (!o.csv.empty()) write_file(o.csv, csv.str());
  emit(o, lab_config(o, "lab run", schedule), lab_metadata(opts), cif::to_json(report), csv.str());
  return kExitOk;
}

int run_lab_check(const Options& o) {
  const auto fam = resolve_family(o.family);
  const auto phi = resolve_integrand(o);
  const auto schedule = o.schedule.empty() ? fam.default_schedule : o.schedule;
  cif::LabOptions opts;
  opts.etas = o.etas;
  cif::CheckReport report;
  try {
    if (o.check == "I") {
      report = cif::preservation_check_I(*phi, fam, schedule, opts);
    } else if (o.check == "II") {
      report = cif::preservation_check_II(*phi, fam, schedule, opts);
    } else if (o.check == "measure") {
      report = cif::measure_to_value_probe(*phi, fam, schedule, opts);
    } else {
      throw UsageError("--check must be I, II or measure");
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json config = lab_config(o, "lab check", schedule);
  config["check"] = o.check;
  emit(o, config, lab_metadata(opts), cif::to_json(report));
  return report.status == "failed" ? kExitProbeFailure : kExitOk;
}

int run_rotundity(const Options& o) {
  const auto phi = resolve_integrand(o);
  const auto suite = cif::rotundity_suite(*phi, o.seed);
  const json result = cif::to_json(suite);
  json metadata = base_metadata();
  metadata["probes"] = {{"strict_transfer", {{"cells", 8}, {"trials", 200}, {"margin", 1e-3}, {"face_probability", 0.5}}},
                        {"conjugate_identity", {{"cells", 16}, {"samples", 20}, {"equality_tol", 1e-9}}},
                        {"kadec", {{"family", "rademacher_perturbation"}}},
                        {"level_set", {{"family", "burg_level_escape"}, {"witness_floor", 0.1}}}};
  const json config = {{"subcommand", "rotundity suite"}, {"integrand", o.integrand}, {"d", o.d},
                       {"p", o.p},                        {"seed", o.seed},           {"format", o.format}};
  if (!o.json_out.empty())
    write_file(o.json_out, json{{"config", config}, {"metadata", metadata}, {"result", result}}.dump(2) + "\n");
  emit(o, config, metadata, result);
  return suite.any_failed() ? kExitProbeFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Convex integral functionals: catalog, maximum entropy, Watson/Burg, convergence lab, rotundity probes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
  app.add_option("-o,--output", o.output, "Write the main output to a file instead of stdout");

  auto* integrands = app.add_subcommand("integrands", "Describe catalog integrands");
  integrands->add_option("--name", o.integrand, "A single catalog or probe integrand");
  integrands->add_option("--d", o.d, "Dimension")->check(CLI::PositiveNumber);
  integrands->add_option("--p", o.p, "Exponent for norm_power");

  auto* maxent = app.add_subcommand("maxent", "Maximum entropy moment problems");
  maxent->require_subcommand(1);
  maxent->fallthrough();
  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "auto, newton or gradient")->check(CLI::IsMember({"auto", "newton", "gradient"}));
    sub->add_option("--max-iter", o.max_iterations, "Iteration budget")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.gradient_tol, "Dual gradient tolerance")->check(CLI::PositiveNumber);
  };
  auto* solve = maxent->add_subcommand("solve", "Solve a problem file through the dual");
  solve->add_option("--problem", o.problem, "Problem JSON file")->required();
  solve->add_flag("--brute-force", o.brute_force, "Also run the primal oracle");
  solve->add_option("--csv", o.csv, "Write the primal cells as CSV");
  add_solver_flags(solve);
  auto* stability = maxent->add_subcommand("stability", "Nested trig-moment stability demo");
  stability->add_option("--cells", o.demo_cells, "Grid cells")->check(CLI::PositiveNumber);
  stability->add_option("--max-frequency", o.max_frequency, "Highest frequency")->check(CLI::PositiveNumber);
  stability->add_option("--schedule", o.stability_schedule, "Frequencies n")->delimiter(',');
  add_solver_flags(stability);

  auto* watson = app.add_subcommand("watson", "Watson integral and Burg attainment");
  watson->add_flag("--threshold", o.threshold, "Attainment threshold alpha_bar");
  watson->add_option("--w", o.w, "Evaluate W1 at w in [0, 1]")->delimiter(',');
  watson->add_option("--alpha", o.alpha, "Classify attainment of a cosine moment")->delimiter(',');
  watson->add_option("--density-csv", o.density_csv, "Write the optimal density on a grid");
  watson->add_option("--grid", o.density_grid, "Density grid points per axis")->check(CLI::PositiveNumber);

  auto* lab = app.add_subcommand("lab", "Convergence lab");
  lab->require_subcommand(1);
  lab->fallthrough();
  auto add_lab_flags = [&](CLI::App* sub) {
    sub->add_option("--family", o.family, "Sequence family")->required();
    sub->add_option("--integrand", o.integrand, "Integrand name")->required();
    sub->add_option("--p", o.p, "Exponent for norm_power");
    sub->add_option("--schedule", o.schedule, "Comma-separated n values")->delimiter(',');
    sub->add_option("--etas", o.etas, "Deviation thresholds")->delimiter(',');
  };
  auto* lab_run = lab->add_subcommand("run", "Tabulate a family under an integrand");
  add_lab_flags(lab_run);
  lab_run->add_option("--csv", o.csv, "Also write the table as CSV");
  auto* lab_check = lab->add_subcommand("check", "Preservation checks");
  add_lab_flags(lab_check);
  lab_check->add_option("--check", o.check, "I, II or measure")->check(CLI::IsMember({"I", "II", "measure"}));

  auto* rot = app.add_subcommand("rotundity", "Rotundity property probes");
  rot->require_subcommand(1);
  rot->fallthrough();
  auto* suite = rot->add_subcommand("suite", "Run every applicable probe");
  suite->add_option("--integrand", o.integrand, "Integrand name")->required();
  suite->add_option("--d", o.d, "Dimension")->check(CLI::PositiveNumber);
  suite->add_option("--p", o.p, "Exponent for norm_power");
  suite->add_option("--seed", o.seed, "Sampling seed");
  suite->add_option("--json", o.json_out, "Also write the JSON report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*integrands) return run_integrands(o);
    if (*solve) return run_maxent_solve(o);
    if (*stability) return run_maxent_stability(o);
    if (*watson) return run_watson(o);
    if (*lab_run) return run_lab(o);
    if (*lab_check) return run_lab_check(o);
    if (*suite) return run_rotundity(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const cif::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const cif::ConvergenceError& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const cif::HypothesisError& e) {
    std::cerr << "hypothesis violated: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cif::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
