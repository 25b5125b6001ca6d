// dualprox: command-line front end for the splitting solvers.

#include "dualprox/best_approx.hpp"
#include "dualprox/imaging.hpp"
#include "dualprox/io.hpp"
#include "dualprox/solver.hpp"

#include "format.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace dualprox;
using detail::format_real;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitInputError = 1;
constexpr int kExitMaxIter = 2;

struct Overrides {
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<double> gamma;
  std::optional<double> lambda;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tol", o.tol, "Stopping tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", o.max_iter, "Iteration cap");
  cmd->add_option("--gamma", o.gamma, "Constant step gamma (checked against the admissible range)");
  cmd->add_option("--lambda", o.lambda, "Constant relaxation lambda in [eps, 1]");
}

void apply(const Overrides& o, SolverConfig& c) {
  if (o.tol) c.tol = *o.tol;
  if (o.max_iter) c.max_iter = *o.max_iter;
  if (o.gamma) c.gamma = constant_schedule(*o.gamma);
  if (o.lambda) c.lambda = constant_schedule(*o.lambda);
}

void write_trace(const fs::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::ParseError(path.string() + ": cannot write");
  trace.write_csv(out);
}

std::string ext_str(const ExtendedReal& v) { return v.is_finite() ? format_real(v.value()) : "inf"; }

void print_result(bool converged, std::size_t iters, const ExtendedReal& primal) {
  std::cout << "RESULT converged=" << (converged ? "true" : "false") << " iters=" << iters
            << " primal=" << ext_str(primal) << "\n";
}

int cmd_solve(const fs::path& input, const Overrides& o, const fs::path& out) {
  const io::ProblemFile file = io::load_problem(input);
  SolverConfig config;
  io::apply_settings(file.settings, config);
  apply(o, config);
  if (check_qualification(file.problem, file.slater_point) != Qualification::satisfied_by_sufficient_rule) {
    std::cerr << "warning: qualification not confirmed by the sufficient tests; convergence is not guaranteed\n";
  }
  const SolveResult r = solve(file.problem, config);
  fs::create_directories(out);
  io::write_vector_csv(out / "solution.csv", r.solution.x);
  write_trace(out / "trace.csv", r.trace);

  const ExtendedReal primal = primal_objective(file.problem, r.solution.x);
  const auto dual = dual_objective(file.problem, r.solution.v);
  std::cout << "iterations: " << r.solution.iterations << "\n"
            << "converged: " << (r.solution.converged ? "true" : "false") << "\n"
            << "primal: " << ext_str(primal) << "\n"
            << "dual: " << (dual ? ext_str(*dual) : "n/a") << "\n";
  print_result(r.solution.converged, r.solution.iterations, primal);
  return r.solution.converged ? kExitConverged : kExitMaxIter;
}

int cmd_project(const fs::path& input, const Overrides& o, const fs::path& out) {
  const io::ConstraintsFile file = io::load_constraints(input);
  SolverConfig base;
  io::apply_settings(file.settings, base);
  apply(o, base);
  ProjectionConfig config;
  config.tol = base.tol;
  config.max_iter = base.max_iter;
  config.gamma = base.gamma;
  config.lambda = base.lambda;
  config.epsilon = base.epsilon;
  config.slater_point = file.slater_point;
  const ProjectionResult r = project_intersection(file.z, file.constraints, config);
  fs::create_directories(out);
  io::write_vector_csv(out / "solution.csv", r.solution.x);
  write_trace(out / "trace.csv", r.trace);

  const char* status = r.status == ProjectionStatus::converged        ? "converged"
                       : r.status == ProjectionStatus::max_iterations ? "max_iterations"
                                                                      : "infeasible_stagnation";
  const ExtendedReal primal = ExtendedReal::finite(0.5 * (r.solution.x - file.z).squaredNorm());
  std::cout << "iterations: " << r.solution.iterations << "\n"
            << "status: " << status << "\n"
            << "feasibility_residual: " << format_real(r.feasibility_residual) << "\n"
            << "distance: " << format_real((r.solution.x - file.z).norm()) << "\n";
  print_result(r.solution.converged, r.solution.iterations, primal);
  return r.solution.converged ? kExitConverged : kExitMaxIter;
}

struct DenoiseArgs {
  std::string weights = "0.85,0.01,0.14";
  double noise = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::string basis = "identity";
};

WeightVector parse_weights(const std::string& text) {
  std::vector<double> w;
  std::istringstream in(text);
  std::string f;
  while (std::getline(in, f, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(f, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f.size()) throw io::ParseError("--weights: not a number: '" + f + "'");
    w.push_back(v);
  }
  return WeightVector(w);
}

int cmd_denoise(const fs::path& input, const DenoiseArgs& a, const Overrides& o, const fs::path& out) {
  const ImageGrid clean = io::read_image(input);
  const WeightVector weights = parse_weights(a.weights);
  if (weights.size() != 3) throw std::invalid_argument("--weights: denoising takes three weights (data, coefficients, tv)");
  const OrthonormalBasisOp basis = make_basis(a.basis, clean.width, clean.height);
  const Vector noise = gaussian_noise(clean.size(), a.noise, a.seed);
  const LinearOperator T = identity_operator(clean.size());
  MeasurementModel model{clean.width, clean.height, {T}, {degrade(clean, T, noise)}};
  const ImageGrid observed = ImageGrid::from_pixels(clean.width, clean.height, model.data[0]);

  SolverConfig config;
  config.tol = 1e-6;
  config.max_iter = 500000;
  apply(o, config);
  const RecoveryResult r = recover_image(model, basis, weights, config);

  fs::create_directories(out);
  io::write_image_csv(out / "observed.csv", observed);
  io::write_image_csv(out / "recovered.csv", r.image);
  io::write_pgm(out / "recovered.pgm", r.image);
  write_trace(out / "trace.csv", r.trace);

  const double obj_in = recovery_objective(model, basis, weights, observed);
  const double obj_out = recovery_objective(model, basis, weights, r.image);
  std::cout << "iterations: " << r.solution.iterations << "\n"
            << "converged: " << (r.solution.converged ? "true" : "false") << "\n"
            << "tv_in: " << format_real(tv(observed)) << "\n"
            << "tv_out: " << format_real(tv(r.image)) << "\n"
            << "objective_in: " << format_real(obj_in) << "\n"
            << "objective_out: " << format_real(obj_out) << "\n";
  print_result(r.solution.converged, r.solution.iterations, ExtendedReal::finite(obj_out));
  return r.solution.converged ? kExitConverged : kExitMaxIter;
}

std::optional<double> field_value(const std::string& s, const std::string& source, std::size_t line) {
  if (s.empty()) return std::nullopt;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw io::ParseError(source + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

// primal + dual tends to |z|^2/2, so its flattening tracks the duality gap.
int cmd_trace_plot(const fs::path& input, double tol, const fs::path& out) {
  std::istringstream in(io::read_text(input));
  const std::string source = input.string();
  std::string line;
  if (!std::getline(in, line) || line != "n,primal,dual,step_norm,gamma,lambda") {
    throw io::ParseError(source + ":1: expected header n,primal,dual,step_norm,gamma,lambda");
  }
  std::ostringstream csv;
  csv << "n,primal,dual,primal_plus_dual,step_norm,log10_step_norm\n";
  std::size_t lineno = 1;
  std::size_t last_n = 0;
  std::optional<double> last_primal;
  std::optional<double> last_step;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    std::string x;
    while (std::getline(fields, x, ',')) f.push_back(x);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw io::ParseError(source + ":" + std::to_string(lineno) + ": expected 6 fields");
    const auto n = field_value(f[0], source, lineno);
    const auto primal = field_value(f[1], source, lineno);
    const auto dual = field_value(f[2], source, lineno);
    const auto step = field_value(f[3], source, lineno);
    if (!n || !primal) throw io::ParseError(source + ":" + std::to_string(lineno) + ": n and primal are required");
    last_n = static_cast<std::size_t>(*n);
    last_primal = primal;
    last_step = step;
    csv << f[0] << "," << f[1] << "," << f[2] << ",";
    if (dual) csv << format_real(*primal + *dual);
    csv << "," << f[3] << ",";
    if (step && *step > 0.0) csv << format_real(std::log10(*step));
    csv << "\n";
  }
  if (!last_primal) throw io::ParseError(source + ": trace has no rows");
  fs::create_directories(out);
  {
    std::ofstream o(out / "plot.csv", std::ios::binary);
    if (!o) throw io::ParseError((out / "plot.csv").string() + ": cannot write");
    o << csv.str();
  }
  const bool small_step = last_step && *last_step <= tol;
  std::cout << "rows: " << lineno - 1 << "\n";
  print_result(small_step, last_n, ExtendedReal::finite(*last_primal));
  return kExitConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximity operators of composite convex functions by dual splitting"};
  app.require_subcommand(1);

  Overrides o;
  std::string out = "out";
  std::string input;

  auto* solve_cmd = app.add_subcommand("solve", "Solve a composite prox problem given as JSON");
  solve_cmd->add_option("problem", input, "Problem JSON")->required()->check(CLI::ExistingFile);
  add_overrides(solve_cmd, o);
  solve_cmd->add_option("--out", out, "Output directory (solution.csv, trace.csv)");

  auto* project_cmd = app.add_subcommand("project", "Project onto an intersection of composite constraints");
  project_cmd->add_option("constraints", input, "Constraints JSON")->required()->check(CLI::ExistingFile);
  add_overrides(project_cmd, o);
  project_cmd->add_option("--out", out, "Output directory (solution.csv, trace.csv)");

  DenoiseArgs d;
  auto* denoise_cmd = app.add_subcommand(
      "denoise",
      "Recover an image from a noisy copy of it. PGM gray level k is read as k/maxval; "
      "output PGM pixels are clamped to [0,1] and written as round(255 v)");
  denoise_cmd->add_option("image", input, "Input image (.pgm or .csv)")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_option("--weights", d.weights, "Three weights: data, coefficient l1, tv");
  denoise_cmd->add_option("--noise", d.noise, "Gaussian noise standard deviation")->check(CLI::NonNegativeNumber);
  denoise_cmd->add_option("--seed", d.seed, "Noise seed");
  denoise_cmd->add_option("--basis", d.basis, "Orthonormal basis")->check(CLI::IsMember({"identity", "haar"}));
  add_overrides(denoise_cmd, o);
  denoise_cmd->add_option("--out", out, "Output directory (recovered.pgm, recovered.csv, observed.csv, trace.csv)");

  double plot_tol = 1e-8;
  auto* plot_cmd = app.add_subcommand("trace-plot-data", "Turn a trace CSV into plot-ready columns");
  plot_cmd->add_option("trace", input, "Trace CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--tol", plot_tol, "Step size regarded as converged in the summary");
  plot_cmd->add_option("--out", out, "Output directory (plot.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (*solve_cmd) return cmd_solve(input, o, out);
    if (*project_cmd) return cmd_project(input, o, out);
    if (*denoise_cmd) return cmd_denoise(input, d, o, out);
    if (*plot_cmd) return cmd_trace_plot(input, plot_tol, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << "RESULT converged=false iters=0 primal=nan\n";
    return kExitInputError;
  }
  return kExitInputError;
}
