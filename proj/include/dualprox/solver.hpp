#pragma once

#include "dualprox/extended_real.hpp"
#include "dualprox/prox.hpp"
#include "dualprox/spaces.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dualprox {

/// One summand omega * g(L x - r) of the objective.
struct CompositeTerm {
  double weight;
  ProxFunction function;
  LinearOperator op;
  Vector shift;
};

/// minimize_x  sum_i omega_i g_i(L_i x - r_i) + ||x - z||^2 / 2
struct CompositeProxProblem {
  Vector z;
  std::vector<CompositeTerm> terms;

  Index dim() const { return z.size(); }
  /// Checks weights, dimensions, and finiteness. Throws std::invalid_argument.
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Schedule = std::function<double(std::size_t n)>;
Schedule constant_schedule(double value);

/// Error a_{i,n} added to the i-th dual update at iteration n; must return a
/// vector of dimension `dim`.
using ErrorInjector = std::function<Vector(std::size_t term, std::size_t n, Index dim)>;

struct SolverConfig {
  /// Defaults to 1e-3 * min(1, rho).
  std::optional<double> epsilon;
  /// Defaults to gamma_n = rho.
  Schedule gamma;
  /// Defaults to lambda_n = 1.
  Schedule lambda;
  std::size_t max_iter = 100000;
  double tol = 1e-8;
  ErrorInjector error_injector;
  /// Per-term replacement for ||L_i||; empty or nullopt entries use the operator's bound.
  std::vector<std::optional<double>> norm_override;
  /// Initial dual iterates; zeros when empty.
  std::vector<Vector> initial_duals;
  bool record_trace = true;
};

/// gamma_n and lambda_n validated against rho = (max_i ||L_i||)^-2 for every
/// n in [0, max_iter].
class StepSchedule {
 public:
  static StepSchedule resolve(std::span<const double> norm_bounds, const SolverConfig& config);

  double rho() const { return rho_; }
  double epsilon() const { return epsilon_; }
  double gamma(std::size_t n) const { return gamma_ ? gamma_(n) : rho_; }
  double lambda(std::size_t n) const { return lambda_ ? lambda_(n) : 1.0; }

 private:
  double rho_ = 1.0;
  double epsilon_ = 1e-3;
  Schedule gamma_;
  Schedule lambda_;
};

/// Norm bounds in force for each term: override when present, else the operator's bound.
std::vector<double> term_norm_bounds(const CompositeProxProblem& problem, const SolverConfig& config);

/// Step test on both iterates. With q the largest recent ratio of consecutive
/// dual steps (an estimate of the contraction rate), stops once
///   ||x_n - x_{n-1}|| / (1 - q) <= tol (1 + ||x_n||)  and
///   ||v_n - v_{n-1}||_w / (1 - q) <= tol (1 + ||v_n||_w)
/// for `required` consecutive iterations, with ||v||_w^2 = sum_i omega_i ||v_i||^2.
/// The primal step alone is not enough: x can sit still while the duals are
/// still travelling.
class StagnationRule {
 public:
  explicit StagnationRule(double tol, int required = 3) : tol_(tol), required_(required) {}
  bool update(double step_norm, double x_norm, double dual_step, double dual_norm);
  bool satisfied() const { return count_ >= required_; }

 private:
  double tol_;
  int required_;
  int count_ = 0;
  std::optional<double> previous_dual_step_;
  std::vector<double> ratios_;
};

/// sqrt(sum_i w_i ||a_i - b_i||^2); b may be empty (treated as zeros).
double weighted_dual_norm(const std::vector<Vector>& a, const std::vector<Vector>& b, std::span<const double> w);

struct SolverState {
  std::size_t n = 0;
  std::vector<Vector> v;
  /// Always z - sum_i omega_i L_i^* v_i.
  Vector x;
};

struct TraceRecord {
  std::size_t n;
  ExtendedReal primal;
  std::optional<ExtendedReal> dual;
  std::optional<double> step_norm;
  double gamma;
  double lambda;
};

/// Append-only per-iteration log.
class Trace {
 public:
  void append(TraceRecord r) { records_.push_back(std::move(r)); }
  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Header `n,primal,dual,step_norm,gamma,lambda`; the dual and step_norm
  /// fields are left empty when not available.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<TraceRecord> records_;
};

struct Solution {
  Vector x;
  std::vector<Vector> v;
  std::size_t iterations = 0;
  bool converged = false;
  /// Distance bound to the exact solution, when certified externally.
  std::optional<double> certificate;
};

struct SolveResult {
  Solution solution;
  Trace trace;
};

ExtendedReal primal_objective(const CompositeProxProblem& problem, const Vector& x);

/// 1/2 ||z - sum omega_i L_i^* v_i||^2 + sum omega_i (g_i^*(v_i) + <v_i, r_i>);
/// nullopt when some g_i^* has no closed form.
std::optional<ExtendedReal> dual_objective(const CompositeProxProblem& problem, const std::vector<Vector>& v);

/// Dual splitting iteration for the proximity operator of sum_i omega_i g_i(L_i . - r_i) at z:
///
///   x_n     = z - sum_i omega_i L_i^* v_{i,n}
///   v_{i,n+1} = v_{i,n} + lambda_n (prox_{gamma_n g_i^*}(v_{i,n} + gamma_n (L_i x_n - r_i)) + a_{i,n} - v_{i,n})
///
/// Every g_i is reached only through its own proximity operator.
class SplittingSolver {
 public:
  /// Validates the problem and the schedule; throws ConfigError or std::invalid_argument.
  SplittingSolver(CompositeProxProblem problem, SolverConfig config);

  const CompositeProxProblem& problem() const { return problem_; }
  const SolverConfig& config() const { return config_; }
  const StepSchedule& schedule() const { return schedule_; }

  SolverState initial_state() const;
  SolverState step(const SolverState& state) const;

  /// Iterates until the stop rule holds or max_iter updates have been made.
  /// Never throws on non-convergence; the Solution is flagged instead.
  SolveResult run() const;

 private:
  std::vector<Vector> residuals(const Vector& x) const;
  SolverState advance(const SolverState& state, const std::vector<Vector>& residuals) const;
  Vector primal_from_duals(const std::vector<Vector>& v) const;

  CompositeProxProblem problem_;
  SolverConfig config_;
  StepSchedule schedule_;
};

SolveResult solve(const CompositeProxProblem& problem, const SolverConfig& config = {});

struct DykstraState {
  std::size_t n = 0;
  Vector x;
  /// Auxiliary points; sum_i omega_i z_i == z at every iteration.
  std::vector<Vector> z_aux;
};

/// Parallel Dykstra-like iteration for prox_{sum omega_i g_i}(z):
///   x_{n+1} = sum_i omega_i prox_{g_i} z_{i,n},  z_{i,n+1} = x_{n+1} + z_{i,n} - prox_{g_i} z_{i,n}.
/// It is the splitting iteration with L_i = Id, r_i = 0, gamma = lambda = 1
/// written in the variables z_{i,n} = x_n + v_{i,n}.
class DykstraSolver {
 public:
  DykstraSolver(Vector z, WeightVector weights, std::vector<ProxFunction> functions, SolverConfig config = {});

  DykstraState initial_state() const;
  DykstraState step(const DykstraState& state) const;
  SolveResult run() const;

 private:
  CompositeProxProblem problem_;
  WeightVector weights_;
  SolverConfig config_;
};

SolveResult solve_dykstra(const Vector& z, const WeightVector& weights, const std::vector<ProxFunction>& functions,
                          const SolverConfig& config = {});

enum class Qualification { satisfied_by_sufficient_rule, unknown };

/// Sufficient tests for the constraint qualification that guarantees
/// convergence. Fires when every g_i has full domain, or when a supplied point
/// x maps each L_i x - r_i into the interior of dom g_i. Never reports a violation.
Qualification check_qualification(const CompositeProxProblem& problem,
                                  const std::optional<Vector>& slater_point = std::nullopt);

}  // namespace dualprox
