#include "dualprox/solver.hpp"

#include "format.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dualprox {

void CompositeProxProblem::validate() const {
  if (z.size() == 0) throw std::invalid_argument("problem: z is empty");
  require_finite(z, "problem z");
  if (terms.empty()) throw std::invalid_argument("problem: no terms");
  double total = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    const std::string where = "term " + std::to_string(i);
    if (!(t.weight > 0.0 && t.weight <= 1.0)) throw std::invalid_argument(where + ": weight must lie in (0,1]");
    total += t.weight;
    if (t.op.dim_in() != z.size()) throw DimensionError(where + ": operator input dimension differs from z");
    require_dim(t.shift, t.op.dim_out(), where + " shift");
    require_finite(t.shift, where + " shift");
    if (auto d = t.function.dim(); d && *d != t.op.dim_out()) {
      throw DimensionError(where + ": function dimension differs from operator output");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("problem: weights must sum to 1");
}

Schedule constant_schedule(double value) {
  return [value](std::size_t) { return value; };
}

std::vector<double> term_norm_bounds(const CompositeProxProblem& problem, const SolverConfig& config) {
  if (!config.norm_override.empty() && config.norm_override.size() != problem.terms.size()) {
    throw ConfigError("norm_override: one entry per term required");
  }
  std::vector<double> bounds;
  bounds.reserve(problem.terms.size());
  for (std::size_t i = 0; i < problem.terms.size(); ++i) {
    const auto& o = config.norm_override.empty() ? std::nullopt : config.norm_override[i];
    if (o && !(*o >= 0.0 && std::isfinite(*o))) throw ConfigError("norm_override: bounds must be finite and >= 0");
    bounds.push_back(o ? *o : problem.terms[i].op.norm_upper_bound());
  }
  return bounds;
}

StepSchedule StepSchedule::resolve(std::span<const double> norm_bounds, const SolverConfig& config) {
  if (norm_bounds.empty()) throw ConfigError("schedule: no operators");
  const double max_norm = *std::max_element(norm_bounds.begin(), norm_bounds.end());
  if (!(max_norm > 0.0)) throw ConfigError("schedule: every operator is zero, rho is undefined");
  if (!(config.tol > 0.0)) throw ConfigError("tol must be positive");

  StepSchedule s;
  s.rho_ = 1.0 / (max_norm * max_norm);
  const double eps_cap = std::min(1.0, s.rho_);
  s.epsilon_ = config.epsilon.value_or(1e-3 * eps_cap);
  if (!(s.epsilon_ > 0.0 && s.epsilon_ < eps_cap)) {
    std::ostringstream os;
    os.precision(17);
    os << "epsilon " << s.epsilon_ << " outside (0, " << eps_cap << ")";
    throw ConfigError(os.str());
  }
  s.gamma_ = config.gamma;
  s.lambda_ = config.lambda;

  const double gamma_hi = 2.0 * s.rho_ - s.epsilon_;
  for (std::size_t n = 0; n <= config.max_iter; ++n) {
    const double g = s.gamma(n);
    const double l = s.lambda(n);
    if (!(g >= s.epsilon_ && g <= gamma_hi)) {
      std::ostringstream os;
      os.precision(17);
      os << "gamma_" << n << " = " << g << " outside [" << s.epsilon_ << ", " << gamma_hi << "]";
      throw ConfigError(os.str());
    }
    if (!(l >= s.epsilon_ && l <= 1.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "lambda_" << n << " = " << l << " outside [" << s.epsilon_ << ", 1]";
      throw ConfigError(os.str());
    }
    // Constant defaults need only one check.
    if (!config.gamma && !config.lambda) break;
  }
  return s;
}

bool StagnationRule::update(double step_norm, double x_norm, double dual_step, double dual_norm) {
  bool small = false;
  if (previous_dual_step_) {
    const double q = *previous_dual_step_ > 0.0 ? dual_step / *previous_dual_step_ : (dual_step > 0.0 ? 1.0 : 0.0);
    ratios_.push_back(q);
    if (ratios_.size() > static_cast<std::size_t>(required_)) ratios_.erase(ratios_.begin());
    const double q_max = *std::max_element(ratios_.begin(), ratios_.end());
    if (step_norm == 0.0 && dual_step == 0.0) {
      small = true;
    } else if (q_max < 1.0) {
      const double amp = 1.0 / (1.0 - q_max);
      small = step_norm * amp <= tol_ * (1.0 + x_norm) && dual_step * amp <= tol_ * (1.0 + dual_norm);
    }
  }
  previous_dual_step_ = dual_step;
  if (small) ++count_;
  else count_ = 0;
  return satisfied();
}

double weighted_dual_norm(const std::vector<Vector>& a, const std::vector<Vector>& b, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * (b.empty() ? a[i].squaredNorm() : (a[i] - b[i]).squaredNorm());
  return std::sqrt(s);
}

void Trace::write_csv(std::ostream& os) const {
  using detail::format_real;
  os << "n,primal,dual,step_norm,gamma,lambda\n";
  for (const auto& r : records_) {
    os << r.n << ',' << format_real(r.primal.to_double()) << ',';
    if (r.dual) os << format_real(r.dual->to_double());
    os << ',';
    if (r.step_norm) os << format_real(*r.step_norm);
    os << ',' << format_real(r.gamma) << ',' << format_real(r.lambda) << '\n';
  }
}

ExtendedReal primal_objective(const CompositeProxProblem& problem, const Vector& x) {
  require_same_dim(x, problem.z, "primal objective");
  ExtendedReal total = ExtendedReal::finite(0.5 * (x - problem.z).squaredNorm());
  for (const auto& t : problem.terms) {
    total += t.weight * t.function.eval(t.op.apply(x) - t.shift);
  }
  return total;
}

namespace {

std::optional<ExtendedReal> dual_terms(const CompositeProxProblem& problem, const std::vector<Vector>& v) {
  ExtendedReal total = ExtendedReal::finite(0.0);
  for (std::size_t i = 0; i < problem.terms.size(); ++i) {
    const auto& t = problem.terms[i];
    auto conj = t.function.eval_conjugate(v[i]);
    if (!conj) return std::nullopt;
    total += t.weight * (*conj + ExtendedReal::finite(v[i].dot(t.shift)));
  }
  return total;
}

// Membership tests in eval and eval_conjugate allow a small tolerance, which
// would let a slightly infeasible pair pass the gap test below. Here the
// domains are checked without slack; unbounded conjugate domains are never
// trusted.
bool exactly_in_domains(const CompositeProxProblem& problem, const std::vector<Vector>& y,
                        const std::vector<Vector>& v) {
  for (std::size_t i = 0; i < problem.terms.size(); ++i) {
    const auto& g = problem.terms[i].function;
    switch (g.kind()) {
      case FunctionKind::zero:
        if (!v[i].isZero(0.0)) return false;
        break;
      case FunctionKind::norm1:
      case FunctionKind::norm2:
      case FunctionKind::mixed_norm21:
        // |v|_* <= 1 exactly when the unit prox of the norm sends v to 0
        if (!g.prox(1.0, v[i]).isZero(0.0)) return false;
        break;
      case FunctionKind::elastic_net:
        break;
      case FunctionKind::indicator: {
        const auto* set = g.domain_set();
        if (set->distance(y[i]) != 0.0) return false;
        if (set->support(v[i]).is_infinite()) return false;
        if (set->kind() != ConvexSetDescriptor::Kind::ball && set->kind() != ConvexSetDescriptor::Kind::box) return false;
        if (set->kind() == ConvexSetDescriptor::Kind::box) {
          const auto& b = std::get<ConvexSetDescriptor::Box>(set->shape());
          if (!b.lo.allFinite() || !b.hi.allFinite()) return false;
        }
        break;
      }
    }
  }
  return true;
}

// Objective values accurate enough to certify ||x - x*|| <= tol through
// 1-strong convexity: P(x) - P* <= P(x) + D(v) - ||z||^2/2.
bool gap_certifies(const ExtendedReal& primal, const std::optional<ExtendedReal>& dual, double half_z_sq, double tol) {
  if (!dual || primal.is_infinite() || dual->is_infinite()) return false;
  const double p = primal.value();
  const double d = dual->value();
  const double gap = p + d - half_z_sq;
  const double roundoff = 64.0 * DBL_EPSILON * (std::abs(p) + std::abs(d) + half_z_sq);
  return gap + roundoff <= 0.5 * tol * tol;
}

}  // namespace

std::optional<ExtendedReal> dual_objective(const CompositeProxProblem& problem, const std::vector<Vector>& v) {
  if (v.size() != problem.terms.size()) throw DimensionError("dual objective: one dual vector per term required");
  Vector u = problem.z;
  for (std::size_t i = 0; i < v.size(); ++i) u -= problem.terms[i].weight * problem.terms[i].op.adjoint(v[i]);
  auto rest = dual_terms(problem, v);
  if (!rest) return std::nullopt;
  return ExtendedReal::finite(0.5 * u.squaredNorm()) + *rest;
}

// ---------------------------------------------------------------------------

SplittingSolver::SplittingSolver(CompositeProxProblem problem, SolverConfig config)
    : problem_(std::move(problem)), config_(std::move(config)) {
  problem_.validate();
  const auto bounds = term_norm_bounds(problem_, config_);
  schedule_ = StepSchedule::resolve(bounds, config_);
  if (!config_.initial_duals.empty()) {
    if (config_.initial_duals.size() != problem_.terms.size()) {
      throw ConfigError("initial_duals: one vector per term required");
    }
    for (std::size_t i = 0; i < problem_.terms.size(); ++i) {
      require_dim(config_.initial_duals[i], problem_.terms[i].op.dim_out(), "initial dual");
    }
  }
}

Vector SplittingSolver::primal_from_duals(const std::vector<Vector>& v) const {
  Vector x = problem_.z;
  for (std::size_t i = 0; i < v.size(); ++i) x -= problem_.terms[i].weight * problem_.terms[i].op.adjoint(v[i]);
  return x;
}

SolverState SplittingSolver::initial_state() const {
  SolverState s;
  if (config_.initial_duals.empty()) {
    for (const auto& t : problem_.terms) s.v.push_back(Vector::Zero(t.op.dim_out()));
  } else {
    s.v = config_.initial_duals;
  }
  s.x = primal_from_duals(s.v);
  return s;
}

std::vector<Vector> SplittingSolver::residuals(const Vector& x) const {
  std::vector<Vector> y;
  y.reserve(problem_.terms.size());
  for (const auto& t : problem_.terms) y.push_back(t.op.apply(x) - t.shift);
  return y;
}

SolverState SplittingSolver::advance(const SolverState& state, const std::vector<Vector>& y) const {
  const double gamma = schedule_.gamma(state.n);
  const double lambda = schedule_.lambda(state.n);
  SolverState next;
  next.n = state.n + 1;
  next.v.resize(state.v.size());
  // The m dual updates are independent given x_n.
  for (std::size_t i = 0; i < state.v.size(); ++i) {
    const auto& t = problem_.terms[i];
    Vector p = t.function.prox_conjugate(gamma, state.v[i] + gamma * y[i]);
    if (config_.error_injector) {
      Vector a = config_.error_injector(i, state.n, t.op.dim_out());
      require_dim(a, t.op.dim_out(), "injected error");
      p += a;
    }
    next.v[i] = state.v[i] + lambda * (p - state.v[i]);
  }
  next.x = primal_from_duals(next.v);
  return next;
}

SolverState SplittingSolver::step(const SolverState& state) const { return advance(state, residuals(state.x)); }

SolveResult SplittingSolver::run() const {
  SolveResult result;
  SolverState state = initial_state();
  StagnationRule stagnation(config_.tol);
  const double half_z_sq = 0.5 * problem_.z.squaredNorm();
  std::vector<double> w;
  for (const auto& t : problem_.terms) w.push_back(t.weight);
  Vector previous_x;
  std::vector<Vector> previous_v;
  bool converged = false;

  for (;;) {
    const auto y = residuals(state.x);
    ExtendedReal primal = ExtendedReal::finite(0.5 * (state.x - problem_.z).squaredNorm());
    for (std::size_t i = 0; i < y.size(); ++i) {
      primal += problem_.terms[i].weight * problem_.terms[i].function.eval(y[i]);
    }
    // z - sum omega_i L_i^* v_i is x_n itself.
    std::optional<ExtendedReal> dual = dual_terms(problem_, state.v);
    if (dual) dual = ExtendedReal::finite(0.5 * state.x.squaredNorm()) + *dual;

    std::optional<double> step_norm;
    if (state.n > 0) step_norm = (state.x - previous_x).norm();

    if (config_.record_trace) {
      result.trace.append({state.n, primal, dual, step_norm, schedule_.gamma(state.n), schedule_.lambda(state.n)});
    }
    if (step_norm && stagnation.update(*step_norm, state.x.norm(), weighted_dual_norm(state.v, previous_v, w),
                                      weighted_dual_norm(state.v, {}, w))) {
      converged = true;
    }
    if (gap_certifies(primal, dual, half_z_sq, config_.tol) && exactly_in_domains(problem_, y, state.v)) {
      converged = true;
    }
    if (converged || state.n >= config_.max_iter) break;

    previous_x = state.x;
    previous_v = state.v;
    state = advance(state, y);
  }

  result.solution.x = std::move(state.x);
  result.solution.v = std::move(state.v);
  result.solution.iterations = state.n;
  result.solution.converged = converged;
  return result;
}

SolveResult solve(const CompositeProxProblem& problem, const SolverConfig& config) {
  return SplittingSolver(problem, config).run();
}

// ---------------------------------------------------------------------------

DykstraSolver::DykstraSolver(Vector z, WeightVector weights, std::vector<ProxFunction> functions,
                             SolverConfig config)
    : weights_(std::move(weights)), config_(std::move(config)) {
  if (functions.size() != weights_.size()) throw std::invalid_argument("dykstra: one weight per function required");
  if (!(config_.tol > 0.0)) throw ConfigError("tol must be positive");
  problem_.z = std::move(z);
  for (std::size_t i = 0; i < functions.size(); ++i) {
    problem_.terms.push_back({weights_[i], functions[i], identity_operator(problem_.z.size()),
                              Vector::Zero(problem_.z.size())});
  }
  problem_.validate();
}

DykstraState DykstraSolver::initial_state() const {
  DykstraState s;
  s.x = problem_.z;
  s.z_aux.assign(problem_.terms.size(), problem_.z);
  return s;
}

DykstraState DykstraSolver::step(const DykstraState& state) const {
  const std::size_t m = problem_.terms.size();
  std::vector<Vector> p(m);
  DykstraState next;
  next.n = state.n + 1;
  next.x = Vector::Zero(problem_.z.size());
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = problem_.terms[i].function.prox(1.0, state.z_aux[i]);
    next.x += weights_[i] * p[i];
  }
  next.z_aux.resize(m);
  for (std::size_t i = 0; i < m; ++i) next.z_aux[i] = next.x + state.z_aux[i] - p[i];
  return next;
}

SolveResult DykstraSolver::run() const {
  SolveResult result;
  DykstraState state = initial_state();
  StagnationRule stagnation(config_.tol);
  const double half_z_sq = 0.5 * problem_.z.squaredNorm();
  Vector previous_x;
  std::vector<Vector> previous_v;
  bool converged = false;
  auto duals = [](const DykstraState& s) {
    std::vector<Vector> v;
    for (const auto& zi : s.z_aux) v.push_back(zi - s.x);
    return v;
  };

  for (;;) {
    const auto primal = primal_objective(problem_, state.x);
    const auto v = duals(state);
    auto dual = dual_terms(problem_, v);
    if (dual) dual = ExtendedReal::finite(0.5 * state.x.squaredNorm()) + *dual;
    std::optional<double> step_norm;
    if (state.n > 0) step_norm = (state.x - previous_x).norm();
    if (config_.record_trace) result.trace.append({state.n, primal, dual, step_norm, 1.0, 1.0});
    if (step_norm && stagnation.update(*step_norm, state.x.norm(), weighted_dual_norm(v, previous_v, weights_.values()),
                                      weighted_dual_norm(v, {}, weights_.values()))) {
      converged = true;
    }
    if (gap_certifies(primal, dual, half_z_sq, config_.tol) &&
        exactly_in_domains(problem_, std::vector<Vector>(v.size(), state.x), v)) {
      converged = true;
    }
    if (converged || state.n >= config_.max_iter) break;
    previous_x = state.x;
    previous_v = v;
    state = step(state);
  }

  result.solution.v = duals(state);
  result.solution.x = std::move(state.x);
  result.solution.iterations = state.n;
  result.solution.converged = converged;
  return result;
}

SolveResult solve_dykstra(const Vector& z, const WeightVector& weights, const std::vector<ProxFunction>& functions,
                          const SolverConfig& config) {
  return DykstraSolver(z, weights, functions, config).run();
}

// ---------------------------------------------------------------------------

Qualification check_qualification(const CompositeProxProblem& problem, const std::optional<Vector>& slater_point) {
  const bool all_full = std::all_of(problem.terms.begin(), problem.terms.end(), [](const CompositeTerm& t) {
    return t.function.domain_kind() == DomainKind::full_space;
  });
  if (all_full) return Qualification::satisfied_by_sufficient_rule;
  if (!slater_point || slater_point->size() != problem.z.size()) return Qualification::unknown;

  for (const auto& t : problem.terms) {
    if (t.function.domain_kind() == DomainKind::full_space) continue;
    const auto* set = t.function.domain_set();
    if (!set || !set->interior_contains(t.op.apply(*slater_point) - t.shift)) return Qualification::unknown;
  }
  return Qualification::satisfied_by_sufficient_rule;
}

}  // namespace dualprox
