#include "dualprox/best_approx.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dualprox {

void SummableErrorSchedule::validate() const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("error schedule: scale must be finite and >= 0");
  if (!(exponent > 1.0)) throw ConfigError("error schedule: exponent must exceed 1 for summability");
}

Vector SummableErrorSchedule::at(std::size_t term, std::size_t n, Index dim) const {
  // splitmix-style mixing keeps (term, n) streams independent of call order
  std::uint64_t key = seed ^ (0x9e3779b97f4a7c15ULL * (term + 1)) ^ (0xbf58476d1ce4e5b9ULL * (n + 1));
  std::mt19937_64 rng(key);
  std::normal_distribution<double> normal;
  Vector d(dim);
  for (Index k = 0; k < dim; ++k) d[k] = normal(rng);
  const double nrm = d.norm();
  if (nrm == 0.0) return Vector::Zero(dim);
  return (scale / std::pow(static_cast<double>(n + 1), exponent) / nrm) * d;
}

double feasibility_residual(const Vector& x, const std::vector<CompositeConstraint>& constraints) {
  double worst = 0.0;
  for (const auto& c : constraints) worst = std::max(worst, c.set.distance(c.op.apply(x) - c.shift));
  return worst;
}

CompositeProxProblem as_composite_problem(const Vector& z, const std::vector<CompositeConstraint>& constraints) {
  CompositeProxProblem p;
  p.z = z;
  const double w = constraints.empty() ? 1.0 : 1.0 / static_cast<double>(constraints.size());
  for (const auto& c : constraints) p.terms.push_back({w, make_indicator(c.set), c.op, c.shift});
  return p;
}

ProjectionResult project_intersection(const Vector& z, const std::vector<CompositeConstraint>& constraints,
                                      const ProjectionConfig& config) {
  if (constraints.empty()) throw std::invalid_argument("project_intersection: no constraints");
  for (const auto& c : constraints) {
    if (c.set.dim() != c.op.dim_out()) throw DimensionError("constraint: set dimension differs from operator output");
  }
  const CompositeProxProblem problem = as_composite_problem(z, constraints);
  problem.validate();
  if (config.errors) config.errors->validate();

  if (!config.assume_qualified) {
    std::vector<Vector> candidates;
    if (config.slater_point) candidates.push_back(*config.slater_point);
    candidates.push_back(z);
    candidates.push_back(Vector::Zero(z.size()));
    const bool qualified = std::any_of(candidates.begin(), candidates.end(), [&](const Vector& p) {
      return check_qualification(problem, p) == Qualification::satisfied_by_sufficient_rule;
    });
    if (!qualified) {
      throw QualificationError(
          "project_intersection: no interior point found for the qualification test; supply slater_point or set "
          "assume_qualified");
    }
  }

  SolverConfig sc;
  sc.epsilon = config.epsilon;
  sc.gamma = config.gamma;
  sc.lambda = config.lambda;
  sc.max_iter = config.max_iter;
  sc.tol = config.tol;
  const auto bounds = term_norm_bounds(problem, sc);
  const StepSchedule schedule = StepSchedule::resolve(bounds, sc);
  const double feasibility_tol = config.feasibility_tol.value_or(10.0 * config.tol);
  if (!(feasibility_tol > 0.0)) throw ConfigError("feasibility_tol must be positive");

  const std::size_t m = constraints.size();
  const double w = 1.0 / static_cast<double>(m);
  std::vector<Vector> v;
  for (const auto& c : constraints) v.push_back(Vector::Zero(c.op.dim_out()));
  auto primal_point = [&](const std::vector<Vector>& duals) {
    Vector x = z;
    for (std::size_t i = 0; i < m; ++i) x -= w * constraints[i].op.adjoint(duals[i]);
    return x;
  };

  ProjectionResult result;
  Vector x = primal_point(v);
  Vector previous_x;
  StagnationRule stagnation(config.tol);
  const std::vector<double> weights(m, w);
  std::vector<Vector> previous_v;
  std::size_t stalled = 0;
  std::size_t n = 0;
  std::vector<Vector> y(m);

  for (;; ++n) {
    double residual = 0.0;
    ExtendedReal primal = ExtendedReal::finite(0.5 * (x - z).squaredNorm());
    ExtendedReal dual = ExtendedReal::finite(0.5 * x.squaredNorm());
    for (std::size_t i = 0; i < m; ++i) {
      const auto& c = constraints[i];
      y[i] = c.op.apply(x) - c.shift;
      const double dist = c.set.distance(y[i]);
      residual = std::max(residual, dist);
      if (!c.set.contains(y[i])) primal = ExtendedReal::infinity();
      dual += w * (c.set.support(v[i]) + ExtendedReal::finite(v[i].dot(c.shift)));
    }
    std::optional<double> step_norm;
    if (n > 0) step_norm = (x - previous_x).norm();
    const double gamma = schedule.gamma(n);
    const double lambda = schedule.lambda(n);
    if (config.record_trace) result.trace.append({n, primal, dual, step_norm, gamma, lambda});

    if (step_norm) {
      stagnation.update(*step_norm, x.norm(), weighted_dual_norm(v, previous_v, weights), weighted_dual_norm(v, {}, weights));
    }
    result.feasibility_residual = residual;
    if (stagnation.satisfied() && residual <= feasibility_tol) {
      result.status = ProjectionStatus::converged;
      break;
    }
    // with an empty intersection x settles while the duals drift off linearly
    if (step_norm && *step_norm <= config.tol * (1.0 + x.norm()) && residual > feasibility_tol) {
      if (++stalled >= config.stagnation_window) {
        result.status = ProjectionStatus::infeasible_stagnation;
        break;
      }
    } else {
      stalled = 0;
    }
    if (n >= config.max_iter) {
      result.status = ProjectionStatus::max_iterations;
      break;
    }

    previous_x = x;
    previous_v = v;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& c = constraints[i];
      Vector inner_step = y[i] - c.set.project(v[i] / gamma + y[i]);
      if (config.errors) inner_step -= config.errors->at(i, n, c.op.dim_out());
      v[i] += gamma * lambda * inner_step;
    }
    x = primal_point(v);
  }

  result.solution.x = std::move(x);
  result.solution.v = std::move(v);
  result.solution.iterations = n;
  result.solution.converged = result.status == ProjectionStatus::converged;
  return result;
}

}  // namespace dualprox
