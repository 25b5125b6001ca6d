#pragma once

#include "dualprox/convex_set.hpp"
#include "dualprox/solver.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dualprox {

/// The constraint L x in r + C.
struct CompositeConstraint {
  LinearOperator op;
  Vector shift;
  ConvexSetDescriptor set;
};

/// Deterministic summable errors: ||c_{i,n}|| = scale / (n + 1)^exponent with exponent > 1,
/// in a pseudo-random direction fixed by (seed, i, n).
struct SummableErrorSchedule {
  double scale = 0.0;
  double exponent = 2.0;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
  Vector at(std::size_t term, std::size_t n, Index dim) const;
};

struct ProjectionConfig {
  std::optional<double> epsilon;
  Schedule gamma;
  Schedule lambda;
  std::size_t max_iter = 100000;
  double tol = 1e-8;
  /// Defaults to 10 * tol.
  std::optional<double> feasibility_tol;
  std::optional<SummableErrorSchedule> errors;
  /// Point used by the interior-point qualification test.
  std::optional<Vector> slater_point;
  /// Skip the qualification requirement.
  bool assume_qualified = false;
  bool record_trace = true;
  /// Iterations the primal step may stay stagnant while infeasible before the
  /// run is flagged as infeasible-looking.
  std::size_t stagnation_window = 1000;
};

enum class ProjectionStatus { converged, max_iterations, infeasible_stagnation };

struct ProjectionResult {
  Solution solution;
  Trace trace;
  double feasibility_residual = 0.0;
  ProjectionStatus status = ProjectionStatus::max_iterations;
};

class QualificationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// max_i dist(L_i x - r_i, C_i).
double feasibility_residual(const Vector& x, const std::vector<CompositeConstraint>& constraints);

/// The same problem as a composite prox problem: g_i = indicator of C_i, omega_i = 1/m.
CompositeProxProblem as_composite_problem(const Vector& z, const std::vector<CompositeConstraint>& constraints);

/// Projection of z onto D = {x : L_i x in r_i + C_i for all i} using only the
/// projectors onto the C_i:
///
///   x_n = z - (1/m) sum_i L_i^* v_{i,n}
///   v_{i,n+1} = v_{i,n} + gamma_n lambda_n (L_i x_n - r_i - P_{C_i}(v_{i,n}/gamma_n + L_i x_n - r_i) - c_{i,n})
///
/// Requires the qualification test to pass (with the supplied point, z, or the
/// origin as candidates) unless `assume_qualified` is set; throws QualificationError otherwise.
/// A run never reports convergence with residual above the feasibility tolerance.
ProjectionResult project_intersection(const Vector& z, const std::vector<CompositeConstraint>& constraints,
                                      const ProjectionConfig& config = {});

}  // namespace dualprox
