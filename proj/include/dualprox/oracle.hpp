#pragma once

#include "dualprox/solver.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualprox {

enum class CertificateMethod { grid, scalar_analysis, closed_form, long_run };

std::string to_string(CertificateMethod m);
CertificateMethod certificate_method_from_string(const std::string& s);

/// Reference solution with a bound on its distance to the exact minimizer.
struct Certificate {
  Vector reference_x;
  CertificateMethod method = CertificateMethod::closed_form;
  double guaranteed_radius = 0.0;
  /// Only filled by long_run_reference.
  std::vector<Vector> reference_duals;
};

class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The grid argmin touched the search box; retry with `widened_lo/hi`.
class GridBoundaryError : public CertificationError {
 public:
  GridBoundaryError(const std::string& what, Vector lo, Vector hi)
      : CertificationError(what), widened_lo(std::move(lo)), widened_hi(std::move(hi)) {}
  Vector widened_lo;
  Vector widened_hi;
};

struct GridOptions {
  /// Search box; empty means [-5, 5]^d.
  Vector lo;
  Vector hi;
  /// Target spacing of the finest level.
  double resolution = 1e-3;
  /// Refinement passes after the coarse sweep.
  int refinements = 1;
  /// Cap on grid points per level.
  std::size_t max_points = 400000;
};

/// Exhaustive minimization over a box grid, then refinement around the incumbent.
///
/// With F the objective, Lam a Lipschitz constant of F on the box and h the final
/// spacing, the grid point q nearest x* has F(q) <= F(x*) + Lam h sqrt(d) / 2, and
/// 1-strong convexity gives F(x_best) >= F(x*) + |x_best - x*|^2 / 2, so
///   |x_best - x*| <= sqrt(Lam h sqrt(d)).
/// Indicator terms contribute nothing to Lam; for them the bound additionally
/// assumes that q is feasible (a feasible grid point sits next to x*).
/// Throws std::invalid_argument for d > 3 or terms without a Lipschitz bound,
/// GridBoundaryError when the argmin lies on the search box boundary.
Certificate grid_oracle(const CompositeProxProblem& problem, const GridOptions& options = {});

/// 1-D objective  (x - z)^2 / 2 + sum w |a x - b| + sum q (a x - b)^2  on [lo, hi].
struct ScalarObjective {
  struct Abs {
    double w, a, b;
  };
  struct Quad {
    double q, a, b;
  };
  double z = 0.0;
  std::vector<Abs> abs_terms;
  std::vector<Quad> quad_terms;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  double eval(double x) const;
};

/// Exact minimizer: stationarity on every piece between breakpoints, then
/// subgradient checks at the breakpoints. Throws CertificationError on an empty interval.
Certificate scalar_oracle(const ScalarObjective& f);

/// Splits the problem into independent 1-D objectives when every row of every
/// L_i touches a single coordinate and every g_i acts separably on rows
/// (zero, norm1, elastic net, boxes; norms, balls and halfspaces in one
/// dimension). nullopt otherwise.
std::optional<std::vector<ScalarObjective>> scalar_decomposition(const CompositeProxProblem& problem);
std::optional<Certificate> scalar_oracle_for_problem(const CompositeProxProblem& problem);

struct LongRunOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1000000;
  /// Required agreement, relative to max(1, |x|).
  double agreement = 1e-8;
  /// Grid and scalar certificates take precedence up to dimension 3.
  bool allow_low_dimension = false;
};

/// Runs the splitting solver with gamma = rho/2 and gamma = 3 rho/2 and accepts
/// the result only when both runs agree. The radius is the agreement threshold.
Certificate long_run_reference(const CompositeProxProblem& problem, const LongRunOptions& options = {});

/// |a.x - b.x| <= a.radius + b.radius.
bool certificates_agree(const Certificate& a, const Certificate& b);

struct CertificationReport {
  std::vector<Certificate> certificates;
  /// Every pair agrees within combined radii.
  bool consistent = true;
  std::string detail;
};

/// Collects every applicable low-dimensional certificate: the supplied closed
/// forms, scalar analysis when the problem decomposes, and the grid (retried
/// on widened boxes) for dim <= 3. Cross-checks them pairwise.
CertificationReport certify(const CompositeProxProblem& problem, std::vector<Certificate> closed_forms,
                            const GridOptions& grid = {});

}  // namespace dualprox
