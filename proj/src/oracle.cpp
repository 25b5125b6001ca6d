#include "dualprox/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dualprox {

std::string to_string(CertificateMethod m) {
  switch (m) {
    case CertificateMethod::grid: return "grid";
    case CertificateMethod::scalar_analysis: return "scalar_analysis";
    case CertificateMethod::closed_form: return "closed_form";
    case CertificateMethod::long_run: return "long_run";
  }
  return "unknown";
}

CertificateMethod certificate_method_from_string(const std::string& s) {
  if (s == "grid") return CertificateMethod::grid;
  if (s == "scalar_analysis") return CertificateMethod::scalar_analysis;
  if (s == "closed_form") return CertificateMethod::closed_form;
  if (s == "long_run") return CertificateMethod::long_run;
  throw std::invalid_argument("unknown certificate method '" + s + "'");
}

namespace {

// Objective evaluation kept local so the oracle shares nothing with the solver.
ExtendedReal objective(const CompositeProxProblem& p, const Vector& x) {
  ExtendedReal total = ExtendedReal::finite(0.5 * (x - p.z).squaredNorm());
  for (const auto& t : p.terms) {
    total += t.weight * t.function.eval(t.op.apply(x) - t.shift);
    if (total.is_infinite()) break;
  }
  return total;
}

bool is_trivially_zero(const ProxFunction& g) {
  if (g.kind() == FunctionKind::zero) return true;
  if (const auto* set = g.domain_set()) {
    if (const auto* box = std::get_if<ConvexSetDescriptor::Box>(&set->shape())) {
      return (box->lo.array() == -std::numeric_limits<double>::infinity()).all() &&
             (box->hi.array() == std::numeric_limits<double>::infinity()).all();
    }
  }
  return false;
}

// Lipschitz constant of the objective on the box [lo, hi].
double box_lipschitz(const CompositeProxProblem& p, const Vector& lo, const Vector& hi) {
  const Vector far = lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
  const double x_radius = far.norm();
  const Vector far_z = (lo - p.z).cwiseAbs().cwiseMax((hi - p.z).cwiseAbs());
  double lam = far_z.norm();
  for (const auto& t : p.terms) {
    if (t.function.kind() == FunctionKind::indicator) continue;
    const double opn = t.op.norm_upper_bound();
    auto lip = t.function.lipschitz_bound(t.op.dim_out(), opn * x_radius + t.shift.norm());
    if (!lip) throw std::invalid_argument("grid oracle: term '" + t.function.name() + "' has no Lipschitz bound");
    lam += t.weight * *lip * opn;
  }
  return lam;
}

struct GridLevel {
  Vector best;
  ExtendedReal value = ExtendedReal::infinity();
  Vector spacing;
};

GridLevel sweep(const CompositeProxProblem& p, const Vector& lo, const Vector& hi, double resolution,
                std::size_t max_points) {
  const Index d = lo.size();
  const auto per_dim_cap = static_cast<Index>(std::floor(std::pow(static_cast<double>(max_points), 1.0 / d)));
  std::vector<Index> counts(d);
  GridLevel level;
  level.spacing.resize(d);
  for (Index k = 0; k < d; ++k) {
    const double width = hi[k] - lo[k];
    const auto wanted = static_cast<Index>(std::ceil(width / resolution)) + 1;
    counts[k] = std::max<Index>(2, std::min(per_dim_cap, wanted));
    level.spacing[k] = width / static_cast<double>(counts[k] - 1);
  }
  // odometer over the grid in lexicographic order; strict < keeps the first minimizer
  std::vector<Index> idx(d, 0);
  Vector x(d);
  for (;;) {
    for (Index k = 0; k < d; ++k) x[k] = idx[k] + 1 == counts[k] ? hi[k] : lo[k] + idx[k] * level.spacing[k];
    const ExtendedReal f = objective(p, x);
    if (f < level.value) {
      level.value = f;
      level.best = x;
    }
    Index k = d - 1;
    while (k >= 0 && ++idx[k] == counts[k]) idx[k--] = 0;
    if (k < 0) break;
  }
  return level;
}

}  // namespace

Certificate grid_oracle(const CompositeProxProblem& problem, const GridOptions& options) {
  problem.validate();
  const Index d = problem.dim();
  if (d < 1 || d > 3) throw std::invalid_argument("grid oracle: dimension must be 1, 2 or 3");
  if (!(options.resolution > 0.0)) throw std::invalid_argument("grid oracle: resolution must be positive");

  if (std::all_of(problem.terms.begin(), problem.terms.end(),
                  [](const CompositeTerm& t) { return is_trivially_zero(t.function); })) {
    // prox of the zero function is the identity
    return {problem.z, CertificateMethod::closed_form, 1e-15 * (1.0 + problem.z.norm()), {}};
  }

  const Vector search_lo = options.lo.size() ? options.lo : Vector::Constant(d, -5.0);
  const Vector search_hi = options.hi.size() ? options.hi : Vector::Constant(d, 5.0);
  require_dim(search_lo, d, "grid lower bounds");
  require_dim(search_hi, d, "grid upper bounds");
  if ((search_hi.array() <= search_lo.array()).any()) throw std::invalid_argument("grid oracle: empty search box");

  Vector lo = search_lo;
  Vector hi = search_hi;
  GridLevel level;
  double radius = 0.0;
  for (int pass = 0; pass <= options.refinements; ++pass) {
    level = sweep(problem, lo, hi, options.resolution, options.max_points);
    if (level.value.is_infinite()) throw CertificationError("grid oracle: no grid point has a finite objective");
    for (Index k = 0; k < d; ++k) {
      if (level.best[k] <= search_lo[k] || level.best[k] >= search_hi[k]) {
        const Vector mid = 0.5 * (search_lo + search_hi);
        const Vector half = search_hi - search_lo;
        std::ostringstream msg;
        msg << "grid oracle: minimizer on the search box boundary (coordinate " << k << ")";
        throw GridBoundaryError(msg.str(), mid - half, mid + half);
      }
    }
    radius = std::sqrt(box_lipschitz(problem, lo, hi) * level.spacing.norm());
    if (level.spacing.maxCoeff() <= options.resolution) break;
    const Vector next_lo = (level.best.array() - radius).max(search_lo.array()).matrix();
    const Vector next_hi = (level.best.array() + radius).min(search_hi.array()).matrix();
    if (((next_hi - next_lo).array() >= (hi - lo).array()).all()) break;
    lo = next_lo;
    hi = next_hi;
  }
  return {level.best, CertificateMethod::grid, radius, {}};
}

double ScalarObjective::eval(double x) const {
  if (x < lo || x > hi) return std::numeric_limits<double>::infinity();
  double f = 0.5 * (x - z) * (x - z);
  for (const auto& t : abs_terms) f += t.w * std::abs(t.a * x - t.b);
  for (const auto& t : quad_terms) f += t.q * (t.a * x - t.b) * (t.a * x - t.b);
  return f;
}

Certificate scalar_oracle(const ScalarObjective& f) {
  if (!(f.lo <= f.hi)) throw CertificationError("scalar oracle: empty feasible interval");
  // smooth part: x - z + sum 2 q a (a x - b) = A x + B0
  double A = 1.0;
  double B0 = -f.z;
  for (const auto& t : f.quad_terms) {
    A += 2.0 * t.q * t.a * t.a;
    B0 -= 2.0 * t.q * t.a * t.b;
  }
  std::vector<double> breaks;
  for (const auto& t : f.abs_terms) {
    if (t.a != 0.0 && t.w != 0.0) breaks.push_back(t.b / t.a);
  }
  if (std::isfinite(f.lo)) breaks.push_back(f.lo);
  if (std::isfinite(f.hi)) breaks.push_back(f.hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // slope of the absolute-value part on the side `side` (+1 / -1) of x
  auto abs_slope = [&](double x, int side) {
    double s = 0.0;
    for (const auto& t : f.abs_terms) {
      if (t.a == 0.0) continue;
      // compare against the breakpoint itself so x == b/a is recognised exactly
      const double bp = t.b / t.a;
      const int dir = x > bp ? 1 : (x < bp ? -1 : side);
      s += t.w * std::abs(t.a) * dir;
    }
    return s;
  };
  auto done = [](double x) {
    return Certificate{Vector::Constant(1, x), CertificateMethod::scalar_analysis, 1e-12 * (1.0 + std::abs(x)), {}};
  };

  // open pieces between consecutive breakpoints, clipped to [lo, hi]
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> edges{-inf};
  edges.insert(edges.end(), breaks.begin(), breaks.end());
  edges.push_back(inf);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = std::max(edges[i], f.lo);
    const double b = std::min(edges[i + 1], f.hi);
    if (!(a < b)) continue;
    double probe;
    if (std::isfinite(a) && std::isfinite(b)) probe = 0.5 * (a + b);
    else if (std::isfinite(a)) probe = a + 1.0;
    else if (std::isfinite(b)) probe = b - 1.0;
    else probe = 0.0;
    const double x = -(B0 + abs_slope(probe, 1)) / A;
    if (x > a && x < b) return done(x);
  }
  for (double x : breaks) {
    if (x < f.lo || x > f.hi) continue;
    const double left = x <= f.lo ? -inf : A * x + B0 + abs_slope(x, -1);
    const double right = x >= f.hi ? inf : A * x + B0 + abs_slope(x, 1);
    if (left <= 0.0 && right >= 0.0) return done(x);
  }
  // rounding can leave a stationary point just outside its piece: take the best candidate
  std::vector<double> candidates = breaks;
  candidates.push_back(std::clamp(-B0 / A, f.lo, f.hi));
  double best = candidates.front();
  for (double x : candidates) {
    if (x >= f.lo && x <= f.hi && f.eval(x) < f.eval(best)) best = x;
  }
  return done(best);
}

namespace {

// lo <= a x - b <= hi as an interval for x, intersected into [xlo, xhi]
void intersect_row_interval(double a, double b, double lo, double hi, double& xlo, double& xhi) {
  if (a == 0.0) {
    if (-b < lo || -b > hi) throw CertificationError("scalar oracle: constraint infeasible");
    return;
  }
  double l = (lo + b) / a;
  double h = (hi + b) / a;
  if (a < 0.0) std::swap(l, h);
  xlo = std::max(xlo, l);
  xhi = std::min(xhi, h);
}

}  // namespace

std::optional<std::vector<ScalarObjective>> scalar_decomposition(const CompositeProxProblem& problem) {
  problem.validate();
  const Index d = problem.dim();
  std::vector<ScalarObjective> parts(d);
  for (Index k = 0; k < d; ++k) parts[k].z = problem.z[k];
  const double inf = std::numeric_limits<double>::infinity();

  for (const auto& t : problem.terms) {
    const Matrix M = to_dense(t.op);
    const Index rows = M.rows();
    std::vector<Index> col(rows, -1);
    for (Index j = 0; j < rows; ++j) {
      for (Index k = 0; k < d; ++k) {
        if (M(j, k) == 0.0) continue;
        if (col[j] >= 0) return std::nullopt;
        col[j] = k;
      }
    }
    auto coeff = [&](Index j) { return col[j] >= 0 ? M(j, col[j]) : 0.0; };
    auto target = [&](Index j) -> ScalarObjective& { return parts[col[j] >= 0 ? col[j] : 0]; };

    switch (t.function.kind()) {
      case FunctionKind::zero:
        break;
      case FunctionKind::norm1:
        for (Index j = 0; j < rows; ++j) target(j).abs_terms.push_back({t.weight, coeff(j), t.shift[j]});
        break;
      case FunctionKind::elastic_net: {
        const auto en = *elastic_net_params(t.function);
        for (Index j = 0; j < rows; ++j) {
          target(j).abs_terms.push_back({t.weight * en.alpha, coeff(j), t.shift[j]});
          target(j).quad_terms.push_back({t.weight * en.beta, coeff(j), t.shift[j]});
        }
        break;
      }
      case FunctionKind::norm2:
        if (rows != 1) return std::nullopt;
        target(0).abs_terms.push_back({t.weight, coeff(0), t.shift[0]});
        break;
      case FunctionKind::indicator: {
        const auto& shape = t.function.domain_set()->shape();
        if (const auto* box = std::get_if<ConvexSetDescriptor::Box>(&shape)) {
          for (Index j = 0; j < rows; ++j) {
            intersect_row_interval(coeff(j), t.shift[j], box->lo[j], box->hi[j], target(j).lo, target(j).hi);
          }
        } else if (const auto* ball = std::get_if<ConvexSetDescriptor::Ball>(&shape)) {
          if (rows != 1) return std::nullopt;
          intersect_row_interval(coeff(0), t.shift[0], ball->center[0] - ball->radius, ball->center[0] + ball->radius,
                                 target(0).lo, target(0).hi);
        } else if (const auto* hs = std::get_if<ConvexSetDescriptor::Halfspace>(&shape)) {
          if (rows != 1) return std::nullopt;
          const double n = hs->normal[0];
          if (n == 0.0) {
            if (hs->offset < 0.0) throw CertificationError("scalar oracle: empty halfspace");
          } else if (n > 0.0) {
            intersect_row_interval(coeff(0), t.shift[0], -inf, hs->offset / n, target(0).lo, target(0).hi);
          } else {
            intersect_row_interval(coeff(0), t.shift[0], hs->offset / n, inf, target(0).lo, target(0).hi);
          }
        } else {
          return std::nullopt;
        }
        break;
      }
      case FunctionKind::mixed_norm21:
        return std::nullopt;
    }
  }
  return parts;
}

std::optional<Certificate> scalar_oracle_for_problem(const CompositeProxProblem& problem) {
  auto parts = scalar_decomposition(problem);
  if (!parts) return std::nullopt;
  Certificate c;
  c.method = CertificateMethod::scalar_analysis;
  c.reference_x.resize(problem.dim());
  double r2 = 0.0;
  for (std::size_t k = 0; k < parts->size(); ++k) {
    const Certificate one = scalar_oracle((*parts)[k]);
    c.reference_x[static_cast<Index>(k)] = one.reference_x[0];
    r2 += one.guaranteed_radius * one.guaranteed_radius;
  }
  c.guaranteed_radius = std::sqrt(r2);
  return c;
}

Certificate long_run_reference(const CompositeProxProblem& problem, const LongRunOptions& options) {
  problem.validate();
  if (problem.dim() <= 3 && !options.allow_low_dimension) {
    throw CertificationError("long-run reference: dimension <= 3 is certified by the grid or scalar oracle");
  }
  SolverConfig base;
  base.tol = options.tol;
  base.max_iter = options.max_iter;
  base.record_trace = false;
  const auto bounds = term_norm_bounds(problem, base);
  const double rho = StepSchedule::resolve(bounds, base).rho();

  SolverConfig slow = base;
  slow.gamma = constant_schedule(0.5 * rho);
  SolverConfig fast = base;
  fast.gamma = constant_schedule(1.5 * rho);
  const SolveResult a = solve(problem, slow);
  const SolveResult b = solve(problem, fast);

  const double gap = (a.solution.x - b.solution.x).norm();
  const double allowed = options.agreement * std::max(1.0, a.solution.x.norm());
  if (!(gap <= allowed)) {
    std::ostringstream msg;
    msg << "long-run reference: schedules disagree by " << gap << " (allowed " << allowed << ")";
    throw CertificationError(msg.str());
  }
  return {a.solution.x, CertificateMethod::long_run, allowed, a.solution.v};
}

bool certificates_agree(const Certificate& a, const Certificate& b) {
  if (a.reference_x.size() != b.reference_x.size()) return false;
  return (a.reference_x - b.reference_x).norm() <= a.guaranteed_radius + b.guaranteed_radius;
}

CertificationReport certify(const CompositeProxProblem& problem, std::vector<Certificate> closed_forms,
                            const GridOptions& grid) {
  CertificationReport report;
  for (auto& c : closed_forms) {
    if (c.method != CertificateMethod::closed_form) throw std::invalid_argument("certify: expected closed-form certificates");
    report.certificates.push_back(std::move(c));
  }
  if (auto s = scalar_oracle_for_problem(problem)) report.certificates.push_back(std::move(*s));
  if (problem.dim() <= 3) {
    GridOptions opts = grid;
    for (int attempt = 0;; ++attempt) {
      try {
        report.certificates.push_back(grid_oracle(problem, opts));
        break;
      } catch (const GridBoundaryError& e) {
        if (attempt >= 3) throw;
        opts.lo = e.widened_lo;
        opts.hi = e.widened_hi;
      }
    }
  }
  std::ostringstream detail;
  for (std::size_t i = 0; i < report.certificates.size(); ++i) {
    for (std::size_t j = i + 1; j < report.certificates.size(); ++j) {
      const auto& a = report.certificates[i];
      const auto& b = report.certificates[j];
      if (!certificates_agree(a, b)) {
        report.consistent = false;
        detail << to_string(a.method) << " vs " << to_string(b.method) << ": distance "
               << (a.reference_x - b.reference_x).norm() << " exceeds " << a.guaranteed_radius + b.guaranteed_radius
               << "; ";
      }
    }
  }
  report.detail = detail.str();
  return report;
}

}  // namespace dualprox
