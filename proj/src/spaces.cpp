#include "dualprox/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace dualprox {

void require_same_dim(const Vector& a, const Vector& b, std::string_view what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a.size() << " vs " << b.size() << ")";
    throw DimensionError(os.str());
  }
}

void require_dim(const Vector& a, Index expected, std::string_view what) {
  if (a.size() != expected) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << a.size();
    throw DimensionError(os.str());
  }
}

void require_finite(const Vector& a, std::string_view what) {
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

double inner(const Vector& x, const Vector& y) {
  require_same_dim(x, y, "inner");
  return x.dot(y);
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("weights: empty");
  for (double w : weights_) {
    if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("weights: each weight must lie in (0,1]");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights: sum is " << total << ", expected 1";
    throw std::invalid_argument(os.str());
  }
}

WeightVector WeightVector::uniform(std::size_t m) {
  if (m == 0) throw std::invalid_argument("weights: empty");
  return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

// ---------------------------------------------------------------------------

LinearOperator::LinearOperator(Index dim_in, Index dim_out, Map apply, Map adjoint,
                               std::optional<double> norm_upper_bound, std::string name) {
  if (dim_in <= 0 || dim_out <= 0) throw std::invalid_argument("operator dimensions must be positive");
  if (!apply || !adjoint) throw std::invalid_argument("operator requires apply and adjoint maps");
  if (norm_upper_bound && !(*norm_upper_bound >= 0.0 && std::isfinite(*norm_upper_bound))) {
    throw std::invalid_argument("operator norm bound must be finite and nonnegative");
  }
  auto s = std::make_shared<Shared>();
  s->dim_in = dim_in;
  s->dim_out = dim_out;
  s->apply = std::move(apply);
  s->adjoint = std::move(adjoint);
  s->explicit_bound = norm_upper_bound;
  s->name = std::move(name);
  impl_ = std::move(s);
}

Vector LinearOperator::apply(const Vector& x) const {
  require_dim(x, impl_->dim_in, impl_->name + " apply");
  return impl_->apply(x);
}

Vector LinearOperator::adjoint(const Vector& u) const {
  require_dim(u, impl_->dim_out, impl_->name + " adjoint");
  return impl_->adjoint(u);
}

double LinearOperator::norm_upper_bound() const {
  if (impl_->explicit_bound) return *impl_->explicit_bound;
  std::call_once(impl_->bound_once, [this] { impl_->lazy_bound = estimate_operator_norm(*this); });
  return impl_->lazy_bound;
}

LinearOperator LinearOperator::with_norm_bound(double bound) const {
  return LinearOperator(impl_->dim_in, impl_->dim_out, impl_->apply, impl_->adjoint, bound, impl_->name);
}

LinearOperator identity_operator(Index n) {
  auto id = [](const Vector& x) { return x; };
  return LinearOperator(n, n, id, id, 1.0, "identity");
}

LinearOperator scalar_operator(Index n, double factor) {
  auto scale = [factor](const Vector& x) -> Vector { return factor * x; };
  return LinearOperator(n, n, scale, scale, std::abs(factor), "scalar");
}

LinearOperator diagonal_operator(const Vector& diagonal) {
  require_finite(diagonal, "diagonal operator");
  auto scale = [diagonal](const Vector& x) -> Vector { return diagonal.cwiseProduct(x); };
  const double bound = diagonal.size() ? diagonal.cwiseAbs().maxCoeff() : 0.0;
  return LinearOperator(diagonal.size(), diagonal.size(), scale, scale, bound, "diagonal");
}

LinearOperator matrix_operator(Matrix m) {
  if (!m.allFinite()) throw std::invalid_argument("matrix operator: non-finite entry");
  auto shared = std::make_shared<const Matrix>(std::move(m));
  const Index rows = shared->rows();
  const Index cols = shared->cols();
  return LinearOperator(
      cols, rows, [shared](const Vector& x) -> Vector { return (*shared) * x; },
      [shared](const Vector& u) -> Vector { return shared->transpose() * u; }, std::nullopt, "matrix");
}

LinearOperator stacked_operator(std::vector<LinearOperator> blocks) {
  if (blocks.empty()) throw std::invalid_argument("stacked operator: no blocks");
  const Index in = blocks.front().dim_in();
  Index out = 0;
  double sq = 0.0;
  for (const auto& b : blocks) {
    if (b.dim_in() != in) throw DimensionError("stacked operator: blocks disagree on input dimension");
    out += b.dim_out();
    sq += b.norm_upper_bound() * b.norm_upper_bound();
  }
  auto shared = std::make_shared<const std::vector<LinearOperator>>(std::move(blocks));
  auto fwd = [shared, out](const Vector& x) -> Vector {
    Vector y(out);
    Index offset = 0;
    for (const auto& b : *shared) {
      y.segment(offset, b.dim_out()) = b.apply(x);
      offset += b.dim_out();
    }
    return y;
  };
  auto adj = [shared, in](const Vector& u) -> Vector {
    Vector x = Vector::Zero(in);
    Index offset = 0;
    for (const auto& b : *shared) {
      x += b.adjoint(u.segment(offset, b.dim_out()));
      offset += b.dim_out();
    }
    return x;
  };
  return LinearOperator(in, out, fwd, adj, std::sqrt(sq), "stacked");
}

LinearOperator block_diagonal_operator(std::vector<LinearOperator> blocks) {
  if (blocks.empty()) throw std::invalid_argument("block diagonal operator: no blocks");
  Index in = 0;
  Index out = 0;
  for (const auto& b : blocks) {
    in += b.dim_in();
    out += b.dim_out();
  }
  const double bound = product_norm_bound(blocks);
  auto shared = std::make_shared<const std::vector<LinearOperator>>(std::move(blocks));
  auto fwd = [shared, out](const Vector& x) -> Vector {
    Vector y(out);
    Index ix = 0, iy = 0;
    for (const auto& b : *shared) {
      y.segment(iy, b.dim_out()) = b.apply(x.segment(ix, b.dim_in()));
      ix += b.dim_in();
      iy += b.dim_out();
    }
    return y;
  };
  auto adj = [shared, in](const Vector& u) -> Vector {
    Vector x(in);
    Index ix = 0, iu = 0;
    for (const auto& b : *shared) {
      x.segment(ix, b.dim_in()) = b.adjoint(u.segment(iu, b.dim_out()));
      ix += b.dim_in();
      iu += b.dim_out();
    }
    return x;
  };
  return LinearOperator(in, out, fwd, adj, bound, "block_diagonal");
}

Matrix to_dense(const LinearOperator& op) {
  Matrix m(op.dim_out(), op.dim_in());
  Vector e = Vector::Zero(op.dim_in());
  for (Index j = 0; j < op.dim_in(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return m;
}

double estimate_operator_norm(const LinearOperator& op, double tol, int max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw std::invalid_argument("estimate_operator_norm: tol must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(op.dim_in());
  for (Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
  x.normalize();

  // ||A x_k|| with A = L*L and unit x_k is nondecreasing and bounded by lambda_max.
  double lambda = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Vector y = op.adjoint(op.apply(x));
    const double next = y.norm();
    if (next == 0.0) return 0.0;
    const bool done = k > 0 && std::abs(next - lambda) <= tol * next;
    lambda = next;
    if (done) return std::sqrt(lambda) * kNormSafetyFactor;
    x = y / next;
  }
  throw NormEstimateError("estimate_operator_norm: no convergence for '" + op.name() +
                          "'; supply an explicit norm bound");
}

double product_norm_bound(std::span<const LinearOperator> ops) {
  double bound = 0.0;
  for (const auto& op : ops) bound = std::max(bound, op.norm_upper_bound());
  return bound;
}

AdjointReport check_adjoint(const LinearOperator& op, int trials, std::uint64_t seed, double threshold) {
  if (trials < 1) throw std::invalid_argument("check_adjoint: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  AdjointReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Vector x(op.dim_in());
    Vector u(op.dim_out());
    for (Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
    for (Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
    const Vector lx = op.apply(x);
    const Vector lsu = op.adjoint(u);
    const double lhs = lx.dot(u);
    const double rhs = x.dot(lsu);
    const double scale = std::max({lx.norm() * u.norm(), x.norm() * lsu.norm(),
                                   std::numeric_limits<double>::min()});
    report.max_relative_discrepancy = std::max(report.max_relative_discrepancy, std::abs(lhs - rhs) / scale);
  }
  report.passed = report.max_relative_discrepancy <= threshold;
  return report;
}

}  // namespace dualprox
