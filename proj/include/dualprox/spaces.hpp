#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dualprox {

/// Coordinates of a point in a finite-dimensional Euclidean space.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr std::uint64_t kDefaultSeed = 0x5eed2010u;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws DimensionError when `a` and `b` live in spaces of different dimension.
void require_same_dim(const Vector& a, const Vector& b, std::string_view what);
void require_dim(const Vector& a, Index expected, std::string_view what);
void require_finite(const Vector& a, std::string_view what);

double inner(const Vector& x, const Vector& y);

/// Convex weights (omega_1, ..., omega_m): each in (0,1], summing to one.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> weights);
  static WeightVector uniform(std::size_t m);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& values() const { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Bounded linear map between Euclidean spaces, carried with its adjoint and an
/// upper bound on its spectral norm. Copies share the underlying maps.
///
/// When no explicit bound is supplied the bound is computed on first request by
/// power iteration (see estimate_operator_norm) and cached.
class LinearOperator {
 public:
  using Map = std::function<Vector(const Vector&)>;

  LinearOperator(Index dim_in, Index dim_out, Map apply, Map adjoint,
                 std::optional<double> norm_upper_bound = std::nullopt,
                 std::string name = "operator");

  Index dim_in() const;
  Index dim_out() const;
  const std::string& name() const;

  Vector apply(const Vector& x) const;
  Vector adjoint(const Vector& u) const;
  Vector operator()(const Vector& x) const { return apply(x); }

  /// Upper bound on ||L||; lazily estimated when not given at construction.
  double norm_upper_bound() const;
  bool has_explicit_bound() const;

  /// Same maps, different certified bound.
  LinearOperator with_norm_bound(double bound) const;

 private:
  struct Shared;
  std::shared_ptr<const Shared> impl_;
};

struct LinearOperator::Shared {
  Index dim_in;
  Index dim_out;
  Map apply;
  Map adjoint;
  std::optional<double> explicit_bound;
  std::string name;
  mutable std::once_flag bound_once;
  mutable double lazy_bound = 0.0;
};

inline Index LinearOperator::dim_in() const { return impl_->dim_in; }
inline Index LinearOperator::dim_out() const { return impl_->dim_out; }
inline const std::string& LinearOperator::name() const { return impl_->name; }
inline bool LinearOperator::has_explicit_bound() const { return impl_->explicit_bound.has_value(); }

LinearOperator identity_operator(Index n);
LinearOperator scalar_operator(Index n, double factor);
LinearOperator diagonal_operator(const Vector& diagonal);
LinearOperator matrix_operator(Matrix m);
/// x -> (L_1 x, ..., L_k x); bound sqrt(sum ||L_i||^2).
LinearOperator stacked_operator(std::vector<LinearOperator> blocks);
/// (x_1, ..., x_k) -> (L_1 x_1, ..., L_k x_k); bound max ||L_i||.
LinearOperator block_diagonal_operator(std::vector<LinearOperator> blocks);

/// Materializes L column by column. Intended for small operators.
Matrix to_dense(const LinearOperator& op);

class NormEstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNormSafetyFactor = 1.01;

/// Power iteration on L*L from a seeded random start. Returns the converged
/// singular value estimate multiplied by kNormSafetyFactor. Throws
/// NormEstimateError when the relative change does not fall below `tol`
/// within `max_iter` iterations.
double estimate_operator_norm(const LinearOperator& op, double tol = 1e-8,
                              int max_iter = 200000,
                              std::uint64_t seed = kDefaultSeed);

/// Max of the per-block bounds: dominates the norm of (x_i) -> (L_i x_i) in
/// any product space weighted identically on both sides.
double product_norm_bound(std::span<const LinearOperator> ops);

struct AdjointReport {
  double max_relative_discrepancy = 0.0;
  int trials = 0;
  bool passed = true;
};

AdjointReport check_adjoint(const LinearOperator& op, int trials,
                            std::uint64_t seed = kDefaultSeed,
                            double threshold = 1e-10);

}  // namespace dualprox
