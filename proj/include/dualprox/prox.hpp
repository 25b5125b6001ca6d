#pragma once

#include "dualprox/convex_set.hpp"
#include "dualprox/extended_real.hpp"
#include "dualprox/spaces.hpp"

#include <memory>
#include <optional>
#include <string>

namespace dualprox {

enum class DomainKind { full_space, set_with_interior_point, other };

enum class FunctionKind { zero, norm1, norm2, elastic_net, mixed_norm21, indicator };

/// A function in Gamma_0 of a Euclidean space given by an evaluator and its
/// exact proximity operator prox_{gamma g}(y) = argmin g(x) + ||x - y||^2 / (2 gamma).
///
/// Values are immutable and cheap to copy. Members are built by the catalog
/// functions below (norm1(), make_indicator(), ...).
class ProxFunction {
 public:
  /// Implementation hook for catalog members.
  class Model {
   public:
    virtual ~Model() = default;
    virtual FunctionKind kind() const = 0;
    virtual std::string name() const = 0;
    /// Fixed ambient dimension, or nullopt for members defined in every dimension.
    virtual std::optional<Index> dim() const { return std::nullopt; }
    virtual ExtendedReal eval(const Vector& y) const = 0;
    virtual Vector prox(double gamma, const Vector& y) const = 0;
    /// Closed-form g*(v) when available.
    virtual std::optional<ExtendedReal> eval_conjugate(const Vector& v) const = 0;
    /// Direct formula for prox_{gamma g*}, used instead of Moreau's route when present.
    virtual std::optional<Vector> direct_prox_conjugate(double /*gamma*/, const Vector& /*v*/) const {
      return std::nullopt;
    }
    virtual const ConvexSetDescriptor* domain_set() const { return nullptr; }
    /// Lipschitz constant of g on the ball of radius `radius` about the origin;
    /// nullopt when g is not finite there.
    virtual std::optional<double> lipschitz_bound(Index dim, double radius) const = 0;
  };

  explicit ProxFunction(std::shared_ptr<const Model> model);

  FunctionKind kind() const { return model_->kind(); }
  std::string name() const { return model_->name(); }
  std::optional<Index> dim() const { return model_->dim(); }

  ExtendedReal eval(const Vector& y) const;
  Vector prox(double gamma, const Vector& y) const;

  /// prox_{gamma g*}(v). Routed through Moreau's decomposition
  /// v - gamma prox_{g/gamma}(v/gamma) except for members whose conjugate is a
  /// ball indicator, which project directly.
  Vector prox_conjugate(double gamma, const Vector& v) const;
  /// Always the Moreau route; used to cross-check the direct projections.
  Vector prox_conjugate_moreau(double gamma, const Vector& v) const;

  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const;

  DomainKind domain_kind() const;
  /// The set whose indicator this is, for indicator members.
  const ConvexSetDescriptor* domain_set() const { return model_->domain_set(); }
  /// For set_with_interior_point domains.
  std::optional<Vector> domain_interior_point() const;
  std::optional<double> lipschitz_bound(Index dim, double radius) const {
    return model_->lipschitz_bound(dim, radius);
  }

  const Model& model() const { return *model_; }

 private:
  std::shared_ptr<const Model> model_;
};

/// g = 0.
ProxFunction zero_function();
/// g = ||.||_1, prox is componentwise soft thresholding.
ProxFunction norm1();
/// g = ||.||_2, prox is block soft thresholding (1 - gamma/||y||)_+ y.
ProxFunction norm2();
/// g = alpha ||.||_1 + beta ||.||_2^2, prox xi -> soft(xi, gamma alpha) / (1 + 2 gamma beta).
ProxFunction elastic_net(double alpha, double beta);
/// Sum of Euclidean norms of `groups` blocks of size `group_size`, stored
/// plane-major: component j of block k sits at index j * groups + k.
ProxFunction mixed_norm21(Index groups, Index group_size);
/// Indicator of a closed convex set; prox is the projection for every gamma.
ProxFunction make_indicator(ConvexSetDescriptor set);

/// Parameters of an elastic-net member.
struct ElasticNetParams {
  double alpha;
  double beta;
};
std::optional<ElasticNetParams> elastic_net_params(const ProxFunction& g);

// Scalar building blocks, exposed for the imaging solver and tests.
double soft_threshold(double x, double threshold);
Vector soft_threshold(const Vector& x, double threshold);

}  // namespace dualprox
