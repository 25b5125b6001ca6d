#include "dualprox/prox.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dualprox {

double soft_threshold(double x, double threshold) {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

Vector soft_threshold(const Vector& x, double threshold) {
  return x.unaryExpr([threshold](double v) { return soft_threshold(v, threshold); });
}

namespace {

void require_positive_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("prox: gamma must be positive");
}

Vector project_unit_ball(const Vector& v) {
  const double n = v.norm();
  return n <= 1.0 ? v : Vector(v / n);
}

class ZeroModel final : public ProxFunction::Model {
 public:
  FunctionKind kind() const override { return FunctionKind::zero; }
  std::string name() const override { return "zero"; }
  ExtendedReal eval(const Vector&) const override { return ExtendedReal::finite(0.0); }
  Vector prox(double, const Vector& y) const override { return y; }
  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const override {
    // conjugate of 0 is the indicator of {0}
    return v.norm() <= kMembershipTolerance ? ExtendedReal::finite(0.0) : ExtendedReal::infinity();
  }
  std::optional<double> lipschitz_bound(Index, double) const override { return 0.0; }
};

class Norm1Model final : public ProxFunction::Model {
 public:
  FunctionKind kind() const override { return FunctionKind::norm1; }
  std::string name() const override { return "norm1"; }
  ExtendedReal eval(const Vector& y) const override { return ExtendedReal::finite(y.lpNorm<1>()); }
  Vector prox(double gamma, const Vector& y) const override { return soft_threshold(y, gamma); }
  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const override {
    // indicator of the sup-norm unit ball
    if (v.size() == 0) return ExtendedReal::finite(0.0);
    return v.lpNorm<Eigen::Infinity>() <= 1.0 + kMembershipTolerance ? ExtendedReal::finite(0.0)
                                                                      : ExtendedReal::infinity();
  }
  std::optional<double> lipschitz_bound(Index dim, double) const override {
    return std::sqrt(static_cast<double>(dim));
  }
};

class Norm2Model final : public ProxFunction::Model {
 public:
  FunctionKind kind() const override { return FunctionKind::norm2; }
  std::string name() const override { return "norm2"; }
  ExtendedReal eval(const Vector& y) const override { return ExtendedReal::finite(y.norm()); }
  Vector prox(double gamma, const Vector& y) const override {
    const double n = y.norm();
    if (n <= gamma) return Vector::Zero(y.size());
    return (1.0 - gamma / n) * y;
  }
  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const override {
    return v.norm() <= 1.0 + kMembershipTolerance ? ExtendedReal::finite(0.0) : ExtendedReal::infinity();
  }
  std::optional<Vector> direct_prox_conjugate(double, const Vector& v) const override {
    return project_unit_ball(v);
  }
  std::optional<double> lipschitz_bound(Index, double) const override { return 1.0; }
};

class ElasticNetModel final : public ProxFunction::Model {
 public:
  ElasticNetModel(double alpha, double beta) : alpha_(alpha), beta_(beta) {}
  FunctionKind kind() const override { return FunctionKind::elastic_net; }
  std::string name() const override {
    std::ostringstream os;
    os << "elastic_net(" << alpha_ << "," << beta_ << ")";
    return os.str();
  }
  ExtendedReal eval(const Vector& y) const override {
    return ExtendedReal::finite(alpha_ * y.lpNorm<1>() + beta_ * y.squaredNorm());
  }
  Vector prox(double gamma, const Vector& y) const override {
    return soft_threshold(y, gamma * alpha_) / (1.0 + 2.0 * gamma * beta_);
  }
  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const override {
    // phi*(u) = (|u| - alpha)_+^2 / (4 beta), componentwise
    double s = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
      const double excess = std::max(0.0, std::abs(v[i]) - alpha_);
      s += excess * excess;
    }
    return ExtendedReal::finite(s / (4.0 * beta_));
  }
  std::optional<double> lipschitz_bound(Index dim, double radius) const override {
    return alpha_ * std::sqrt(static_cast<double>(dim)) + 2.0 * beta_ * radius;
  }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_;
  double beta_;
};

class MixedNorm21Model final : public ProxFunction::Model {
 public:
  MixedNorm21Model(Index groups, Index group_size) : groups_(groups), size_(group_size) {}
  FunctionKind kind() const override { return FunctionKind::mixed_norm21; }
  std::string name() const override { return "mixed_norm21"; }
  std::optional<Index> dim() const override { return groups_ * size_; }

  ExtendedReal eval(const Vector& y) const override {
    double s = 0.0;
    for (Index k = 0; k < groups_; ++k) s += group_norm(y, k);
    return ExtendedReal::finite(s);
  }
  Vector prox(double gamma, const Vector& y) const override {
    Vector out(y.size());
    for (Index k = 0; k < groups_; ++k) {
      const double n = group_norm(y, k);
      const double f = n <= gamma ? 0.0 : 1.0 - gamma / n;
      for (Index j = 0; j < size_; ++j) out[j * groups_ + k] = f * y[j * groups_ + k];
    }
    return out;
  }
  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const override {
    for (Index k = 0; k < groups_; ++k) {
      if (group_norm(v, k) > 1.0 + kMembershipTolerance) return ExtendedReal::infinity();
    }
    return ExtendedReal::finite(0.0);
  }
  std::optional<Vector> direct_prox_conjugate(double, const Vector& v) const override {
    Vector out(v.size());
    for (Index k = 0; k < groups_; ++k) {
      const double f = 1.0 / std::max(1.0, group_norm(v, k));
      for (Index j = 0; j < size_; ++j) out[j * groups_ + k] = f * v[j * groups_ + k];
    }
    return out;
  }
  std::optional<double> lipschitz_bound(Index, double) const override { return 1.0; }

 private:
  double group_norm(const Vector& y, Index k) const {
    double s = 0.0;
    for (Index j = 0; j < size_; ++j) s += y[j * groups_ + k] * y[j * groups_ + k];
    return std::sqrt(s);
  }
  Index groups_;
  Index size_;
};

class IndicatorModel final : public ProxFunction::Model {
 public:
  explicit IndicatorModel(ConvexSetDescriptor set) : set_(std::move(set)) {}
  FunctionKind kind() const override { return FunctionKind::indicator; }
  std::string name() const override { return std::string("indicator(") + std::string(set_.kind_name()) + ")"; }
  std::optional<Index> dim() const override { return set_.dim(); }
  ExtendedReal eval(const Vector& y) const override {
    return set_.contains(y) ? ExtendedReal::finite(0.0) : ExtendedReal::infinity();
  }
  Vector prox(double, const Vector& y) const override { return set_.project(y); }
  std::optional<ExtendedReal> eval_conjugate(const Vector& v) const override { return set_.support(v); }
  const ConvexSetDescriptor* domain_set() const override { return &set_; }
  std::optional<double> lipschitz_bound(Index, double) const override { return std::nullopt; }

 private:
  ConvexSetDescriptor set_;
};

}  // namespace

ProxFunction::ProxFunction(std::shared_ptr<const Model> model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("ProxFunction: null model");
}

ExtendedReal ProxFunction::eval(const Vector& y) const {
  if (auto d = model_->dim()) require_dim(y, *d, name() + " eval");
  return model_->eval(y);
}

Vector ProxFunction::prox(double gamma, const Vector& y) const {
  require_positive_gamma(gamma);
  if (auto d = model_->dim()) require_dim(y, *d, name() + " prox");
  return model_->prox(gamma, y);
}

Vector ProxFunction::prox_conjugate(double gamma, const Vector& v) const {
  require_positive_gamma(gamma);
  if (auto d = model_->dim()) require_dim(v, *d, name() + " conjugate prox");
  if (auto direct = model_->direct_prox_conjugate(gamma, v)) return *std::move(direct);
  return prox_conjugate_moreau(gamma, v);
}

Vector ProxFunction::prox_conjugate_moreau(double gamma, const Vector& v) const {
  require_positive_gamma(gamma);
  return v - gamma * prox(1.0 / gamma, v / gamma);
}

std::optional<ExtendedReal> ProxFunction::eval_conjugate(const Vector& v) const {
  if (auto d = model_->dim()) require_dim(v, *d, name() + " conjugate");
  return model_->eval_conjugate(v);
}

DomainKind ProxFunction::domain_kind() const {
  const auto* set = model_->domain_set();
  if (!set) return DomainKind::full_space;
  return set->interior_point() ? DomainKind::set_with_interior_point : DomainKind::other;
}

std::optional<Vector> ProxFunction::domain_interior_point() const {
  const auto* set = model_->domain_set();
  return set ? set->interior_point() : std::nullopt;
}

ProxFunction zero_function() { return ProxFunction(std::make_shared<ZeroModel>()); }
ProxFunction norm1() { return ProxFunction(std::make_shared<Norm1Model>()); }
ProxFunction norm2() { return ProxFunction(std::make_shared<Norm2Model>()); }

ProxFunction elastic_net(double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("elastic_net: alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("elastic_net: beta must be positive");
  return ProxFunction(std::make_shared<ElasticNetModel>(alpha, beta));
}

ProxFunction mixed_norm21(Index groups, Index group_size) {
  if (groups <= 0 || group_size <= 0) throw std::invalid_argument("mixed_norm21: sizes must be positive");
  return ProxFunction(std::make_shared<MixedNorm21Model>(groups, group_size));
}

ProxFunction make_indicator(ConvexSetDescriptor set) {
  return ProxFunction(std::make_shared<IndicatorModel>(std::move(set)));
}

std::optional<ElasticNetParams> elastic_net_params(const ProxFunction& g) {
  if (const auto* en = dynamic_cast<const ElasticNetModel*>(&g.model())) {
    return ElasticNetParams{en->alpha(), en->beta()};
  }
  return std::nullopt;
}

}  // namespace dualprox
