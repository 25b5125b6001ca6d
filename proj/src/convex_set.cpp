#include "dualprox/convex_set.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualprox {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double membership_slack(const Vector& y) { return kMembershipTolerance * (1.0 + y.norm()); }

}  // namespace

ConvexSetDescriptor ConvexSetDescriptor::ball(Vector center, double radius) {
  require_finite(center, "ball center");
  if (center.size() == 0) throw std::invalid_argument("ball: empty center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball: radius must be positive");
  return ConvexSetDescriptor(Ball{std::move(center), radius});
}

ConvexSetDescriptor ConvexSetDescriptor::box(Vector lo, Vector hi) {
  require_same_dim(lo, hi, "box bounds");
  if (lo.size() == 0) throw std::invalid_argument("box: empty bounds");
  for (Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i] || lo[i] == std::numeric_limits<double>::infinity() ||
        hi[i] == -std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("box: need lo <= hi componentwise");
    }
  }
  return ConvexSetDescriptor(Box{std::move(lo), std::move(hi)});
}

ConvexSetDescriptor ConvexSetDescriptor::halfspace(Vector normal, double offset) {
  require_finite(normal, "halfspace normal");
  if (normal.size() == 0 || normal.squaredNorm() == 0.0) throw std::invalid_argument("halfspace: zero normal");
  if (!std::isfinite(offset)) throw std::invalid_argument("halfspace: offset must be finite");
  return ConvexSetDescriptor(Halfspace{std::move(normal), offset});
}

ConvexSetDescriptor ConvexSetDescriptor::affine(Matrix matrix, Vector rhs) {
  if (matrix.rows() != rhs.size()) throw DimensionError("affine: matrix rows must match rhs length");
  if (matrix.cols() == 0 || matrix.rows() == 0) throw std::invalid_argument("affine: empty system");
  if (!matrix.allFinite()) throw std::invalid_argument("affine: non-finite matrix entry");
  require_finite(rhs, "affine rhs");
  Matrix pinv = matrix.completeOrthogonalDecomposition().pseudoInverse();
  Vector anchor = pinv * rhs;
  const double residual = (matrix * anchor - rhs).norm();
  if (residual > 1e-9 * (1.0 + rhs.norm())) throw std::invalid_argument("affine: inconsistent system");
  return ConvexSetDescriptor(Affine{std::move(matrix), std::move(rhs), std::move(pinv), std::move(anchor)});
}

ConvexSetDescriptor::Kind ConvexSetDescriptor::kind() const {
  return static_cast<Kind>(shape_.index());
}

std::string_view ConvexSetDescriptor::kind_name() const {
  switch (kind()) {
    case Kind::ball: return "ball";
    case Kind::box: return "box";
    case Kind::halfspace: return "halfspace";
    case Kind::affine: return "affine";
  }
  return "unknown";
}

Index ConvexSetDescriptor::dim() const {
  return std::visit(overloaded{[](const Ball& b) { return b.center.size(); },
                               [](const Box& b) { return b.lo.size(); },
                               [](const Halfspace& h) { return h.normal.size(); },
                               [](const Affine& a) { return a.matrix.cols(); }},
                    shape_);
}

Vector ConvexSetDescriptor::project(const Vector& y) const {
  require_dim(y, dim(), "projection");
  return std::visit(
      overloaded{
          [&](const Ball& b) -> Vector {
            const Vector d = y - b.center;
            const double n = d.norm();
            if (n <= b.radius) return y;
            return b.center + (b.radius / n) * d;
          },
          [&](const Box& b) -> Vector { return y.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Halfspace& h) -> Vector {
            const double excess = h.normal.dot(y) - h.offset;
            if (excess <= 0.0) return y;
            return y - (excess / h.normal.squaredNorm()) * h.normal;
          },
          [&](const Affine& a) -> Vector { return y - a.pinv * (a.matrix * y - a.rhs); }},
      shape_);
}

double ConvexSetDescriptor::distance(const Vector& y) const {
  require_dim(y, dim(), "distance");
  return std::visit(overloaded{[&](const Ball& b) { return std::max(0.0, (y - b.center).norm() - b.radius); },
                               [&](const Box& b) {
                                 const Vector below = (b.lo - y).cwiseMax(0.0);
                                 const Vector above = (y - b.hi).cwiseMax(0.0);
                                 return (below + above).norm();
                               },
                               [&](const Halfspace& h) {
                                 return std::max(0.0, h.normal.dot(y) - h.offset) / h.normal.norm();
                               },
                               [&](const Affine& a) { return (a.pinv * (a.matrix * y - a.rhs)).norm(); }},
                    shape_);
}

bool ConvexSetDescriptor::contains(const Vector& y) const { return distance(y) <= membership_slack(y); }

bool ConvexSetDescriptor::interior_contains(const Vector& y) const {
  require_dim(y, dim(), "interior test");
  return std::visit(overloaded{[&](const Ball& b) { return (y - b.center).norm() < b.radius; },
                               [&](const Box& b) { return (y.array() > b.lo.array()).all() && (y.array() < b.hi.array()).all(); },
                               [&](const Halfspace& h) { return h.normal.dot(y) < h.offset; },
                               [&](const Affine&) { return false; }},
                    shape_);
}

std::optional<Vector> ConvexSetDescriptor::interior_point() const {
  return std::visit(
      overloaded{[](const Ball& b) -> std::optional<Vector> { return b.center; },
                 [](const Box& b) -> std::optional<Vector> {
                   Vector p(b.lo.size());
                   for (Index i = 0; i < p.size(); ++i) {
                     const double lo = b.lo[i], hi = b.hi[i];
                     if (!(lo < hi)) return std::nullopt;
                     if (std::isfinite(lo) && std::isfinite(hi)) p[i] = 0.5 * (lo + hi);
                     else if (std::isfinite(lo)) p[i] = lo + 1.0;
                     else if (std::isfinite(hi)) p[i] = hi - 1.0;
                     else p[i] = 0.0;
                   }
                   return p;
                 },
                 [](const Halfspace& h) -> std::optional<Vector> {
                   return ((h.offset - 1.0) / h.normal.squaredNorm()) * h.normal;
                 },
                 [](const Affine&) -> std::optional<Vector> { return std::nullopt; }},
      shape_);
}

ExtendedReal ConvexSetDescriptor::support(const Vector& u) const {
  require_dim(u, dim(), "support function");
  return std::visit(
      overloaded{
          [&](const Ball& b) { return ExtendedReal::finite(b.center.dot(u) + b.radius * u.norm()); },
          [&](const Box& b) {
            double s = 0.0;
            for (Index i = 0; i < u.size(); ++i) {
              if (u[i] > 0.0) {
                if (!std::isfinite(b.hi[i])) return ExtendedReal::infinity();
                s += b.hi[i] * u[i];
              } else if (u[i] < 0.0) {
                if (!std::isfinite(b.lo[i])) return ExtendedReal::infinity();
                s += b.lo[i] * u[i];
              }
            }
            return ExtendedReal::finite(s);
          },
          [&](const Halfspace& h) {
            // Finite only on the ray {t * normal : t >= 0}.
            const double t = h.normal.dot(u) / h.normal.squaredNorm();
            const double off_ray = (u - t * h.normal).norm();
            if (off_ray > membership_slack(u) || t < -membership_slack(u)) return ExtendedReal::infinity();
            return ExtendedReal::finite(std::max(t, 0.0) * h.offset);
          },
          [&](const Affine& a) {
            // Finite only on the row space of the matrix.
            const Vector row_part = a.pinv * (a.matrix * u);
            if ((u - row_part).norm() > membership_slack(u)) return ExtendedReal::infinity();
            return ExtendedReal::finite(a.anchor.dot(u));
          }},
      shape_);
}

}  // namespace dualprox
