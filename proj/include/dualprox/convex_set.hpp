#pragma once

#include "dualprox/extended_real.hpp"
#include "dualprox/spaces.hpp"

#include <optional>
#include <string_view>
#include <variant>

namespace dualprox {

/// Points within this distance of a set, scaled by (1 + ||y||), count as members.
inline constexpr double kMembershipTolerance = 1e-9;

/// Closed convex set with an exact projector and distance formula.
///
/// Four shapes are supported:
///   ball(center, radius)        { y : ||y - center|| <= radius }
///   box(lo, hi)                 { y : lo <= y <= hi }, bounds may be infinite
///   halfspace(normal, offset)   { y : <normal, y> <= offset }
///   affine(matrix, rhs)         { y : matrix * y = rhs }
class ConvexSetDescriptor {
 public:
  enum class Kind { ball, box, halfspace, affine };

  static ConvexSetDescriptor ball(Vector center, double radius);
  static ConvexSetDescriptor box(Vector lo, Vector hi);
  static ConvexSetDescriptor halfspace(Vector normal, double offset);
  /// Throws std::invalid_argument when the system has no solution.
  static ConvexSetDescriptor affine(Matrix matrix, Vector rhs);

  Kind kind() const;
  std::string_view kind_name() const;
  Index dim() const;

  Vector project(const Vector& y) const;
  double distance(const Vector& y) const;
  bool contains(const Vector& y) const;
  /// Strict interior membership. Affine sets of positive codimension have
  /// empty interior and always answer false.
  bool interior_contains(const Vector& y) const;
  /// A point of the interior, when one exists.
  std::optional<Vector> interior_point() const;
  /// sigma_C(u) = sup_{y in C} <y, u>.
  ExtendedReal support(const Vector& u) const;

  struct Ball {
    Vector center;
    double radius;
  };
  struct Box {
    Vector lo;
    Vector hi;
  };
  struct Halfspace {
    Vector normal;
    double offset;
  };
  struct Affine {
    Matrix matrix;
    Vector rhs;
    Matrix pinv;     // Moore-Penrose pseudo-inverse of matrix
    Vector anchor;   // pinv * rhs, a point of the set
  };

  const std::variant<Ball, Box, Halfspace, Affine>& shape() const { return shape_; }

 private:
  explicit ConvexSetDescriptor(std::variant<Ball, Box, Halfspace, Affine> s) : shape_(std::move(s)) {}
  std::variant<Ball, Box, Halfspace, Affine> shape_;
};

}  // namespace dualprox
