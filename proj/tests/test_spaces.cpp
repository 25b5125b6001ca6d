#include "dualprox/spaces.hpp"
#include "dualprox/extended_real.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <Eigen/SVD>

using namespace dualprox;
using testing::vec;

TEST_CASE("inner product basics") {
  CHECK(inner(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(inner(vec({1, 2}), vec({1, 2})) == 5.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vector x = testing::random_vector(rng, 5);
    const Vector y = testing::random_vector(rng, 5);
    CHECK(inner(x, x) > 0.0);
    CHECK(inner(x, y) == doctest::Approx(inner(y, x)));
  }
  CHECK(inner(Vector::Zero(3), Vector::Zero(3)) == 0.0);
  CHECK_THROWS_AS(inner(vec({1, 2}), vec({1, 2, 3})), DimensionError);
}

TEST_CASE("weight vectors") {
  CHECK_NOTHROW(WeightVector({0.5, 0.25, 0.25}));
  CHECK_THROWS(WeightVector({0.5, 0.6}));
  CHECK_THROWS(WeightVector({0.0, 1.0}));
  CHECK_THROWS(WeightVector({1.5, -0.5}));
  CHECK_THROWS(WeightVector(std::vector<double>{}));
  const auto u = WeightVector::uniform(3);
  CHECK(u.size() == 3);
  CHECK(u[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("norm estimates") {
  CHECK(identity_operator(3).norm_upper_bound() == 1.0);
  const double id_est = estimate_operator_norm(identity_operator(3));
  CHECK(id_est >= 1.0);
  CHECK(id_est <= 1.01 + 1e-12);

  const double d = estimate_operator_norm(diagonal_operator(vec({2.0, 0.5})));
  CHECK(d >= 2.0);
  CHECK(d <= 2.0 * 1.01 + 1e-12);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = testing::random_matrix(rng, 4, 3);
    const double sigma = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
    const double est = estimate_operator_norm(matrix_operator(m));
    CHECK(est >= sigma);
    CHECK(est <= 1.01 * sigma * (1 + 1e-9));
    // lazily computed bound agrees with the explicit estimate
    CHECK(matrix_operator(m).norm_upper_bound() == doctest::Approx(est));
  }
  // deterministic with a fixed seed
  const Matrix m = testing::random_matrix(rng, 5, 5);
  CHECK(estimate_operator_norm(matrix_operator(m)) == estimate_operator_norm(matrix_operator(m)));
  CHECK(estimate_operator_norm(matrix_operator(Matrix::Zero(2, 3))) == 0.0);
}

TEST_CASE("norm estimate gives up on a tiny iteration budget") {
  // two close singular values converge slowly
  const Matrix m = vec({1.0, 0.999999}).asDiagonal();
  CHECK_THROWS_AS(estimate_operator_norm(matrix_operator(m), 1e-14, 3), NormEstimateError);
}

TEST_CASE("adjoint checks") {
  const auto id = check_adjoint(identity_operator(4), 10);
  CHECK(id.passed);
  CHECK(id.max_relative_discrepancy == 0.0);

  std::mt19937_64 rng(3);
  const Matrix m = testing::random_matrix(rng, 3, 4);
  const auto good = check_adjoint(matrix_operator(m), 50);
  CHECK(good.passed);
  CHECK(good.max_relative_discrepancy <= 1e-12);

  Matrix wrong = m;
  wrong(0, 1) += 0.3;
  const LinearOperator bad(
      4, 3, [m](const Vector& x) -> Vector { return m * x; },
      [wrong](const Vector& u) -> Vector { return wrong.transpose() * u; }, 10.0, "bad");
  const auto r = check_adjoint(bad, 50);
  CHECK_FALSE(r.passed);
  CHECK(r.max_relative_discrepancy > 1e-6);
}

TEST_CASE("catalog operators are adjoint-consistent and bounded") {
  std::mt19937_64 rng(11);
  const Matrix a = testing::random_matrix(rng, 3, 4);
  const Matrix b = testing::random_matrix(rng, 2, 4);
  std::vector<LinearOperator> ops{identity_operator(4),
                                  scalar_operator(4, -2.5),
                                  diagonal_operator(vec({1, -3, 0.5, 2})),
                                  matrix_operator(a),
                                  stacked_operator({matrix_operator(a), matrix_operator(b)}),
                                  block_diagonal_operator({matrix_operator(a), matrix_operator(b)})};
  for (const auto& op : ops) {
    CAPTURE(op.name());
    CHECK(check_adjoint(op, 100).max_relative_discrepancy <= 1e-10);
    const double sigma = Eigen::JacobiSVD<Matrix>(to_dense(op)).singularValues()[0];
    CHECK(op.norm_upper_bound() >= sigma * (1 - 1e-12));
  }
}

TEST_CASE("product-space bound dominates the block operator") {
  std::mt19937_64 rng(5);
  std::vector<LinearOperator> blocks{matrix_operator(testing::random_matrix(rng, 2, 3)),
                                     matrix_operator(testing::random_matrix(rng, 4, 3))};
  const double bound = product_norm_bound(blocks);
  const double sigma = Eigen::JacobiSVD<Matrix>(to_dense(block_diagonal_operator(blocks))).singularValues()[0];
  CHECK(bound >= sigma);
}

TEST_CASE("operator dimension checks") {
  const auto op = matrix_operator(Matrix::Ones(2, 3));
  CHECK(op.dim_in() == 3);
  CHECK(op.dim_out() == 2);
  CHECK_THROWS_AS(op.apply(Vector::Ones(2)), DimensionError);
  CHECK_THROWS_AS(op.adjoint(Vector::Ones(3)), DimensionError);
  CHECK(op.with_norm_bound(10.0).norm_upper_bound() == 10.0);
}

TEST_CASE("extended reals") {
  const auto inf = ExtendedReal::infinity();
  const auto one = ExtendedReal::finite(1.0);
  CHECK((one + one).value() == 2.0);
  CHECK((one + inf).is_infinite());
  CHECK((0.5 * inf).is_infinite());
  CHECK(one < inf);
  CHECK_THROWS(inf.value());
  CHECK(inf.to_double() == std::numeric_limits<double>::infinity());
}
