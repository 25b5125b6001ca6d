#pragma once

#include "dualprox/spaces.hpp"

#include <random>

namespace testing {

inline dualprox::Vector random_vector(std::mt19937_64& rng, dualprox::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  dualprox::Vector v(n);
  for (dualprox::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline dualprox::Matrix random_matrix(std::mt19937_64& rng, dualprox::Index rows, dualprox::Index cols) {
  std::normal_distribution<double> normal;
  dualprox::Matrix m(rows, cols);
  for (dualprox::Index i = 0; i < rows; ++i)
    for (dualprox::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline dualprox::Vector vec(std::initializer_list<double> v) {
  dualprox::Vector out(static_cast<dualprox::Index>(v.size()));
  dualprox::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace testing
