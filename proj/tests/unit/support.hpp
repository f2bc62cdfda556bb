#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "minsm/dataset.hpp"
#include "minsm/hashing.hpp"

namespace minsm::test {

/// |k/n - p| within z binomial standard errors; degenerate p must match exactly.
inline bool within_se(std::size_t hits, std::size_t trials, double p, double z = 3.0) {
  const double freq = static_cast<double>(hits) / static_cast<double>(trials);
  if (p <= 0.0 || p >= 1.0) {
    return freq == p;
  }
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return std::abs(freq - p) <= z * se;
}

inline FeatureVector random_vector(std::mt19937_64& rng, std::size_t dim, double lo = -1.0,
                                   double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  FeatureVector v(dim);
  for (double& x : v) x = u(rng);
  return v;
}

inline FeatureVector random_nonneg(std::mt19937_64& rng, std::size_t dim) {
  return random_vector(rng, dim, 0.0, 1.0);
}

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                              double lo = -1.0, double hi = 1.0) {
  std::vector<FeatureVector> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_vector(rng, dim, lo, hi));
  return Dataset::from_rows(rows);
}

}  // namespace minsm::test
