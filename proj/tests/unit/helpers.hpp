#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace tailcomb::testutil {

// Kolmogorov-Smirnov distance of a sample against Uniform(0,1).
inline double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = std::clamp(u[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

// 1% critical value of the one-sample KS statistic.
inline double ks_bound(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

}  // namespace tailcomb::testutil

#include "tailcomb/angular.hpp"
#include "tailcomb/rng.hpp"

#include <span>
#include <stdexcept>

namespace tailcomb::testutil {

// Uniform point on the unit simplex.
inline std::vector<double> dirichlet(RngStream& rng, std::size_t d) {
  std::vector<double> v(d);
  double total = 0.0;
  for (double& x : v) {
    x = rng.exponential();
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

inline std::vector<double> random_weights(RngStream& rng, std::size_t d) { return dirichlet(rng, d); }

// K random simplex atoms with NNLS-standardized weights.
inline DiscreteAngularMeasure random_unsigned_measure(RngStream& rng, std::size_t d, std::size_t k,
                                                      double beta = 1.0) {
  std::vector<double> atoms;
  for (std::size_t j = 0; j < k; ++j) {
    const auto a = dirichlet(rng, d);
    atoms.insert(atoms.end(), a.begin(), a.end());
  }
  auto result = standardize_weights(atoms, d, beta, false);
  if (!result.measure) throw std::runtime_error("standardization failed: " + result.report);
  return *result.measure;
}

// Symmetric signed measure: atom/negated-atom pairs with equal weights, the
// pair weights standardized on |theta|. With `orthant` every atom keeps one
// sign throughout.
inline DiscreteAngularMeasure random_symmetric_measure(RngStream& rng, std::size_t d,
                                                       std::size_t k, bool orthant) {
  std::vector<double> signed_atoms;
  for (std::size_t j = 0; j < k; ++j) {
    auto a = dirichlet(rng, d);
    const double overall = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (double& x : a) x *= orthant ? overall : (rng.uniform() < 0.5 ? -1.0 : 1.0);
    signed_atoms.insert(signed_atoms.end(), a.begin(), a.end());
  }
  std::vector<double> magnitudes(signed_atoms.size());
  for (std::size_t i = 0; i < signed_atoms.size(); ++i) magnitudes[i] = std::fabs(signed_atoms[i]);
  auto result = standardize_weights(magnitudes, d, 1.0, false);
  if (!result.measure) throw std::runtime_error("standardization failed: " + result.report);
  const auto& base = *result.measure;
  if (result.augmented) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < d; ++c) signed_atoms.push_back(i == c ? 1.0 : 0.0);
    }
  }
  std::vector<double> atoms;
  std::vector<double> weights;
  for (std::size_t j = 0; j < base.size(); ++j) {
    for (double sign : {1.0, -1.0}) {
      for (std::size_t i = 0; i < d; ++i) atoms.push_back(sign * signed_atoms[j * d + i]);
      weights.push_back(0.5 * base.weights()[j]);
    }
  }
  return {1.0, d, std::move(atoms), std::move(weights), true};
}

}  // namespace tailcomb::testutil
