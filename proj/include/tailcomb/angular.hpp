#pragma once

#include "tailcomb/combiners.hpp"
#include "tailcomb/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tailcomb {

/// Discrete angular measure on the unit L1 sphere.
///
/// K atoms theta_k with ||theta_k||_1 = 1 and probability weights p_k. Unsigned
/// measures live on the simplex. Immutable after validation.
class DiscreteAngularMeasure {
 public:
  // `atoms` is K x d row-major. Throws ConfigError on any broken invariant.
  DiscreteAngularMeasure(double beta, std::size_t d, std::vector<double> atoms,
                         std::vector<double> weights, bool is_signed);

  static DiscreteAngularMeasure from_rows(double beta,
                                          const std::vector<std::vector<double>>& atoms,
                                          std::vector<double> weights, bool is_signed);

  // Equal mass on the d unit vectors: the asymptotically independent measure.
  static DiscreteAngularMeasure axes(std::size_t d, double beta = 1.0);

  double beta() const noexcept { return beta_; }
  std::size_t dimension() const noexcept { return d_; }
  std::size_t size() const noexcept { return weights_.size(); }
  bool is_signed() const noexcept { return signed_; }
  std::span<const double> atom(std::size_t k) const {
    return {atoms_.data() + k * d_, d_};
  }
  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> weights() const noexcept { return weights_; }

  DiscreteAngularMeasure with_beta(double beta) const;

  // E[(Theta_i)_+^beta] for each coordinate.
  std::vector<double> margin_moments() const;

 private:
  double beta_;
  std::size_t d_;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  bool signed_;
};

inline constexpr double kEqualMarginsTolerance = 1e-9;
inline constexpr double kAtomNormTolerance = 1e-12;

// Common value of E[(Theta_i)_+^beta].
struct MarginConstraint {
  double target;
  double tolerance;
};

// Throws ConfigError when the margin moments differ by more than the relative
// tolerance or vanish.
MarginConstraint margin_constraint(const DiscreteAngularMeasure& m,
                                   double relative_tolerance = kEqualMarginsTolerance);

// lim P[h(X) > t] / P[X_1 > t] = E[h(Theta)^beta] / E[(Theta_1)_+^beta].
// Max-linear combiners are normalized by c_w (the FCT statistic is Y_w / c_w).
double asymptotic_ratio(const Combiner& combiner, const DiscreteAngularMeasure& m);

enum class Honesty { Calibrated, StrictlyHonest, Liberal };

std::string_view to_string(Honesty h);

Honesty classify(const Combiner& combiner, const DiscreteAngularMeasure& m, double tol);

// True iff every atom with positive weight lies in [0,inf)^d or (-inf,0]^d.
bool cct_support_condition(const DiscreteAngularMeasure& m);

// Angular measure of X = A Z (and of the max-linear model A (max) Z) with iid
// beta-Pareto factors: atoms a_j/||a_j||_1 with weights proportional to
// ||a_j||_1^beta. A is d x p, nonnegative, with nonzero columns.
DiscreteAngularMeasure factor_model_measure(const Eigen::MatrixXd& a, double beta);

struct StandardizeResult {
  std::optional<DiscreteAngularMeasure> measure;
  bool augmented = false;
  double residual = 0.0;
  std::string report;
};

// Finds nonnegative weights making E[(Theta_i)_+^beta] equal across i, via
// NNLS. When the atoms alone are infeasible, the d unit vectors are appended
// and the solve is repeated; `augmented` reports that.
StandardizeResult standardize_weights(std::span<const double> atoms, std::size_t d,
                                      double beta, bool is_signed);

// Upper tail-dependence coefficient of the t copula:
// 2 T_{nu+1}(-sqrt((nu+1)(1-rho)/(1+rho))).
double t_copula_lambda(double nu, double rho);

struct RatioEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

// Fills a nonnegative vector W from the given stream.
using VectorSampler = std::function<void(RngStream&, std::span<double>)>;

// Monte Carlo version of the asymptotic ratio through the Breiman identity:
// mean(h(W)^beta) / mean((W_1)_+^beta), with a delete-one jackknife standard
// error. Replicate i uses stream (seed, i).
RatioEstimate breiman_ratio_mc(const VectorSampler& sampler, std::size_t d,
                               const Combiner& combiner, double beta, std::size_t n,
                               std::uint64_t seed, unsigned workers = 0);

// Sampler drawing an atom of `m` according to its weights.
VectorSampler atom_sampler(const DiscreteAngularMeasure& m);

}  // namespace tailcomb
