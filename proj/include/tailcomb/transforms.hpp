#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace tailcomb {

// Distribution F whose inverse survival maps a p-value to a heavy-tailed
// variable. All three have survival ~ 1/x (tail index 1).
enum class TailScale { Pareto1, Cauchy, Frechet1 };

std::string_view to_string(TailScale scale);

// p-values are clamped into [kMinPValue, kMaxPValue] before any transform.
inline constexpr double kMinPValue = 1e-300;
inline constexpr double kMaxPValue = 1.0 - 1e-16;

// Clamps p into [kMinPValue, kMaxPValue]. NaN or values outside [0,1] throw
// DomainError.
double clamp_pvalue(double p);

/// A vector of d >= 1 clamped p-values.
class PValueVector {
 public:
  explicit PValueVector(std::span<const double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
};

// X = 1/p. Small p-values map to large X.
double pareto_transform(double p);

// X = tan(pi (1/2 - p)), evaluated through the cotangent so both endpoints
// keep full relative precision.
double cauchy_transform(double p);

// X = -1/log(1 - p), standard 1-Frechet. Decreasing in p; X ~ 1/p as p -> 0.
double frechet_transform(double p);

double tail_scale_inverse_survival(TailScale scale, double p);

// Exact survival P[X > x] of each scale; inverse of the transform above.
double tail_scale_survival(TailScale scale, double x);

// 1 - (1 - p_min)^m: uniform when p_min is the minimum of m iid uniforms.
double sidak_screen(double p_min, std::size_t m);

// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
// separately avoids cancellation when x is close to 1.
double regularized_incomplete_beta(double x, double y, double a, double b);
double regularized_incomplete_beta(double x, double a, double b);

/// Student t distribution with a fixed number of degrees of freedom.
///
/// The log-beta normalizer is computed once, so repeated evaluation inside
/// the Monte Carlo harness only pays for the continued fraction.
class StudentT {
 public:
  explicit StudentT(double nu);

  double nu() const noexcept { return nu_; }
  double cdf(double x) const;
  // Upper tail P[T > x], accurate far into the right tail.
  double sf(double x) const;

 private:
  // P[T > |x|] for the half line.
  double upper_half(double x) const;

  double nu_;
  double log_beta_;
};

double student_t_cdf(double x, double nu);

// Standard normal upper tail.
double normal_sf(double x);

}  // namespace tailcomb
