#include "tailcomb/error.hpp"
#include "tailcomb/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tailcomb {
namespace {

constexpr double kLentzFloor = 1e-300;
constexpr double kFractionTolerance = 1e-14;

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a,b) (modified Lentz). The iteration count
// needed grows like sqrt(a + b), hence the cap for very large nu.
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  const int max_iter = std::max(300, static_cast<int>(10.0 * std::sqrt(a + b)));

  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kLentzFloor) d = kLentzFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kLentzFloor) d = kLentzFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kLentzFloor) c = kLentzFloor;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kLentzFloor) d = kLentzFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kLentzFloor) c = kLentzFloor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kFractionTolerance) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge (a=" +
                       std::to_string(a) + ", b=" + std::to_string(b) +
                       ", x=" + std::to_string(x) + ")");
}

double incomplete_beta(double x, double y, double a, double b, double lbeta) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log(y) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(y, b, a) / b;
}

}  // namespace

double regularized_incomplete_beta(double x, double y, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete beta requires a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw DomainError("incomplete beta requires x in [0,1]");
  }
  return incomplete_beta(x, y, a, b, log_beta(a, b));
}

double regularized_incomplete_beta(double x, double a, double b) {
  return regularized_incomplete_beta(x, 1.0 - x, a, b);
}

StudentT::StudentT(double nu) : nu_(nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("Student t requires finite nu > 0");
  }
  log_beta_ = log_beta(0.5 * nu, 0.5);
}

// P[T > t] for t >= 0 is I_z(nu/2, 1/2) / 2 with z = nu / (nu + t^2).
double StudentT::upper_half(double t) const {
  if (t == 0.0) return 0.5;
  double z;
  double one_minus_z;
  if (t <= 1.0) {
    const double t2 = t * t;
    z = nu_ / (nu_ + t2);
    one_minus_z = t2 / (nu_ + t2);
  } else {
    const double r = nu_ / (t * t);
    z = r / (1.0 + r);
    one_minus_z = 1.0 / (1.0 + r);
  }
  return 0.5 * incomplete_beta(z, one_minus_z, 0.5 * nu_, 0.5, log_beta_);
}

double StudentT::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("Student t cdf of NaN");
  if (x < 0.0) return upper_half(-x);
  return 1.0 - upper_half(x);
}

double StudentT::sf(double x) const {
  if (std::isnan(x)) throw DomainError("Student t sf of NaN");
  if (x > 0.0) return upper_half(x);
  return 1.0 - upper_half(-x);
}

double student_t_cdf(double x, double nu) { return StudentT(nu).cdf(x); }

double normal_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

}  // namespace tailcomb
