#include "tailcomb/transforms.hpp"

#include "tailcomb/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tailcomb {

std::string_view to_string(TailScale scale) {
  switch (scale) {
    case TailScale::Pareto1: return "pareto";
    case TailScale::Cauchy: return "cauchy";
    case TailScale::Frechet1: return "frechet";
  }
  return "unknown";
}

double clamp_pvalue(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("p-value outside [0,1]: " + std::to_string(p));
  }
  return std::clamp(p, kMinPValue, kMaxPValue);
}

PValueVector::PValueVector(std::span<const double> values) {
  if (values.empty()) throw ConfigError("p-value vector must be non-empty");
  values_.reserve(values.size());
  for (double p : values) values_.push_back(clamp_pvalue(p));
}

double pareto_transform(double p) { return 1.0 / clamp_pvalue(p); }

double cauchy_transform(double p) {
  p = clamp_pvalue(p);
  // 0.5 - p is exact on [0.25, 1], so the middle branch is exact at p = 1/2.
  if (p < 0.25) return 1.0 / std::tan(std::numbers::pi * p);
  if (p > 0.75) return -1.0 / std::tan(std::numbers::pi * (1.0 - p));
  return std::tan(std::numbers::pi * (0.5 - p));
}

double frechet_transform(double p) {
  p = clamp_pvalue(p);
  return -1.0 / std::log1p(-p);
}

double tail_scale_inverse_survival(TailScale scale, double p) {
  switch (scale) {
    case TailScale::Pareto1: return pareto_transform(p);
    case TailScale::Cauchy: return cauchy_transform(p);
    case TailScale::Frechet1: return frechet_transform(p);
  }
  throw ConfigError("unknown tail scale");
}

double tail_scale_survival(TailScale scale, double x) {
  if (std::isnan(x)) throw DomainError("survival of NaN");
  switch (scale) {
    case TailScale::Pareto1:
      return x <= 1.0 ? 1.0 : 1.0 / x;
    case TailScale::Cauchy:
      if (x > 0.0) return std::atan(1.0 / x) / std::numbers::pi;
      return 0.5 + std::atan(-x) / std::numbers::pi;
    case TailScale::Frechet1:
      return x <= 0.0 ? 1.0 : -std::expm1(-1.0 / x);
  }
  throw ConfigError("unknown tail scale");
}

double sidak_screen(double p_min, std::size_t m) {
  if (m == 0) throw DomainError("Sidak screening needs m >= 1");
  if (!(p_min >= 0.0 && p_min <= 1.0)) {
    throw DomainError("Sidak screening needs p_min in [0,1]");
  }
  if (m == 1) return p_min;
  return -std::expm1(static_cast<double>(m) * std::log1p(-p_min));
}

}  // namespace tailcomb
