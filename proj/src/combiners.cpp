#include "tailcomb/combiners.hpp"

#include "tailcomb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tailcomb {
namespace {

constexpr double kWeightSumTolerance = 1e-12;

void validate_weights(std::span<const double> w) {
  if (w.empty()) throw ConfigError("weights must be non-empty");
  double sum = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0) || !std::isfinite(wi)) {
      throw ConfigError("weights must be finite and nonnegative");
    }
    sum += wi;
  }
  if (std::fabs(sum - 1.0) > kWeightSumTolerance) {
    throw ConfigError("weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

void require_dimension(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw ConfigError("dimension mismatch: expected " + std::to_string(expected) +
                      ", got " + std::to_string(got));
  }
}

void require_nonnegative(std::span<const double> x, std::string_view what) {
  for (double v : x) {
    if (!(v >= 0.0)) {
      throw DomainError(std::string(what) + " requires nonnegative inputs");
    }
  }
}

std::string format_shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join_doubles(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_shortest(values[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(CombinerKind kind) {
  switch (kind) {
    case CombinerKind::Linear: return "linear";
    case CombinerKind::Tippett: return "tippett";
    case CombinerKind::PowerMean: return "powermean";
    case CombinerKind::MaxLinear: return "maxlinear";
  }
  return "unknown";
}

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::PCT: return "pct";
    case TestKind::CCT: return "cct";
    case TestKind::Tippett: return "tippett";
    case TestKind::FCT: return "fct";
    case TestKind::PowerMean: return "powermean";
  }
  return "unknown";
}

MaxLinearCoefficients MaxLinearCoefficients::build(
    std::vector<std::vector<std::size_t>> blocks, std::span<const double> weights,
    std::size_t factors) {
  if (blocks.empty()) throw ConfigError("max-linear combiner needs at least one block");
  if (factors == 0) throw ConfigError("max-linear combiner needs at least one factor");
  if (weights.size() != blocks.size()) {
    throw ConfigError("max-linear combiner needs one weight per block");
  }
  validate_weights(weights);

  MaxLinearCoefficients m;
  m.tests = blocks.size();
  m.factors = factors;
  m.a.assign(m.tests * factors, 0.0);
  std::vector<bool> covered(factors, false);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& block = blocks[i];
    if (block.empty()) throw ConfigError("empty block " + std::to_string(i + 1));
    std::sort(block.begin(), block.end());
    if (std::adjacent_find(block.begin(), block.end()) != block.end()) {
      throw ConfigError("duplicate index in block " + std::to_string(i + 1));
    }
    const double share = 1.0 / static_cast<double>(block.size());
    for (std::size_t j : block) {
      if (j >= factors) {
        throw ConfigError("block index " + std::to_string(j + 1) + " out of range 1.." +
                          std::to_string(factors));
      }
      m.a[i * factors + j] = share;
      covered[j] = true;
    }
  }
  for (std::size_t j = 0; j < factors; ++j) {
    if (!covered[j]) {
      throw ConfigError("factor " + std::to_string(j + 1) + " is not covered by any block");
    }
  }
  m.a_w.assign(factors, 0.0);
  for (std::size_t j = 0; j < factors; ++j) {
    for (std::size_t i = 0; i < m.tests; ++i) {
      m.a_w[j] = std::max(m.a_w[j], weights[i] * m.a[i * factors + j]);
    }
  }
  m.c_w = std::accumulate(m.a_w.begin(), m.a_w.end(), 0.0);
  if (!(m.c_w > 0.0)) throw ConfigError("max-linear normalizer c_w must be positive");
  m.blocks = std::move(blocks);
  return m;
}

Combiner Combiner::linear(std::vector<double> weights) {
  validate_weights(weights);
  Combiner c;
  c.kind_ = CombinerKind::Linear;
  c.dimension_ = weights.size();
  c.weights_ = std::move(weights);
  return c;
}

Combiner Combiner::equal_linear(std::size_t d) {
  if (d == 0) throw ConfigError("dimension must be >= 1");
  return linear(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

Combiner Combiner::tippett(std::size_t d) {
  if (d == 0) throw ConfigError("dimension must be >= 1");
  Combiner c;
  c.kind_ = CombinerKind::Tippett;
  c.dimension_ = d;
  c.weights_.assign(d, 1.0 / static_cast<double>(d));
  return c;
}

Combiner Combiner::power_mean(std::vector<double> weights, double gamma) {
  validate_weights(weights);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("power mean requires finite gamma > 0");
  }
  Combiner c;
  c.kind_ = CombinerKind::PowerMean;
  c.dimension_ = weights.size();
  c.weights_ = std::move(weights);
  c.gamma_ = gamma;
  return c;
}

Combiner Combiner::max_linear(std::vector<std::vector<std::size_t>> blocks,
                              std::vector<double> weights, std::size_t factors) {
  auto coeffs = std::make_shared<MaxLinearCoefficients>(
      MaxLinearCoefficients::build(std::move(blocks), weights, factors));
  Combiner c;
  c.kind_ = CombinerKind::MaxLinear;
  c.dimension_ = factors;
  c.weights_ = std::move(weights);
  c.max_linear_ = std::move(coeffs);
  return c;
}

const MaxLinearCoefficients& Combiner::max_linear_coefficients() const {
  if (!max_linear_) throw ConfigError("combiner is not max-linear");
  return *max_linear_;
}

double Combiner::evaluate(std::span<const double> x) const {
  require_dimension(dimension_, x.size());
  switch (kind_) {
    case CombinerKind::Linear: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
      return std::max(s, 0.0);
    }
    case CombinerKind::Tippett: {
      require_nonnegative(x, "tippett");
      return *std::max_element(x.begin(), x.end()) / static_cast<double>(dimension_);
    }
    case CombinerKind::PowerMean: {
      require_nonnegative(x, "power mean");
      // Scale by the largest entry so x^gamma cannot overflow.
      const double top = *std::max_element(x.begin(), x.end());
      if (top == 0.0) return 0.0;
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        s += weights_[i] * std::pow(x[i] / top, gamma_);
      }
      return top * std::pow(s, 1.0 / gamma_);
    }
    case CombinerKind::MaxLinear: {
      require_nonnegative(x, "max-linear");
      double best = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        best = std::max(best, max_linear_->a_w[j] * x[j]);
      }
      return best;
    }
  }
  throw ConfigError("unknown combiner kind");
}

std::string Combiner::describe() const {
  std::string out(to_string(kind_));
  switch (kind_) {
    case CombinerKind::Linear:
      return out + ":w=" + join_doubles(weights_);
    case CombinerKind::Tippett:
      return out + ":d=" + std::to_string(dimension_);
    case CombinerKind::PowerMean:
      return out + ":gamma=" + format_shortest(gamma_) + ";w=" + join_doubles(weights_);
    case CombinerKind::MaxLinear: {
      out += ":blocks=";
      const auto& blocks = max_linear_->blocks;
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += '/';
        for (std::size_t k = 0; k < blocks[i].size(); ++k) {
          if (k) out += ',';
          out += std::to_string(blocks[i][k] + 1);
        }
      }
      return out + ";w=" + join_doubles(weights_);
    }
  }
  return out;
}

bool homogeneity_check(const Combiner& combiner, std::span<const double> x, double c) {
  if (!(c > 0.0)) throw DomainError("homogeneity check needs c > 0");
  std::vector<double> scaled(x.begin(), x.end());
  for (double& v : scaled) v *= c;
  const double hx = combiner.evaluate(x);
  const double hcx = combiner.evaluate(scaled);
  return std::fabs(hcx - c * hx) <= 1e-10 * (1.0 + std::fabs(hx) * c);
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s) {
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + tmp + "'");
  }
  if (used != tmp.size()) throw ConfigError("not a number: '" + tmp + "'");
  return v;
}

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v == 0) {
    throw ConfigError("block index must be a positive integer: '" + std::string(s) + "'");
  }
  return v - 1;
}

}  // namespace

Combiner parse_combiner(std::string_view spec, std::size_t d) {
  const auto colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  std::vector<double> weights;
  double gamma = 1.0;
  bool have_gamma = false;
  std::vector<std::vector<std::size_t>> blocks;
  if (colon != std::string_view::npos) {
    for (auto item : split(spec.substr(colon + 1), ';')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("expected key=value in combiner spec: '" + std::string(item) + "'");
      }
      const auto key = item.substr(0, eq);
      const auto value = item.substr(eq + 1);
      if (key == "w") {
        for (auto v : split(value, ',')) weights.push_back(parse_double(v));
      } else if (key == "gamma") {
        gamma = parse_double(value);
        have_gamma = true;
      } else if (key == "blocks") {
        for (auto b : split(value, '/')) {
          auto& block = blocks.emplace_back();
          for (auto idx : split(b, ',')) block.push_back(parse_index(idx));
        }
      } else if (key == "d") {
        d = static_cast<std::size_t>(parse_double(value));
      } else {
        throw ConfigError("unknown combiner key '" + std::string(key) + "'");
      }
    }
  }
  auto equal = [](std::size_t n) {
    if (n == 0) throw ConfigError("cannot infer combiner dimension");
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  };
  if (kind == "linear") {
    return Combiner::linear(weights.empty() ? equal(d) : weights);
  }
  if (kind == "tippett") {
    return Combiner::tippett(d);
  }
  if (kind == "powermean") {
    if (!have_gamma) throw ConfigError("powermean needs gamma=<value>");
    return Combiner::power_mean(weights.empty() ? equal(d) : weights, gamma);
  }
  if (kind == "maxlinear") {
    if (blocks.empty()) {
      for (std::size_t j = 0; j < d; ++j) blocks.push_back({j});
    }
    std::size_t factors = d;
    for (const auto& b : blocks) {
      for (std::size_t j : b) factors = std::max(factors, j + 1);
    }
    if (weights.empty()) weights = equal(blocks.size());
    return Combiner::max_linear(std::move(blocks), std::move(weights), factors);
  }
  throw ConfigError("unknown combiner '" + std::string(kind) + "'");
}

CombinationTest::CombinationTest(TailScale scale, Combiner combiner)
    : scale_(scale), combiner_(std::move(combiner)) {
  const auto kind = combiner_.kind();
  if (scale == TailScale::Pareto1 && kind == CombinerKind::Linear) {
    kind_ = TestKind::PCT;
  } else if (scale == TailScale::Cauchy && kind == CombinerKind::Linear) {
    kind_ = TestKind::CCT;
  } else if (scale == TailScale::Frechet1 && kind == CombinerKind::Tippett) {
    kind_ = TestKind::Tippett;
  } else if (scale == TailScale::Frechet1 && kind == CombinerKind::MaxLinear) {
    kind_ = TestKind::FCT;
  } else if (scale == TailScale::Pareto1 && kind == CombinerKind::PowerMean) {
    kind_ = TestKind::PowerMean;
  } else {
    throw ConfigError("unsupported test: " + std::string(to_string(scale)) + " scale with " +
                      std::string(to_string(kind)) + " combiner");
  }
}

CombinationTest CombinationTest::pct(std::vector<double> weights) {
  return {TailScale::Pareto1, Combiner::linear(std::move(weights))};
}

CombinationTest CombinationTest::cct(std::vector<double> weights) {
  return {TailScale::Cauchy, Combiner::linear(std::move(weights))};
}

CombinationTest CombinationTest::tippett(std::size_t d) {
  return {TailScale::Frechet1, Combiner::tippett(d)};
}

CombinationTest CombinationTest::power_mean(std::vector<double> weights, double gamma) {
  return {TailScale::Pareto1, Combiner::power_mean(std::move(weights), gamma)};
}

CombinationTest CombinationTest::fct(std::vector<std::vector<std::size_t>> blocks,
                                     std::vector<double> weights, std::size_t factors) {
  return {TailScale::Frechet1,
          Combiner::max_linear(std::move(blocks), std::move(weights), factors)};
}

FctStatistic fct_statistic(const Combiner& max_linear, std::span<const double> p_raw) {
  const auto& coeffs = max_linear.max_linear_coefficients();
  require_dimension(coeffs.factors, p_raw.size());
  const auto w = max_linear.weights();
  double y_w = 0.0;
  for (std::size_t j = 0; j < coeffs.blocks.size(); ++j) {
    double p_min = 1.0;
    for (std::size_t i : coeffs.blocks[j]) p_min = std::min(p_min, clamp_pvalue(p_raw[i]));
    const double screened = sidak_screen(p_min, coeffs.blocks[j].size());
    y_w = std::max(y_w, w[j] * frechet_transform(screened));
  }
  return {y_w, coeffs.c_w};
}

double combined_pvalue(const CombinationTest& test, std::span<const double> p) {
  const Combiner& h = test.combiner();
  require_dimension(h.dimension(), p.size());
  const auto w = h.weights();
  switch (test.kind()) {
    case TestKind::PCT: {
      double t = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) t += w[i] / clamp_pvalue(p[i]);
      return t <= 1.0 ? 1.0 : 1.0 / t;
    }
    case TestKind::CCT: {
      double t = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) t += w[i] * cauchy_transform(p[i]);
      return tail_scale_survival(TailScale::Cauchy, t);
    }
    case TestKind::Tippett: {
      double p_min = 1.0;
      for (double pi : p) p_min = std::min(p_min, clamp_pvalue(pi));
      return sidak_screen(p_min, p.size());
    }
    case TestKind::FCT: {
      const auto stat = fct_statistic(h, p);
      return -std::expm1(-stat.c_w / stat.y_w);
    }
    case TestKind::PowerMean: {
      double top = 0.0;
      for (double pi : p) top = std::max(top, 1.0 / clamp_pvalue(pi));
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        s += w[i] * std::pow(1.0 / clamp_pvalue(p[i]) / top, h.gamma());
      }
      const double t = top * std::pow(s, 1.0 / h.gamma());
      return t <= 1.0 ? 1.0 : 1.0 / t;
    }
  }
  throw ConfigError("unknown test kind");
}

CombinationTest parse_test(std::string_view spec, std::size_t d) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string options =
      colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon));
  struct Entry {
    std::string_view name;
    TailScale scale;
    std::string_view combiner;
  };
  static constexpr Entry kTable[] = {
      {"pct", TailScale::Pareto1, "linear"},
      {"cct", TailScale::Cauchy, "linear"},
      {"tippett", TailScale::Frechet1, "tippett"},
      {"powermean", TailScale::Pareto1, "powermean"},
      {"fct", TailScale::Frechet1, "maxlinear"},
  };
  for (const auto& e : kTable) {
    if (e.name == name) {
      return {e.scale, parse_combiner(std::string(e.combiner) + options, d)};
    }
  }
  throw ConfigError("unknown test '" + std::string(name) +
                    "' (expected pct, cct, tippett, fct or powermean)");
}

}  // namespace tailcomb
