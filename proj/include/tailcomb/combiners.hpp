#pragma once

#include "tailcomb/transforms.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailcomb {

enum class CombinerKind { Linear, Tippett, PowerMean, MaxLinear };

std::string_view to_string(CombinerKind kind);

/// Max-linear coefficients of the block-screening map.
///
/// Row i (a test) has a_{i,j} = 1/|I_i| for every factor j in block I_i.
/// a_w(j) = max_i w_i a_{i,j} and c_w = sum_j a_w(j).
struct MaxLinearCoefficients {
  std::size_t tests = 0;
  std::size_t factors = 0;
  std::vector<std::vector<std::size_t>> blocks;  // 0-based factor indices
  std::vector<double> a;                         // tests x factors, row-major
  std::vector<double> a_w;
  double c_w = 0.0;

  double at(std::size_t i, std::size_t j) const { return a[i * factors + j]; }

  // Validates blocks (non-empty, in range, covering every factor) and
  // computes a, a_w, c_w.
  static MaxLinearCoefficients build(std::vector<std::vector<std::size_t>> blocks,
                                     std::span<const double> weights,
                                     std::size_t factors);
};

/// A 1-homogeneous combining function h: R^d -> R_+.
///
/// Immutable once built; copies share the max-linear coefficients.
class Combiner {
 public:
  static Combiner linear(std::vector<double> weights);
  static Combiner equal_linear(std::size_t d);
  static Combiner tippett(std::size_t d);
  static Combiner power_mean(std::vector<double> weights, double gamma);
  // Blocks are 0-based index sets over `factors` base tests; weights are per
  // block.
  static Combiner max_linear(std::vector<std::vector<std::size_t>> blocks,
                             std::vector<double> weights, std::size_t factors);

  CombinerKind kind() const noexcept { return kind_; }
  // Length of the argument of evaluate(): d, or the factor count n for
  // max-linear.
  std::size_t dimension() const noexcept { return dimension_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double gamma() const noexcept { return gamma_; }
  const MaxLinearCoefficients& max_linear_coefficients() const;

  // Linear: (sum w_i x_i)_+; Tippett: max_i x_i / d;
  // PowerMean: (sum w_i x_i^gamma)^(1/gamma); MaxLinear: max_j a_w(j) x_j.
  double evaluate(std::span<const double> x) const;

  std::string describe() const;

 private:
  Combiner() = default;

  CombinerKind kind_ = CombinerKind::Linear;
  std::size_t dimension_ = 0;
  std::vector<double> weights_;
  double gamma_ = 1.0;
  std::shared_ptr<const MaxLinearCoefficients> max_linear_;
};

// |h(c x) - c h(x)| <= 1e-10 (1 + |h(x)| c).
bool homogeneity_check(const Combiner& combiner, std::span<const double> x, double c);

// Parses "linear", "linear:w=0.2,0.8", "tippett", "powermean:gamma=2;w=0.5,0.5",
// "maxlinear:blocks=1,2/3,4;w=0.5,0.5". Block indices are 1-based. `d` is the
// input dimension used when weights are omitted (equal weights).
Combiner parse_combiner(std::string_view spec, std::size_t d);

enum class TestKind { PCT, CCT, Tippett, FCT, PowerMean };

std::string_view to_string(TestKind kind);

/// A tail scale paired with a combiner, plus the anchor that turns h(X) into
/// a combined p-value.
class CombinationTest {
 public:
  // Throws ConfigError for pairings without an anchor.
  CombinationTest(TailScale scale, Combiner combiner);

  static CombinationTest pct(std::vector<double> weights);
  static CombinationTest cct(std::vector<double> weights);
  static CombinationTest tippett(std::size_t d);
  static CombinationTest power_mean(std::vector<double> weights, double gamma);
  static CombinationTest fct(std::vector<std::vector<std::size_t>> blocks,
                             std::vector<double> weights, std::size_t factors);

  TestKind kind() const noexcept { return kind_; }
  TailScale scale() const noexcept { return scale_; }
  const Combiner& combiner() const noexcept { return combiner_; }
  // Number of input p-values.
  std::size_t dimension() const noexcept { return combiner_.dimension(); }
  std::string_view name() const { return to_string(kind_); }

 private:
  TestKind kind_;
  TailScale scale_;
  Combiner combiner_;
};

// Combined p-value: transform marginally, evaluate h, invert the anchor
// survival. Raw p-values are clamped like PValueVector does.
double combined_pvalue(const CombinationTest& test, std::span<const double> p);
inline double combined_pvalue(const CombinationTest& test, const PValueVector& p) {
  return combined_pvalue(test, p.values());
}

// Parses a test name with optional combiner options: "pct", "cct:w=0.2,0.8",
// "tippett", "powermean:gamma=2", "fct:blocks=1,2/3,4;w=0.5,0.5". `d` is the
// number of input p-values. FCT without blocks uses one block per input.
CombinationTest parse_test(std::string_view spec, std::size_t d);

struct FctStatistic {
  double y_w;
  double c_w;
};

// Sidak-screened block minima mapped to Frechet scale, Y_w = max_j w_j Y_j.
FctStatistic fct_statistic(const Combiner& max_linear, std::span<const double> p_raw);

}  // namespace tailcomb
