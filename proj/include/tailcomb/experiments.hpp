#pragma once

#include "tailcomb/angular.hpp"
#include "tailcomb/combiners.hpp"
#include "tailcomb/samplers.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailcomb {

/// Thread count and scheduling granularity. Neither affects results: every
/// replicate draws from its own stream (seed, replicate index) and all
/// reductions are integer sums or fixed-order.
struct ExecutionOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
  std::size_t chunk_size = 4096;
};

inline constexpr std::size_t kDefaultReplicates = 1000000;

struct CalibrationRecord {
  std::string test;
  std::string model;
  std::optional<double> nu;
  std::size_t d = 0;
  std::string sigma_kind;  // "NA" when the model has no shape matrix
  std::optional<double> rho;
  double alpha = 0.0;
  std::uint64_t n_sims = 0;
  std::uint64_t rejections = 0;
  double alpha_hat_ratio = 0.0;
  double se_ratio = 0.0;
  std::uint64_t seed = 0;
};

// Fills alpha_hat_ratio = (rejections/n)/alpha and
// se_ratio = sqrt(ah (1 - ah) / n) / alpha.
void finalize_ratio(CalibrationRecord& r);

// Rejects when combined_pvalue <= alpha. Throws ConfigError for models that
// emit no p-values or tests whose dimension does not match the model.
std::vector<CalibrationRecord> run_calibration(const ModelSpec& model,
                                               std::span<const CombinationTest> tests,
                                               std::span<const double> alphas, std::size_t n,
                                               std::uint64_t seed,
                                               const ExecutionOptions& exec = {});

// Human-readable warnings (n * alpha < 50, alpha outside (0, 0.5]).
std::vector<std::string> calibration_warnings(std::size_t n, std::span<const double> alphas);

struct TailScaleEstimate {
  double threshold = 0.0;
  std::uint64_t n_sims = 0;
  std::uint64_t exceedances = 0;
  double estimate = 0.0;  // t^beta * P[h(X) > t]
  double standard_error = 0.0;
};

// Direct Monte Carlo of t^beta P[h(X) > t] on raw model vectors. Negative
// coordinates are set to zero before non-linear combiners.
std::vector<TailScaleEstimate> run_tail_scale(const ModelSpec& model, const Combiner& combiner,
                                              std::span<const double> thresholds, std::size_t n,
                                              std::uint64_t seed,
                                              const ExecutionOptions& exec = {});

// Closed-form limit of t^beta P[h(X) > t] where one exists:
// Breiman sum_k p_k h(theta_k)^beta; linear and max-linear factor models
// sum_j h(a_j)^beta.
std::optional<double> tail_scale_limit(const ModelSpec& model, const Combiner& combiner);

enum class EigenDirection { Top, Bottom };

std::string_view to_string(EigenDirection d);

struct PowerConfig {
  double nu = 10.0;
  std::size_t d = 10;
  SigmaSpec sigma{SigmaKind::AutoRegressive, 0.5, {}};
  EigenDirection direction = EigenDirection::Bottom;
  std::vector<double> effects;  // must contain 0
  double alpha = 0.05;
  std::size_t n = 100000;
  std::uint64_t seed = 42;
  std::vector<CombinationTest> tests;
};

struct PowerRecord {
  std::string test;
  double effect_size = 0.0;
  std::string mu_direction;
  double nu = 0.0;
  std::size_t d = 0;
  double alpha = 0.0;
  std::uint64_t n_sims = 0;
  std::uint64_t rejections = 0;
  double power = 0.0;
  std::optional<double> power_ratio_vs_baseline;
  std::uint64_t seed = 0;
};

// Name of the likelihood-ratio baseline rows.
inline constexpr std::string_view kBaselineTest = "np_lr";

// Unit eigenvector of Sigma^{-1} for the largest (Top) or smallest (Bottom)
// eigenvalue, signed so its coordinates sum to a nonnegative value.
Eigen::VectorXd precision_eigenvector(const Eigen::MatrixXd& sigma, EigenDirection direction);

// Power under T ~ t_nu(mu = effect * v, Sigma). The baseline is the
// simple-vs-simple likelihood ratio at the true mu with its threshold set to
// the empirical (1 - alpha) quantile of a null run on a seed-offset stream.
std::vector<PowerRecord> run_power(const PowerConfig& config, const ExecutionOptions& exec = {});

// "start:stop:count" (inclusive linear grid) or a comma list.
std::vector<double> parse_effect_grid(std::string_view text);

struct FalsifierReport {
  std::string combiner;
  std::size_t d = 0;
  double beta = 1.0;
  std::optional<DiscreteAngularMeasure> best_measure;
  double best_ratio = 1.0;
  double deviation = 0.0;
  std::uint64_t evaluations = 0;
  std::uint64_t seed = 0;
};

// Random search over atom sets on the simplex for the largest |ratio - 1|.
// Each candidate's weights come from standardize_weights.
FalsifierReport run_falsifier(const Combiner& combiner, std::size_t d, double beta,
                              std::size_t n_atoms, std::uint64_t budget, std::uint64_t seed);

std::string falsifier_report_json(const FalsifierReport& report);

// CSV surface. Floats use 17 significant digits, missing values are "NA".
std::string calibration_csv(std::vector<CalibrationRecord> records);
std::vector<CalibrationRecord> parse_calibration_csv(std::string_view text);
std::string power_csv(std::vector<PowerRecord> records);
std::vector<PowerRecord> parse_power_csv(std::string_view text);
std::string tail_scale_csv(std::string_view model, std::string_view combiner,
                           const std::vector<TailScaleEstimate>& estimates,
                           std::optional<double> limit, std::uint64_t seed);

void emit_csv(const std::vector<CalibrationRecord>& records, const std::string& path);
void emit_csv(const std::vector<PowerRecord>& records, const std::string& path);

}  // namespace tailcomb
