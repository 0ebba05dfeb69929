#pragma once

#include "tailcomb/angular.hpp"
#include "tailcomb/rng.hpp"
#include "tailcomb/transforms.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tailcomb {

enum class SigmaKind { AutoRegressive, Exchangeable, Dense };

std::string_view to_string(SigmaKind kind);

/// Shape matrix recipe: rho^|i-j|, exchangeable (1 on the diagonal, rho off
/// it), or an explicit matrix.
struct SigmaSpec {
  SigmaKind kind = SigmaKind::AutoRegressive;
  double rho = 0.0;
  Eigen::MatrixXd dense;  // used when kind == Dense
};

// Validated SPD matrix with unit diagonal.
Eigen::MatrixXd sigma_build(SigmaKind kind, double rho, std::size_t d);
Eigen::MatrixXd sigma_build(const SigmaSpec& spec, std::size_t d);

struct MultivariateT {
  double nu = 1.0;
  SigmaSpec sigma;
  std::vector<double> location;  // empty means zero
};

struct GaussianCopula {
  SigmaSpec sigma;
};

// X = Y * Theta, Y standard beta-Pareto, Theta ~ measure (unsigned).
struct BreimanDiscrete {
  DiscreteAngularMeasure measure;
};

// X = A Z with iid standard beta-Pareto factors. Emits no p-values.
struct LinearFactor {
  double beta = 1.0;
  Eigen::MatrixXd a;
};

// Y_i = max_j a_ij Z_j with iid standard 1-Frechet factors. When
// `factor_measure` is set the factors are instead Frechet-margined Breiman
// draws with that angular measure, and no p-values are emitted.
struct MaxLinearFrechet {
  Eigen::MatrixXd a;
  std::optional<DiscreteAngularMeasure> factor_measure;
};

// X = sum_k gamma_k s_k C_k with iid standard Cauchy C_k over the symmetrized
// atom set.
struct S1SDiscrete {
  std::size_t d = 0;
  std::vector<double> atoms;   // K x d row-major, ||s_k||_1 = 1
  std::vector<double> scales;  // gamma_k > 0
  bool standardized = true;    // every coordinate scale must equal 1
};

enum class ModelKind {
  MultivariateT,
  GaussianCopula,
  BreimanDiscrete,
  LinearFactor,
  MaxLinearFrechet,
  S1SDiscrete
};

std::string_view to_string(ModelKind kind);

using ModelParameters = std::variant<MultivariateT, GaussianCopula, BreimanDiscrete,
                                     LinearFactor, MaxLinearFrechet, S1SDiscrete>;

/// A null model for the global-null calibration harness.
struct ModelSpec {
  std::size_t d = 0;
  ModelParameters parameters;

  ModelKind kind() const;
};

// Replaces the atom list by its symmetric hull: every atom paired with its
// negation, each carrying half the scale.
S1SDiscrete symmetrize(const S1SDiscrete& spec);

// Per-coordinate Cauchy scales sum_k gamma_k |s_k,i|.
std::vector<double> s1s_coordinate_scales(const S1SDiscrete& spec);

// Normalized spectral measure of the symmetrized S1S model.
DiscreteAngularMeasure s1s_angular_measure(const S1SDiscrete& spec);

/// Compiled sampler for a ModelSpec.
///
/// Holds factorized shape matrices and exact marginal survival functions.
/// Stateless given a stream, so one instance serves any number of threads.
class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  ModelKind kind() const { return spec_.kind(); }
  std::size_t dimension() const noexcept { return spec_.d; }
  // False for models whose margins have no closed form.
  bool emits_pvalues() const noexcept { return emits_pvalues_; }
  // Tail index of the raw vector (nu for the t model; NaN for Gaussian).
  double tail_index() const noexcept { return tail_index_; }

  // Raw vector only.
  void draw_raw(RngStream& rng, std::span<double> x) const;
  // Raw vector and exact marginal p-values (requires emits_pvalues()).
  void draw(RngStream& rng, std::span<double> x, std::span<double> p) const;

  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }

 private:
  void draw_impl(RngStream& rng, std::span<double> x, std::span<double> p, bool want_p) const;
  void gaussian(RngStream& rng, std::span<double> out) const;
  std::size_t pick_atom(RngStream& rng) const;
  double breiman_survival(std::size_t i, double x) const;

  ModelSpec spec_;
  bool emits_pvalues_ = true;
  double tail_index_ = 1.0;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;  // lower triangular factor of sigma_
  std::optional<StudentT> student_;
  // Breiman / factor measure data.
  std::vector<double> cumulative_;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  double beta_ = 1.0;
  std::vector<double> zero_mass_;      // P[X_i = 0]
  std::vector<double> positive_mass_;  // P[X_i > 0]
  // Linear / max-linear factor matrix and row sums.
  Eigen::MatrixXd a_;
  std::vector<double> row_sums_;
  // S1S.
  std::vector<double> s1s_scales_;
};

}  // namespace tailcomb
