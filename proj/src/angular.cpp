#include "tailcomb/angular.hpp"

#include "parallel.hpp"
#include "tailcomb/error.hpp"
#include "tailcomb/nnls.hpp"
#include "tailcomb/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tailcomb {
namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kFeasibilityTolerance = 1e-9;

double positive_power(double v, double beta) {
  if (v <= 0.0) return 0.0;
  return beta == 1.0 ? v : std::pow(v, beta);
}

}  // namespace

DiscreteAngularMeasure::DiscreteAngularMeasure(double beta, std::size_t d,
                                               std::vector<double> atoms,
                                               std::vector<double> weights, bool is_signed)
    : beta_(beta), d_(d), atoms_(std::move(atoms)), weights_(std::move(weights)),
      signed_(is_signed) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("angular measure needs finite beta > 0");
  }
  if (d == 0) throw ConfigError("angular measure needs dimension >= 1");
  if (weights_.empty()) throw ConfigError("angular measure needs at least one atom");
  if (atoms_.size() != weights_.size() * d) {
    throw ConfigError("angular measure: atom matrix does not match weights and dimension");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("angular measure weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::fabs(total - 1.0) > kWeightSumTolerance) {
    throw ConfigError("angular measure weights must sum to 1 (got " + std::to_string(total) +
                      ")");
  }
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    double norm = 0.0;
    for (double v : atom(k)) {
      if (!std::isfinite(v)) throw ConfigError("angular measure atom is not finite");
      if (!signed_ && v < 0.0) {
        throw ConfigError("unsigned angular measure has a negative coordinate in atom " +
                          std::to_string(k + 1));
      }
      norm += std::fabs(v);
    }
    if (std::fabs(norm - 1.0) > kAtomNormTolerance) {
      throw ConfigError("atom " + std::to_string(k + 1) + " is not on the unit L1 sphere");
    }
  }
}

DiscreteAngularMeasure DiscreteAngularMeasure::from_rows(
    double beta, const std::vector<std::vector<double>>& atoms, std::vector<double> weights,
    bool is_signed) {
  if (atoms.empty()) throw ConfigError("angular measure needs at least one atom");
  const std::size_t d = atoms.front().size();
  std::vector<double> flat;
  flat.reserve(atoms.size() * d);
  for (const auto& row : atoms) {
    if (row.size() != d) throw ConfigError("angular measure atoms have unequal lengths");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return {beta, d, std::move(flat), std::move(weights), is_signed};
}

DiscreteAngularMeasure DiscreteAngularMeasure::axes(std::size_t d, double beta) {
  std::vector<double> atoms(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) atoms[i * d + i] = 1.0;
  return {beta, d, std::move(atoms), std::vector<double>(d, 1.0 / static_cast<double>(d)),
          false};
}

DiscreteAngularMeasure DiscreteAngularMeasure::with_beta(double beta) const {
  return {beta, d_, atoms_, weights_, signed_};
}

std::vector<double> DiscreteAngularMeasure::margin_moments() const {
  std::vector<double> moments(d_, 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const auto theta = atom(k);
    for (std::size_t i = 0; i < d_; ++i) {
      moments[i] += weights_[k] * positive_power(theta[i], beta_);
    }
  }
  return moments;
}

MarginConstraint margin_constraint(const DiscreteAngularMeasure& m, double relative_tolerance) {
  const auto moments = m.margin_moments();
  const auto [lo, hi] = std::minmax_element(moments.begin(), moments.end());
  if (!(*lo > 0.0)) {
    throw ConfigError("angular measure has a vanishing margin moment E[(Theta_i)_+^beta]");
  }
  if (*hi - *lo > relative_tolerance * *hi) {
    throw ConfigError("angular measure is not standardized: margin moments range over [" +
                      std::to_string(*lo) + ", " + std::to_string(*hi) + "]");
  }
  return {moments.front(), relative_tolerance};
}

double asymptotic_ratio(const Combiner& combiner, const DiscreteAngularMeasure& m) {
  if (combiner.dimension() != m.dimension()) {
    throw ConfigError("combiner dimension " + std::to_string(combiner.dimension()) +
                      " does not match measure dimension " + std::to_string(m.dimension()));
  }
  const double denominator = margin_constraint(m).target;
  const double beta = m.beta();
  double numerator = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    numerator += m.weights()[k] * positive_power(combiner.evaluate(m.atom(k)), beta);
  }
  if (combiner.kind() == CombinerKind::MaxLinear) {
    numerator /= std::pow(combiner.max_linear_coefficients().c_w, beta);
  }
  return numerator / denominator;
}

std::string_view to_string(Honesty h) {
  switch (h) {
    case Honesty::Calibrated: return "calibrated";
    case Honesty::StrictlyHonest: return "strictly_honest";
    case Honesty::Liberal: return "liberal";
  }
  return "unknown";
}

Honesty classify(const Combiner& combiner, const DiscreteAngularMeasure& m, double tol) {
  if (!(tol >= 0.0)) throw ConfigError("classification tolerance must be >= 0");
  const double ratio = asymptotic_ratio(combiner, m);
  if (std::fabs(ratio - 1.0) <= tol) return Honesty::Calibrated;
  return ratio < 1.0 ? Honesty::StrictlyHonest : Honesty::Liberal;
}

bool cct_support_condition(const DiscreteAngularMeasure& m) {
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m.weights()[k] <= 0.0) continue;
    const auto theta = m.atom(k);
    const bool nonneg = std::all_of(theta.begin(), theta.end(), [](double v) { return v >= 0.0; });
    const bool nonpos = std::all_of(theta.begin(), theta.end(), [](double v) { return v <= 0.0; });
    if (!nonneg && !nonpos) return false;
  }
  return true;
}

DiscreteAngularMeasure factor_model_measure(const Eigen::MatrixXd& a, double beta) {
  if (a.rows() == 0 || a.cols() == 0) throw ConfigError("factor matrix must be non-empty");
  if (!(beta > 0.0)) throw ConfigError("factor model needs beta > 0");
  const auto d = static_cast<std::size_t>(a.rows());
  const auto p = static_cast<std::size_t>(a.cols());
  std::vector<double> atoms(p * d);
  std::vector<double> weights(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = a.col(static_cast<Eigen::Index>(j));
    if ((col.array() < 0.0).any()) {
      throw ConfigError("factor matrix must be nonnegative");
    }
    const double norm = col.sum();
    if (!(norm > 0.0)) {
      throw ConfigError("factor matrix column " + std::to_string(j + 1) + " is zero");
    }
    for (std::size_t i = 0; i < d; ++i) atoms[j * d + i] = col(static_cast<Eigen::Index>(i)) / norm;
    weights[j] = std::pow(norm, beta);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return {beta, d, std::move(atoms), std::move(weights), false};
}

namespace {

struct SolveAttempt {
  Eigen::VectorXd weights;
  double residual;
  bool feasible;
};

// Rows 0..d-2: E[m_{i+1}] - E[m_0] = 0; last row: total mass 1.
SolveAttempt solve_equal_margins(std::span<const double> atoms, std::size_t k_atoms,
                                 std::size_t d, double beta) {
  const auto rows = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(k_atoms));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  rhs(rows - 1) = 1.0;
  for (std::size_t k = 0; k < k_atoms; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const double first = positive_power(atoms[k * d], beta);
    for (std::size_t i = 1; i < d; ++i) {
      system(static_cast<Eigen::Index>(i - 1), col) = positive_power(atoms[k * d + i], beta) - first;
    }
    system(rows - 1, col) = 1.0;
  }
  const auto solution = nnls(system, rhs);
  Eigen::VectorXd w = solution.x;
  double common = 0.0;
  const double total = w.sum();
  if (total > 0.0) {
    w /= total;
    for (std::size_t k = 0; k < k_atoms; ++k) {
      common += w(static_cast<Eigen::Index>(k)) * positive_power(atoms[k * d], beta);
    }
  }
  const bool feasible = solution.residual_norm <= kFeasibilityTolerance && common > 0.0;
  return {w, solution.residual_norm, feasible};
}

}  // namespace

StandardizeResult standardize_weights(std::span<const double> atoms, std::size_t d, double beta,
                                      bool is_signed) {
  if (d == 0 || atoms.empty() || atoms.size() % d != 0) {
    throw ConfigError("standardize_weights: atoms must be a non-empty K x d matrix");
  }
  const std::size_t k_atoms = atoms.size() / d;
  // Validates sphere membership and signs up front.
  DiscreteAngularMeasure probe(beta, d, std::vector<double>(atoms.begin(), atoms.end()),
                               std::vector<double>(k_atoms, 1.0 / static_cast<double>(k_atoms)),
                               is_signed);
  (void)probe;

  StandardizeResult result;
  auto attempt = solve_equal_margins(atoms, k_atoms, d, beta);
  std::vector<double> all_atoms(atoms.begin(), atoms.end());
  if (!attempt.feasible) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) all_atoms.push_back(i == j ? 1.0 : 0.0);
    }
    result.augmented = true;
    attempt = solve_equal_margins(all_atoms, k_atoms + d, d, beta);
  }
  result.residual = attempt.residual;
  if (!attempt.feasible) {
    result.report = "no nonnegative weights equalize the margins (residual " +
                    std::to_string(attempt.residual) + ")";
    return result;
  }
  std::vector<double> weights(attempt.weights.data(),
                              attempt.weights.data() + attempt.weights.size());
  result.measure.emplace(beta, d, std::move(all_atoms), std::move(weights), is_signed);
  result.report = result.augmented ? "feasible after adding the unit vectors" : "feasible";
  return result;
}

double t_copula_lambda(double nu, double rho) {
  if (!(nu > 0.0)) throw DomainError("t copula needs nu > 0");
  if (!(rho > -1.0 && rho < 1.0)) throw DomainError("t copula needs |rho| < 1");
  const double arg = std::sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho));
  return 2.0 * StudentT(nu + 1.0).cdf(-arg);
}

VectorSampler atom_sampler(const DiscreteAngularMeasure& m) {
  std::vector<double> cumulative(m.size());
  std::partial_sum(m.weights().begin(), m.weights().end(), cumulative.begin());
  std::vector<double> atoms(m.atoms().begin(), m.atoms().end());
  const std::size_t d = m.dimension();
  return [cumulative = std::move(cumulative), atoms = std::move(atoms), d](
             RngStream& rng, std::span<double> out) {
    const double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
    if (k >= cumulative.size()) k = cumulative.size() - 1;
    std::copy_n(atoms.begin() + static_cast<std::ptrdiff_t>(k * d), d, out.begin());
  };
}

RatioEstimate breiman_ratio_mc(const VectorSampler& sampler, std::size_t d,
                               const Combiner& combiner, double beta, std::size_t n,
                               std::uint64_t seed, unsigned workers) {
  if (n < 2) throw ConfigError("breiman_ratio_mc needs n >= 2");
  if (combiner.dimension() != d) throw ConfigError("combiner dimension does not match sampler");
  std::vector<double> numer(n);
  std::vector<double> denom(n);
  detail::parallel_chunks(n, workers, 4096, [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<double> w(d);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, i);
      sampler(rng, w);
      numer[i] = positive_power(combiner.evaluate(w), beta);
      denom[i] = positive_power(w[0], beta);
    }
  });
  const double sum_n = std::accumulate(numer.begin(), numer.end(), 0.0);
  const double sum_d = std::accumulate(denom.begin(), denom.end(), 0.0);
  if (!(sum_d > 0.0)) {
    throw ConfigError("degenerate sampler: first coordinate never positive");
  }
  RatioEstimate est;
  est.samples = n;
  est.estimate = sum_n / sum_d;
  // Delete-one jackknife.
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dd = sum_d - denom[i];
    loo[i] = dd > 0.0 ? (sum_n - numer[i]) / dd : est.estimate;
  }
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  est.standard_error = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  return est;
}

}  // namespace tailcomb
