#include "tailcomb/samplers.hpp"

#include "tailcomb/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tailcomb {
namespace {

void require_nonnegative(const Eigen::MatrixXd& a, std::string_view what) {
  if (a.size() == 0) throw ConfigError(std::string(what) + " matrix must be non-empty");
  if (!a.allFinite() || (a.array() < 0.0).any()) {
    throw ConfigError(std::string(what) + " matrix must be finite and nonnegative");
  }
}

}  // namespace

std::string_view to_string(SigmaKind kind) {
  switch (kind) {
    case SigmaKind::AutoRegressive: return "ar";
    case SigmaKind::Exchangeable: return "exch";
    case SigmaKind::Dense: return "dense";
  }
  return "unknown";
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MultivariateT: return "multivariate_t";
    case ModelKind::GaussianCopula: return "gaussian_copula";
    case ModelKind::BreimanDiscrete: return "breiman_discrete";
    case ModelKind::LinearFactor: return "linear_factor";
    case ModelKind::MaxLinearFrechet: return "max_linear_frechet";
    case ModelKind::S1SDiscrete: return "s1s_discrete";
  }
  return "unknown";
}

ModelKind ModelSpec::kind() const { return static_cast<ModelKind>(parameters.index()); }

Eigen::MatrixXd sigma_build(SigmaKind kind, double rho, std::size_t d) {
  if (d == 0) throw ConfigError("shape matrix dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd sigma(n, n);
  switch (kind) {
    case SigmaKind::AutoRegressive:
      if (!(std::fabs(rho) < 1.0)) throw DomainError("autoregressive shape needs |rho| < 1");
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
      }
      break;
    case SigmaKind::Exchangeable: {
      const double lower = d > 1 ? -1.0 / static_cast<double>(d - 1) : -1.0;
      if (!(rho > lower && rho < 1.0)) {
        throw DomainError("exchangeable shape needs rho in (-1/(d-1), 1)");
      }
      sigma.setConstant(rho);
      sigma.diagonal().setOnes();
      break;
    }
    case SigmaKind::Dense:
      throw ConfigError("dense shape matrices must be given explicitly");
  }
  return sigma;
}

Eigen::MatrixXd sigma_build(const SigmaSpec& spec, std::size_t d) {
  if (spec.kind != SigmaKind::Dense) return sigma_build(spec.kind, spec.rho, d);
  const Eigen::MatrixXd& m = spec.dense;
  const auto n = static_cast<Eigen::Index>(d);
  if (m.rows() != n || m.cols() != n) throw ConfigError("dense shape matrix must be d x d");
  if (!m.allFinite()) throw ConfigError("dense shape matrix must be finite");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("dense shape matrix must be symmetric");
  }
  if ((m.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw ConfigError("dense shape matrix must have a unit diagonal");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success) {
    throw ConfigError("dense shape matrix is not positive definite");
  }
  return m;
}

S1SDiscrete symmetrize(const S1SDiscrete& spec) {
  if (spec.d == 0 || spec.atoms.size() != spec.scales.size() * spec.d || spec.scales.empty()) {
    throw ConfigError("S1S spec: atoms must be K x d with one scale per atom");
  }
  S1SDiscrete out;
  out.d = spec.d;
  out.standardized = spec.standardized;
  for (std::size_t k = 0; k < spec.scales.size(); ++k) {
    const double g = spec.scales[k];
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("S1S scales must be positive");
    double norm = 0.0;
    for (std::size_t i = 0; i < spec.d; ++i) norm += std::fabs(spec.atoms[k * spec.d + i]);
    if (std::fabs(norm - 1.0) > kAtomNormTolerance) {
      throw ConfigError("S1S atom " + std::to_string(k + 1) + " is not on the unit L1 sphere");
    }
    for (double sign : {1.0, -1.0}) {
      for (std::size_t i = 0; i < spec.d; ++i) {
        out.atoms.push_back(sign * spec.atoms[k * spec.d + i]);
      }
      out.scales.push_back(0.5 * g);
    }
  }
  return out;
}

std::vector<double> s1s_coordinate_scales(const S1SDiscrete& spec) {
  std::vector<double> scales(spec.d, 0.0);
  for (std::size_t k = 0; k < spec.scales.size(); ++k) {
    for (std::size_t i = 0; i < spec.d; ++i) {
      scales[i] += spec.scales[k] * std::fabs(spec.atoms[k * spec.d + i]);
    }
  }
  return scales;
}

DiscreteAngularMeasure s1s_angular_measure(const S1SDiscrete& spec) {
  const S1SDiscrete sym = symmetrize(spec);
  const double total = std::accumulate(sym.scales.begin(), sym.scales.end(), 0.0);
  std::vector<double> weights;
  weights.reserve(sym.scales.size());
  for (double g : sym.scales) weights.push_back(g / total);
  return {1.0, sym.d, sym.atoms, std::move(weights), true};
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  const std::size_t d = spec_.d;
  if (d == 0) throw ConfigError("model dimension must be >= 1");

  auto set_measure = [this](const DiscreteAngularMeasure& m) {
    if (m.is_signed()) throw ConfigError("Breiman construction needs an unsigned measure");
    atoms_.assign(m.atoms().begin(), m.atoms().end());
    weights_.assign(m.weights().begin(), m.weights().end());
    beta_ = m.beta();
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
    const std::size_t dim = m.dimension();
    positive_mass_.assign(dim, 0.0);
    zero_mass_.assign(dim, 0.0);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        (atoms_[k * dim + i] > 0.0 ? positive_mass_ : zero_mass_)[i] += weights_[k];
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(positive_mass_[i] > 0.0)) {
        throw ConfigError("degenerate margin: coordinate " + std::to_string(i + 1) +
                          " is zero in every atom");
      }
    }
  };

  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, MultivariateT>) {
          if (!(params.nu > 0.0) || !std::isfinite(params.nu)) {
            throw ConfigError("multivariate t needs finite nu > 0");
          }
          if (!params.location.empty() && params.location.size() != d) {
            throw ConfigError("multivariate t location must have length d");
          }
          sigma_ = sigma_build(params.sigma, d);
          student_.emplace(params.nu);
          tail_index_ = params.nu;
        } else if constexpr (std::is_same_v<T, GaussianCopula>) {
          sigma_ = sigma_build(params.sigma, d);
          tail_index_ = std::numeric_limits<double>::quiet_NaN();
        } else if constexpr (std::is_same_v<T, BreimanDiscrete>) {
          if (params.measure.dimension() != d) {
            throw ConfigError("Breiman measure dimension does not match d");
          }
          set_measure(params.measure);
          tail_index_ = beta_;
        } else if constexpr (std::is_same_v<T, LinearFactor>) {
          require_nonnegative(params.a, "linear factor");
          if (static_cast<std::size_t>(params.a.rows()) != d) {
            throw ConfigError("linear factor matrix must have d rows");
          }
          if (!(params.beta > 0.0)) throw ConfigError("linear factor model needs beta > 0");
          for (Eigen::Index j = 0; j < params.a.cols(); ++j) {
            if (!(params.a.col(j).sum() > 0.0)) {
              throw ConfigError("linear factor matrix has a zero column");
            }
          }
          a_ = params.a;
          beta_ = params.beta;
          tail_index_ = params.beta;
          emits_pvalues_ = false;
        } else if constexpr (std::is_same_v<T, MaxLinearFrechet>) {
          require_nonnegative(params.a, "max-linear");
          if (static_cast<std::size_t>(params.a.rows()) != d) {
            throw ConfigError("max-linear matrix must have d rows");
          }
          a_ = params.a;
          row_sums_.resize(d);
          for (std::size_t i = 0; i < d; ++i) {
            row_sums_[i] = a_.row(static_cast<Eigen::Index>(i)).sum();
            if (!(row_sums_[i] > 0.0)) {
              throw ConfigError("max-linear matrix has a zero row " + std::to_string(i + 1));
            }
          }
          if (params.factor_measure) {
            if (params.factor_measure->dimension() != static_cast<std::size_t>(a_.cols())) {
              throw ConfigError("factor measure dimension must equal the factor count");
            }
            set_measure(*params.factor_measure);
            emits_pvalues_ = false;
          }
          tail_index_ = 1.0;
        } else if constexpr (std::is_same_v<T, S1SDiscrete>) {
          if (params.d != d) throw ConfigError("S1S dimension does not match d");
          S1SDiscrete sym = symmetrize(params);
          s1s_scales_ = s1s_coordinate_scales(sym);
          for (std::size_t i = 0; i < d; ++i) {
            if (!(s1s_scales_[i] > 0.0)) {
              throw ConfigError("S1S coordinate " + std::to_string(i + 1) + " has zero scale");
            }
            if (params.standardized && std::fabs(s1s_scales_[i] - 1.0) > 1e-9) {
              throw ConfigError("S1S coordinate " + std::to_string(i + 1) +
                                " has scale " + std::to_string(s1s_scales_[i]) +
                                " but the model is flagged standardized");
            }
          }
          atoms_ = std::move(sym.atoms);
          weights_ = std::move(sym.scales);
          tail_index_ = 1.0;
        }
      },
      spec_.parameters);

  if (sigma_.size() > 0) {
    chol_ = Eigen::LLT<Eigen::MatrixXd>(sigma_).matrixL();
  }
}

void Model::gaussian(RngStream& rng, std::span<double> out) const {
  const std::size_t d = spec_.d;
  double xi[64];
  std::vector<double> heap;
  double* z = xi;
  if (d > 64) {
    heap.resize(d);
    z = heap.data();
  }
  for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      s += chol_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
    }
    out[i] = s;
  }
}

std::size_t Model::pick_atom(RngStream& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(k, cumulative_.size() - 1);
}

// P[X_i > x] = sum_k p_k min(1, (theta_ki / x)^beta) for x > 0.
double Model::breiman_survival(std::size_t i, double x) const {
  const std::size_t dim = positive_mass_.size();
  double s = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double theta = atoms_[k * dim + i];
    if (theta <= 0.0) continue;
    if (x <= theta) {
      s += weights_[k];
    } else {
      const double r = theta / x;
      s += weights_[k] * (beta_ == 1.0 ? r : std::pow(r, beta_));
    }
  }
  return s;
}

void Model::draw_raw(RngStream& rng, std::span<double> x) const {
  draw_impl(rng, x, {}, false);
}

void Model::draw(RngStream& rng, std::span<double> x, std::span<double> p) const {
  if (!emits_pvalues_) {
    throw ConfigError(std::string(to_string(kind())) +
                      " model has no closed-form margins and emits no p-values");
  }
  if (p.size() != spec_.d) throw ConfigError("p-value buffer has the wrong length");
  draw_impl(rng, x, p, true);
}

void Model::draw_impl(RngStream& rng, std::span<double> x, std::span<double> p,
                      bool want_p) const {
  const std::size_t d = spec_.d;
  if (x.size() != d) throw ConfigError("sample buffer has the wrong length");
  switch (kind()) {
    case ModelKind::MultivariateT: {
      const auto& params = std::get<MultivariateT>(spec_.parameters);
      gaussian(rng, x);
      const double g = 2.0 * rng.gamma(0.5 * params.nu);
      const double scale = 1.0 / std::sqrt(g / params.nu);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] *= scale;
        if (!params.location.empty()) x[i] += params.location[i];
        if (want_p) p[i] = student_->sf(x[i]);
      }
      return;
    }
    case ModelKind::GaussianCopula: {
      gaussian(rng, x);
      if (want_p) {
        for (std::size_t i = 0; i < d; ++i) p[i] = normal_sf(x[i]);
      }
      return;
    }
    case ModelKind::BreimanDiscrete: {
      const std::size_t k = pick_atom(rng);
      const double u = rng.uniform();
      const double radius = beta_ == 1.0 ? 1.0 / u : std::pow(u, -1.0 / beta_);
      for (std::size_t i = 0; i < d; ++i) x[i] = radius * atoms_[k * d + i];
      if (want_p) {
        for (std::size_t i = 0; i < d; ++i) {
          // The margin has an atom at zero; randomize across it so p stays uniform.
          p[i] = x[i] > 0.0 ? breiman_survival(i, x[i])
                            : positive_mass_[i] + rng.uniform() * zero_mass_[i];
        }
      }
      return;
    }
    case ModelKind::LinearFactor: {
      const auto factors = static_cast<std::size_t>(a_.cols());
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t j = 0; j < factors; ++j) {
        const double u = rng.uniform();
        const double z = beta_ == 1.0 ? 1.0 / u : std::pow(u, -1.0 / beta_);
        for (std::size_t i = 0; i < d; ++i) {
          x[i] += a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z;
        }
      }
      return;
    }
    case ModelKind::MaxLinearFrechet: {
      const auto factors = static_cast<std::size_t>(a_.cols());
      double zbuf[64];
      std::vector<double> heap;
      double* z = zbuf;
      if (factors > 64) {
        heap.resize(factors);
        z = heap.data();
      }
      if (cumulative_.empty()) {
        for (std::size_t j = 0; j < factors; ++j) z[j] = -1.0 / std::log(rng.uniform());
      } else {
        // Breiman factors pushed onto standard Frechet margins.
        const std::size_t k = pick_atom(rng);
        const double u = rng.uniform();
        const double radius = beta_ == 1.0 ? 1.0 / u : std::pow(u, -1.0 / beta_);
        for (std::size_t j = 0; j < factors; ++j) {
          const double raw = radius * atoms_[k * factors + j];
          const double pj = raw > 0.0 ? breiman_survival(j, raw)
                                      : positive_mass_[j] + rng.uniform() * zero_mass_[j];
          z[j] = frechet_transform(pj);
        }
      }
      for (std::size_t i = 0; i < d; ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < factors; ++j) {
          best = std::max(best, a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j]);
        }
        x[i] = best;
        if (want_p) p[i] = -std::expm1(-row_sums_[i] / best);
      }
      return;
    }
    case ModelKind::S1SDiscrete: {
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double c = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        const double g = weights_[k] * c;
        for (std::size_t i = 0; i < d; ++i) x[i] += g * atoms_[k * d + i];
      }
      if (want_p) {
        for (std::size_t i = 0; i < d; ++i) {
          p[i] = tail_scale_survival(TailScale::Cauchy, x[i] / s1s_scales_[i]);
        }
      }
      return;
    }
  }
}

}  // namespace tailcomb
