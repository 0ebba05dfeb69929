#include "tailcomb/experiments.hpp"

#include "parallel.hpp"
#include "tailcomb/error.hpp"
#include "tailcomb/io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tailcomb {
namespace {

struct ShapeLabel {
  std::optional<double> nu;
  std::string sigma_kind = "NA";
  std::optional<double> rho;
};

ShapeLabel shape_label(const ModelSpec& spec) {
  ShapeLabel out;
  auto from_sigma = [&](const SigmaSpec& s) {
    out.sigma_kind = std::string(to_string(s.kind));
    if (s.kind != SigmaKind::Dense) out.rho = s.rho;
  };
  if (const auto* t = std::get_if<MultivariateT>(&spec.parameters)) {
    out.nu = t->nu;
    from_sigma(t->sigma);
  } else if (const auto* g = std::get_if<GaussianCopula>(&spec.parameters)) {
    from_sigma(g->sigma);
  }
  return out;
}

double tail_power(double t, double beta) { return beta == 1.0 ? t : std::pow(t, beta); }

}  // namespace

void finalize_ratio(CalibrationRecord& r) {
  const double n = static_cast<double>(r.n_sims);
  const double ah = n > 0 ? static_cast<double>(r.rejections) / n : 0.0;
  r.alpha_hat_ratio = ah / r.alpha;
  r.se_ratio = n > 0 ? std::sqrt(ah * (1.0 - ah) / n) / r.alpha : 0.0;
}

std::vector<std::string> calibration_warnings(std::size_t n, std::span<const double> alphas) {
  std::vector<std::string> out;
  for (double a : alphas) {
    if (static_cast<double>(n) * a < 50.0) {
      std::ostringstream msg;
      msg << "n * alpha = " << static_cast<double>(n) * a << " < 50 at alpha = " << a
          << "; the rejection count will be noisy";
      out.push_back(msg.str());
    }
  }
  return out;
}

std::vector<CalibrationRecord> run_calibration(const ModelSpec& spec,
                                               std::span<const CombinationTest> tests,
                                               std::span<const double> alphas, std::size_t n,
                                               std::uint64_t seed,
                                               const ExecutionOptions& exec) {
  if (tests.empty()) throw ConfigError("no tests requested");
  if (alphas.empty()) throw ConfigError("no alpha levels requested");
  if (n == 0) throw ConfigError("replicate count must be positive");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 0.5)) throw ConfigError("alpha levels must lie in (0, 0.5]");
  }
  const Model model(spec);
  if (!model.emits_pvalues()) {
    throw ConfigError(std::string(to_string(model.kind())) +
                      " has no exact margins; use the tail-scale harness instead");
  }
  const std::size_t d = model.dimension();
  for (const auto& t : tests) {
    if (t.dimension() != d) {
      throw ConfigError("test " + std::string(t.name()) + " expects " +
                        std::to_string(t.dimension()) + " p-values but the model has d = " +
                        std::to_string(d));
    }
  }

  const unsigned workers = detail::resolve_workers(exec.workers);
  const std::size_t cells = tests.size() * alphas.size();
  std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(cells, 0));

  detail::parallel_chunks(n, workers, exec.chunk_size,
                          [&](std::size_t begin, std::size_t end, unsigned w) {
                            std::vector<double> x(d), p(d);
                            auto& local = counts[w];
                            for (std::size_t i = begin; i < end; ++i) {
                              RngStream rng(seed, i);
                              model.draw(rng, x, p);
                              for (std::size_t t = 0; t < tests.size(); ++t) {
                                const double pc = combined_pvalue(tests[t], p);
                                for (std::size_t a = 0; a < alphas.size(); ++a) {
                                  if (pc <= alphas[a]) ++local[t * alphas.size() + a];
                                }
                              }
                            }
                          });

  const std::string fingerprint = model_fingerprint(spec);
  const ShapeLabel label = shape_label(spec);
  std::vector<CalibrationRecord> out;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      CalibrationRecord r;
      r.test = std::string(tests[t].name());
      r.model = fingerprint;
      r.nu = label.nu;
      r.d = d;
      r.sigma_kind = label.sigma_kind;
      r.rho = label.rho;
      r.alpha = alphas[a];
      r.n_sims = n;
      for (const auto& local : counts) r.rejections += local[t * alphas.size() + a];
      r.seed = seed;
      finalize_ratio(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<TailScaleEstimate> run_tail_scale(const ModelSpec& spec, const Combiner& combiner,
                                              std::span<const double> thresholds, std::size_t n,
                                              std::uint64_t seed,
                                              const ExecutionOptions& exec) {
  if (thresholds.empty()) throw ConfigError("no thresholds requested");
  if (n == 0) throw ConfigError("replicate count must be positive");
  for (double t : thresholds) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("thresholds must be positive");
  }
  const Model model(spec);
  const std::size_t d = model.dimension();
  if (combiner.dimension() != d) {
    throw ConfigError("combiner dimension " + std::to_string(combiner.dimension()) +
                      " does not match the model dimension " + std::to_string(d));
  }
  const bool clip = combiner.kind() != CombinerKind::Linear;
  const double beta = std::isfinite(model.tail_index()) ? model.tail_index() : 1.0;

  const unsigned workers = detail::resolve_workers(exec.workers);
  std::vector<std::vector<std::uint64_t>> counts(
      workers, std::vector<std::uint64_t>(thresholds.size(), 0));
  detail::parallel_chunks(n, workers, exec.chunk_size,
                          [&](std::size_t begin, std::size_t end, unsigned w) {
                            std::vector<double> x(d);
                            auto& local = counts[w];
                            for (std::size_t i = begin; i < end; ++i) {
                              RngStream rng(seed, i);
                              model.draw_raw(rng, x);
                              if (clip) {
                                for (double& v : x) v = std::max(v, 0.0);
                              }
                              const double h = combiner.evaluate(x);
                              for (std::size_t k = 0; k < thresholds.size(); ++k) {
                                if (h > thresholds[k]) ++local[k];
                              }
                            }
                          });

  std::vector<TailScaleEstimate> out;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    TailScaleEstimate e;
    e.threshold = thresholds[k];
    e.n_sims = n;
    for (const auto& local : counts) e.exceedances += local[k];
    const double q = static_cast<double>(e.exceedances) / static_cast<double>(n);
    const double scale = tail_power(thresholds[k], beta);
    e.estimate = scale * q;
    e.standard_error = scale * std::sqrt(q * (1.0 - q) / static_cast<double>(n));
    out.push_back(e);
  }
  return out;
}

std::optional<double> tail_scale_limit(const ModelSpec& spec, const Combiner& combiner) {
  if (combiner.dimension() != spec.d) return std::nullopt;
  auto h_pow = [&](std::span<const double> v, double beta) {
    const double h = combiner.evaluate(v);
    return beta == 1.0 ? h : std::pow(h, beta);
  };
  auto column_sum = [&](const Eigen::MatrixXd& a, double beta) {
    double total = 0.0;
    std::vector<double> col(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) col[static_cast<std::size_t>(i)] = a(i, j);
      total += h_pow(col, beta);
    }
    return total;
  };

  if (const auto* b = std::get_if<BreimanDiscrete>(&spec.parameters)) {
    const auto& m = b->measure;
    double total = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) total += m.weights()[k] * h_pow(m.atom(k), m.beta());
    return total;
  }
  if (const auto* lf = std::get_if<LinearFactor>(&spec.parameters)) {
    return column_sum(lf->a, lf->beta);
  }
  if (const auto* ml = std::get_if<MaxLinearFrechet>(&spec.parameters)) {
    if (!ml->factor_measure) return column_sum(ml->a, 1.0);
    // Frechet-margined Breiman factors: Z ~ Y Theta / m with m the common
    // margin moment, so the limit is E[h(A (max) Theta)] / m.
    const auto& fm = *ml->factor_measure;
    if (fm.beta() != 1.0) return std::nullopt;
    const double target = margin_constraint(fm).target;
    std::vector<double> y(spec.d);
    double total = 0.0;
    for (std::size_t k = 0; k < fm.size(); ++k) {
      const auto theta = fm.atom(k);
      for (std::size_t i = 0; i < spec.d; ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < theta.size(); ++j) {
          best = std::max(best, ml->a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                                    theta[j]);
        }
        y[i] = best;
      }
      total += fm.weights()[k] * combiner.evaluate(y);
    }
    return total / target;
  }
  if (const auto* s = std::get_if<S1SDiscrete>(&spec.parameters)) {
    if (combiner.kind() != CombinerKind::Linear) return std::nullopt;
    // <w, X> is Cauchy with scale sum_k gamma_k |<w, s_k>|; t P[C s > t] -> s / pi.
    const S1SDiscrete sym = symmetrize(*s);
    const auto w = combiner.weights();
    double scale = 0.0;
    for (std::size_t k = 0; k < sym.scales.size(); ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < sym.d; ++i) dot += w[i] * sym.atoms[k * sym.d + i];
      scale += sym.scales[k] * std::fabs(dot);
    }
    return scale / std::numbers::pi;
  }
  return std::nullopt;
}

}  // namespace tailcomb
