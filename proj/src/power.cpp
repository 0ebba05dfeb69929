#include "tailcomb/experiments.hpp"

#include "parallel.hpp"
#include "tailcomb/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tailcomb {
namespace {

// Offset between the alternative stream and the null stream used to set the
// baseline threshold.
constexpr std::uint64_t kNullSeedOffset = 0x9E3779B97F4A7C15ull;

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad number in effect grid: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("bad number in effect grid: '" + s + "'");
  return v;
}

}  // namespace

std::string_view to_string(EigenDirection d) {
  return d == EigenDirection::Top ? "top_eigen" : "bottom_eigen";
}

Eigen::VectorXd precision_eigenvector(const Eigen::MatrixXd& sigma, EigenDirection direction) {
  const Eigen::MatrixXd precision =
      sigma.llt().solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (precision + precision.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  // Eigenvalues come back in increasing order.
  Eigen::VectorXd v = direction == EigenDirection::Top ? eig.eigenvectors().col(sigma.cols() - 1)
                                                       : eig.eigenvectors().col(0);
  v.normalize();
  if (v.sum() < 0.0) v = -v;
  return v;
}

std::vector<double> parse_effect_grid(std::string_view text) {
  const std::string s(text);
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("effect grid must be start:stop:count");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double count = parse_number(parts[2]);
    if (!(count >= 1.0) || count != std::floor(count)) {
      throw ConfigError("effect grid count must be a positive integer");
    }
    const auto m = static_cast<std::size_t>(count);
    for (std::size_t i = 0; i < m; ++i) {
      out.push_back(m == 1 ? start
                           : start + (stop - start) * static_cast<double>(i) /
                                         static_cast<double>(m - 1));
    }
  } else {
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) out.push_back(parse_number(part));
  }
  if (out.empty()) throw ConfigError("empty effect grid");
  return out;
}

std::vector<PowerRecord> run_power(const PowerConfig& config, const ExecutionOptions& exec) {
  const std::size_t d = config.d;
  const std::size_t n = config.n;
  const auto& effects = config.effects;
  if (n == 0) throw ConfigError("replicate count must be positive");
  if (std::find(effects.begin(), effects.end(), 0.0) == effects.end()) {
    throw ConfigError("effect grid must contain 0 (the null anchor)");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (config.tests.empty()) throw ConfigError("no tests requested");
  for (const auto& t : config.tests) {
    if (t.dimension() != d) throw ConfigError("test dimension does not match d");
  }

  ModelSpec spec;
  spec.d = d;
  spec.parameters = MultivariateT{config.nu, config.sigma, {}};
  const Model model(spec);
  const StudentT margin(config.nu);
  const Eigen::MatrixXd& sigma = model.sigma();
  const Eigen::MatrixXd precision =
      sigma.llt().solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
  const Eigen::VectorXd v = precision_eigenvector(sigma, config.direction);
  const double v_pv = v.dot(precision * v);
  const double nu = config.nu;
  const double half = 0.5 * (nu + static_cast<double>(d));

  // log f(T; e v) - log f(T; 0) from Q(T) and v' P T.
  auto log_lr = [&](double q, double vpt, double e) {
    const double q_alt = q - 2.0 * e * vpt + e * e * v_pv;
    return -half * (std::log1p(q_alt / nu) - std::log1p(q / nu));
  };

  const unsigned workers = detail::resolve_workers(exec.workers);
  const std::size_t m = effects.size();

  // Null run for the baseline thresholds.
  std::vector<std::vector<double>> null_lr(m, std::vector<double>(n));
  detail::parallel_chunks(n, workers, exec.chunk_size,
                          [&](std::size_t begin, std::size_t end, unsigned) {
                            Eigen::VectorXd x(static_cast<Eigen::Index>(d));
                            for (std::size_t i = begin; i < end; ++i) {
                              RngStream rng(config.seed + kNullSeedOffset, i);
                              model.draw_raw(rng, {x.data(), d});
                              const Eigen::VectorXd px = precision * x;
                              const double q = x.dot(px);
                              const double vpt = v.dot(px);
                              for (std::size_t e = 0; e < m; ++e) {
                                null_lr[e][i] = log_lr(q, vpt, effects[e]);
                              }
                            }
                          });
  std::vector<double> thresholds(m);
  const auto k = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(n - 1),
                       std::ceil((1.0 - config.alpha) * static_cast<double>(n)) - 1.0));
  for (std::size_t e = 0; e < m; ++e) {
    auto& lr = null_lr[e];
    std::nth_element(lr.begin(), lr.begin() + static_cast<std::ptrdiff_t>(k), lr.end());
    thresholds[e] = lr[k];
    std::vector<double>().swap(lr);
  }

  const std::size_t tests = config.tests.size();
  const std::size_t cols = tests + 1;  // last column: baseline
  std::vector<std::vector<std::uint64_t>> counts(workers,
                                                 std::vector<std::uint64_t>(m * cols, 0));
  detail::parallel_chunks(n, workers, exec.chunk_size,
                          [&](std::size_t begin, std::size_t end, unsigned w) {
                            Eigen::VectorXd x(static_cast<Eigen::Index>(d));
                            std::vector<double> p(d);
                            auto& local = counts[w];
                            for (std::size_t i = begin; i < end; ++i) {
                              RngStream rng(config.seed, i);
                              model.draw_raw(rng, {x.data(), d});
                              const Eigen::VectorXd px = precision * x;
                              const double q0 = x.dot(px);
                              const double vpt0 = v.dot(px);
                              for (std::size_t e = 0; e < m; ++e) {
                                const double eff = effects[e];
                                for (std::size_t j = 0; j < d; ++j) {
                                  p[j] = margin.sf(x[static_cast<Eigen::Index>(j)] +
                                                   eff * v[static_cast<Eigen::Index>(j)]);
                                }
                                for (std::size_t t = 0; t < tests; ++t) {
                                  if (combined_pvalue(config.tests[t], p) <= config.alpha) {
                                    ++local[e * cols + t];
                                  }
                                }
                                // Shifted draw T = T0 + e v: Q(T) and v'PT in closed form.
                                const double q = q0 + 2.0 * eff * vpt0 + eff * eff * v_pv;
                                const double vpt = vpt0 + eff * v_pv;
                                if (log_lr(q, vpt, eff) > thresholds[e]) ++local[e * cols + tests];
                              }
                            }
                          });

  std::vector<PowerRecord> out;
  std::vector<double> baseline(m);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t t = 0; t <= tests; ++t) {
      PowerRecord r;
      r.test = t < tests ? std::string(config.tests[t].name()) : std::string(kBaselineTest);
      r.effect_size = effects[e];
      r.mu_direction = std::string(to_string(config.direction));
      r.nu = nu;
      r.d = d;
      r.alpha = config.alpha;
      r.n_sims = n;
      for (const auto& local : counts) r.rejections += local[e * cols + t];
      if (t == tests && effects[e] == 0.0) {
        // The likelihood ratio is identically 0 at the null: the test is the
        // trivial level-alpha test.
        r.rejections = static_cast<std::uint64_t>(std::llround(config.alpha * static_cast<double>(n)));
      }
      r.power = static_cast<double>(r.rejections) / static_cast<double>(n);
      r.seed = config.seed;
      if (t == tests) baseline[e] = r.power;
      out.push_back(std::move(r));
    }
  }
  for (auto& r : out) {
    const auto e = static_cast<std::size_t>(
        std::find(effects.begin(), effects.end(), r.effect_size) - effects.begin());
    if (baseline[e] > 0.0) r.power_ratio_vs_baseline = r.power / baseline[e];
  }
  return out;
}

}  // namespace tailcomb
