#include "helpers.hpp"
#include "tailcomb/error.hpp"
#include "tailcomb/samplers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace tailcomb;
using tailcomb::testutil::ks_bound;
using tailcomb::testutil::ks_uniform;

namespace {

ModelSpec mvt(double nu, std::size_t d, SigmaSpec sigma = {}) {
  return {d, MultivariateT{nu, std::move(sigma), {}}};
}

// Marginal p-values of coordinate `i` over n draws (replicate streams 0..n-1).
std::vector<double> margin_pvalues(const Model& m, std::size_t i, std::size_t n,
                                   std::uint64_t seed = 1) {
  std::vector<double> x(m.dimension()), p(m.dimension()), out(n);
  for (std::size_t r = 0; r < n; ++r) {
    RngStream rng(seed, r);
    m.draw(rng, x, p);
    out[r] = p[i];
  }
  return out;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
  return r;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Sigma, Build) {
  EXPECT_TRUE(sigma_build(SigmaKind::AutoRegressive, 0.0, 3).isIdentity());
  Eigen::MatrixXd ar(3, 3);
  ar << 1, .5, .25, .5, 1, .5, .25, .5, 1;
  EXPECT_TRUE(sigma_build(SigmaKind::AutoRegressive, 0.5, 3).isApprox(ar, 1e-15));
  Eigen::MatrixXd ex(2, 2);
  ex << 1, .5, .5, 1;
  EXPECT_TRUE(sigma_build(SigmaKind::Exchangeable, 0.5, 2).isApprox(ex, 1e-15));
  EXPECT_THROW(sigma_build(SigmaKind::AutoRegressive, 1.0, 3), DomainError);
  EXPECT_THROW(sigma_build(SigmaKind::Exchangeable, -0.6, 3), DomainError);
  SigmaSpec bad{SigmaKind::Dense, 0.0, Eigen::MatrixXd::Ones(2, 2) * 2.0};
  EXPECT_THROW(sigma_build(bad, 2), ConfigError);
  SigmaSpec singular{SigmaKind::Dense, 0.0, Eigen::MatrixXd::Ones(2, 2)};
  EXPECT_THROW(sigma_build(singular, 2), ConfigError);
}

TEST(Mvt, GaussianLimitUncorrelated) {
  const Model m(mvt(1e6, 2));
  constexpr std::size_t n = 100000;
  std::vector<double> a(n), b(n), x(2), p(2);
  for (std::size_t r = 0; r < n; ++r) {
    RngStream rng(5, r);
    m.draw(rng, x, p);
    a[r] = x[0];
    b[r] = x[1];
  }
  EXPECT_LE(std::fabs(correlation(a, b)), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Mvt, MarginalRejectionRate) {
  const Model m(mvt(1.0, 2));
  constexpr std::size_t n = 100000;
  const auto p = margin_pvalues(m, 0, n);
  const double rate = static_cast<double>(std::count_if(p.begin(), p.end(), [](double v) { return v < 0.1; })) / n;
  EXPECT_NEAR(rate, 0.1, 3.0 * std::sqrt(0.09 / n));
}

TEST(Mvt, Deterministic) {
  const Model m(mvt(1.0, 3, {SigmaKind::AutoRegressive, 0.5, {}}));
  std::vector<double> x1(3), p1(3), x2(3), p2(3);
  RngStream a(99, 12345), b(99, 12345);
  m.draw(a, x1, p1);
  m.draw(b, x2, p2);
  EXPECT_EQ(x1, x2);
  EXPECT_EQ(p1, p2);
}

TEST(Gaussian, IndependentUniform) {
  const Model m({2, GaussianCopula{}});
  constexpr std::size_t n = 1000000;
  EXPECT_LE(ks_uniform(margin_pvalues(m, 0, n)), ks_bound(n));
}

TEST(Gaussian, ExchangeableSpearman) {
  const Model m({2, GaussianCopula{{SigmaKind::Exchangeable, 0.9, {}}}});
  constexpr std::size_t n = 20000;
  std::vector<double> a(n), b(n), x(2), p(2);
  for (std::size_t r = 0; r < n; ++r) {
    RngStream rng(6, r);
    m.draw(rng, x, p);
    a[r] = p[0];
    b[r] = p[1];
  }
  EXPECT_GT(correlation(ranks(a), ranks(b)), 0.8);
}

TEST(Breiman, SingleAtomClosedForm) {
  const auto diag = DiscreteAngularMeasure::from_rows(1.0, {{0.5, 0.5}}, {1.0}, false);
  const Model m({2, BreimanDiscrete{diag}});
  std::vector<double> x(2), p(2);
  for (std::uint64_t r = 0; r < 1000; ++r) {
    RngStream rng(7, r);
    m.draw(rng, x, p);
    ASSERT_EQ(x[0], x[1]);
    ASSERT_NEAR(p[0], std::min(1.0, 1.0 / (2.0 * x[0])), 1e-15);
  }
  EXPECT_LE(ks_uniform(margin_pvalues(m, 0, 100000)), ks_bound(100000));
}

TEST(Breiman, AxesOneCoordinateExtreme) {
  const Model m({2, BreimanDiscrete{DiscreteAngularMeasure::axes(2)}});
  std::vector<double> x(2), p(2);
  for (std::uint64_t r = 0; r < 1000; ++r) {
    RngStream rng(8, r);
    m.draw(rng, x, p);
    ASSERT_TRUE((x[0] > 0.0) != (x[1] > 0.0));
  }
  // The zero atom is randomized, so the margin is still uniform.
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LE(ks_uniform(margin_pvalues(m, i, 1000000)), ks_bound(1000000));
  }
}

TEST(Breiman, RejectsDegenerateMargin) {
  const auto m = DiscreteAngularMeasure::from_rows(1.0, {{1.0, 0.0}}, {1.0}, false);
  EXPECT_THROW(Model({2, BreimanDiscrete{m}}), ConfigError);
  const auto s = DiscreteAngularMeasure::from_rows(1.0, {{0.5, 0.5}}, {1.0}, true);
  EXPECT_THROW(Model({2, BreimanDiscrete{s}}), ConfigError);
}

TEST(LinearFactor, Construction) {
  Eigen::MatrixXd col(2, 1);
  col << 1, 1;
  const Model m({2, LinearFactor{1.0, col}});
  EXPECT_FALSE(m.emits_pvalues());
  std::vector<double> x(2), p(2);
  RngStream rng(9, 0);
  m.draw_raw(rng, x);
  EXPECT_EQ(x[0], x[1]);
  EXPECT_THROW(m.draw(rng, x, p), ConfigError);
}

TEST(LinearFactor, SingleJumpTail) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 0, 1;
  const Model m({2, LinearFactor{1.0, a}});
  constexpr std::size_t n = 1000000;
  constexpr double t = 1e3;
  std::size_t hits = 0;
  std::vector<double> x(2);
  for (std::size_t r = 0; r < n; ++r) {
    RngStream rng(10, r);
    m.draw_raw(rng, x);
    hits += x[0] > t;
  }
  const double q = static_cast<double>(hits) / n;
  // The sum of two unit Pareto factors exceeds t with probability 2/t + O(t^-2).
  EXPECT_NEAR(t * q, 2.0, 4.0 * t * std::sqrt(q / n) + 0.01);
}

TEST(MaxLinear, Margins) {
  Eigen::MatrixXd a(3, 4);
  a << 0.5, 0.5, 0, 0, 0, 0.25, 0.75, 0, 0, 0, 0.3, 0.7;
  const Model m({3, MaxLinearFrechet{a, std::nullopt}});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE(ks_uniform(margin_pvalues(m, i, 100000)), ks_bound(100000));
  }
  Eigen::MatrixXd zero_row = a;
  zero_row.row(1).setZero();
  EXPECT_THROW(Model({3, MaxLinearFrechet{zero_row, std::nullopt}}), ConfigError);
}

TEST(MaxLinear, DependentFactorsEmitRawOnly) {
  const auto fm = DiscreteAngularMeasure::from_rows(1.0, {{0.5, 0.5}}, {1.0}, false);
  const Model m({2, MaxLinearFrechet{Eigen::MatrixXd::Identity(2, 2), fm}});
  EXPECT_FALSE(m.emits_pvalues());
  std::vector<double> x(2);
  RngStream rng(11, 0);
  m.draw_raw(rng, x);
  EXPECT_NEAR(x[0], x[1], 1e-12 * x[0]);
}

TEST(S1S, StandardCauchyMargins) {
  S1SDiscrete spec{2, {1.0, 0.0, 0.0, 1.0}, {1.0, 1.0}, true};
  const Model m({2, spec});
  EXPECT_LE(ks_uniform(margin_pvalues(m, 0, 100000)), ks_bound(100000));
}

TEST(S1S, ScalesAndValidation) {
  S1SDiscrete pos{2, {0.5, 0.5}, {2.0}, true};
  EXPECT_EQ(s1s_coordinate_scales(symmetrize(pos)), (std::vector<double>{1.0, 1.0}));
  S1SDiscrete wrong{2, {0.5, 0.5}, {1.0}, true};
  EXPECT_THROW(Model({2, wrong}), ConfigError);
  wrong.standardized = false;
  EXPECT_NO_THROW(Model({2, wrong}));
  const auto sym = symmetrize(pos);
  EXPECT_EQ(sym.scales.size(), 2u);
  EXPECT_EQ(sym.atoms[2], -0.5);
}

TEST(S1S, SpectrallyPositiveAverageIsCauchy) {
  S1SDiscrete pos{2, {0.5, 0.5}, {2.0}, true};
  const Model m({2, pos});
  constexpr std::size_t n = 100000;
  std::vector<double> u(n), x(2), p(2);
  for (std::size_t r = 0; r < n; ++r) {
    RngStream rng(12, r);
    m.draw(rng, x, p);
    u[r] = tail_scale_survival(TailScale::Cauchy, 0.5 * (x[0] + x[1]));
  }
  EXPECT_LE(ks_uniform(u), ks_bound(n));
}

TEST(S1S, MixedSignAtomsCancelInTheAverage) {
  // Atoms +-(1/2,-1/2) contribute nothing to (X1 + X2)/2.
  S1SDiscrete spec{2, {0.5, -0.5, 0.5, 0.5}, {1.0, 1.0}, true};
  const Model m({2, spec});
  std::vector<double> x(2);
  double sum_mixed = 0.0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    RngStream rng(13, r);
    m.draw_raw(rng, x);
    sum_mixed += 0.5 * (x[0] + x[1]);
  }
  EXPECT_TRUE(std::isfinite(sum_mixed));
  const auto sym = symmetrize(spec);
  double scale = 0.0;
  for (std::size_t k = 0; k < sym.scales.size(); ++k) {
    scale += sym.scales[k] * std::fabs(0.5 * sym.atoms[2 * k] + 0.5 * sym.atoms[2 * k + 1]);
  }
  EXPECT_NEAR(scale, 0.5, 1e-15);
}

TEST(TailStandardization, MvtAndBreiman) {
  constexpr std::size_t n = 1000000;
  constexpr double t = 100.0;
  // Exact Pareto-scale tail through the p-values: t P[1/p > t] = t P[p < 1/t] = 1.
  for (const ModelSpec& spec :
       {mvt(1.0, 2), ModelSpec{2, BreimanDiscrete{DiscreteAngularMeasure::axes(2)}}}) {
    const Model m(spec);
    const auto p = margin_pvalues(m, 0, n, 14);
    const double q = static_cast<double>(std::count_if(p.begin(), p.end(), [](double v) { return 1.0 / v > t; })) / n;
    EXPECT_NEAR(t * q, 1.0, 4.0 * t * std::sqrt(q * (1 - q) / n)) << to_string(spec.kind());
  }
}
