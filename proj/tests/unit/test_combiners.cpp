#include "helpers.hpp"
#include "tailcomb/combiners.hpp"
#include "tailcomb/error.hpp"
#include "tailcomb/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace tailcomb;

TEST(Combiner, EvaluateExamples) {
  const double x1[] = {2.0, 2.0};
  EXPECT_DOUBLE_EQ(Combiner::linear({0.5, 0.5}).evaluate(x1), 2.0);
  const double x2[] = {4.0, 1.0};
  EXPECT_DOUBLE_EQ(Combiner::tippett(2).evaluate(x2), 2.0);
  const double x3[] = {1.0, 0.0};
  EXPECT_NEAR(Combiner::power_mean({0.5, 0.5}, 2.0).evaluate(x3), std::sqrt(0.5), 1e-15);
  const double neg[] = {-3.0, 1.0};
  EXPECT_DOUBLE_EQ(Combiner::linear({0.5, 0.5}).evaluate(neg), 0.0);
}

TEST(Combiner, ValidatesInputs) {
  EXPECT_THROW(Combiner::linear({0.5, 0.6}), ConfigError);
  EXPECT_THROW(Combiner::linear({-0.5, 1.5}), ConfigError);
  EXPECT_THROW(Combiner::power_mean({0.5, 0.5}, 0.0), ConfigError);
  const double x[] = {1.0, 2.0, 3.0};
  EXPECT_THROW(Combiner::linear({0.5, 0.5}).evaluate(x), ConfigError);
  const double neg[] = {-1.0, 2.0};
  EXPECT_THROW(Combiner::tippett(2).evaluate(neg), DomainError);
  EXPECT_THROW(Combiner::max_linear({{0}, {}}, {0.5, 0.5}, 2), ConfigError);
  EXPECT_THROW(Combiner::max_linear({{0}, {5}}, {0.5, 0.5}, 2), ConfigError);
  // Factor 3 is not covered by any block.
  EXPECT_THROW(Combiner::max_linear({{0}, {1}}, {0.5, 0.5}, 3), ConfigError);
}

TEST(Combiner, HomogeneityExamples) {
  const double a[] = {1.0, 3.0};
  EXPECT_TRUE(homogeneity_check(Combiner::linear({0.5, 0.5}), a, 7.0));
  const double b[] = {1.0, 2.0};
  EXPECT_TRUE(homogeneity_check(Combiner::power_mean({0.5, 0.5}, 2.0), b, 10.0));
  const double z[] = {0.0, 0.0};
  EXPECT_TRUE(homogeneity_check(Combiner::tippett(2), z, 5.0));
}

TEST(Combiner, HomogeneityProperty) {
  RngStream rng(7, 0);
  const std::vector<Combiner> combiners = {
      Combiner::linear({0.2, 0.3, 0.5}), Combiner::tippett(3),
      Combiner::power_mean({0.2, 0.3, 0.5}, 2.0), Combiner::power_mean({0.2, 0.3, 0.5}, 0.5),
      Combiner::max_linear({{0, 1}, {1, 2}}, {0.4, 0.6}, 3)};
  for (int trial = 0; trial < 500; ++trial) {
    double x[3];
    for (double& v : x) v = rng.exponential() * std::pow(10.0, 6.0 * rng.uniform() - 3.0);
    for (const auto& h : combiners) {
      const double base = h.evaluate(x);
      for (double c : {0.1, 1.0, 13.7}) {
        double cx[3];
        for (int i = 0; i < 3; ++i) cx[i] = c * x[i];
        ASSERT_NEAR(h.evaluate(cx), c * base, 1e-10 * c * base) << h.describe();
      }
    }
  }
}

TEST(MaxLinear, Coefficients) {
  const auto c = MaxLinearCoefficients::build({{0, 1}, {2, 3}}, std::vector<double>{0.5, 0.5}, 4);
  EXPECT_DOUBLE_EQ(c.c_w, 1.0);
  for (double a : c.a_w) EXPECT_DOUBLE_EQ(a, 0.25);
  const auto s = MaxLinearCoefficients::build({{0}, {1}}, std::vector<double>{0.5, 0.5}, 2);
  EXPECT_DOUBLE_EQ(s.c_w, 1.0);
  // Overlapping blocks are allowed; c_w is recomputed from a and w.
  const std::vector<double> w{0.3, 0.7};
  const auto o = MaxLinearCoefficients::build({{0, 1, 2}, {2}}, w, 3);
  double c_w = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < 2; ++i) best = std::max(best, w[i] * o.at(i, j));
    c_w += best;
  }
  EXPECT_NEAR(o.c_w, c_w, 1e-14);
  EXPECT_NEAR(o.c_w, 0.1 + 0.1 + 0.7, 1e-14);
}

TEST(CombinedPvalue, KnownValues) {
  const double half[] = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(combined_pvalue(CombinationTest::pct({0.5, 0.5}), half), 0.5);
  EXPECT_DOUBLE_EQ(combined_pvalue(CombinationTest::cct({0.5, 0.5}), half), 0.5);
  const double three[] = {0.1, 0.2, 0.3};
  EXPECT_NEAR(combined_pvalue(CombinationTest::tippett(3), three), 0.271, 1e-15);
  // With equal p-values the PCT statistic is 1/p and the anchor returns p.
  const double big[] = {0.9, 0.9};
  EXPECT_DOUBLE_EQ(combined_pvalue(CombinationTest::pct({0.5, 0.5}), big), 0.9);
}

TEST(CombinedPvalue, FctAnchor) {
  const auto fct = CombinationTest::fct({{0}, {1}}, {0.5, 0.5}, 2);
  const double half[] = {0.5, 0.5};
  const auto stat = fct_statistic(fct.combiner(), half);
  EXPECT_NEAR(stat.y_w, 0.5 / std::numbers::ln2, 1e-14);
  EXPECT_DOUBLE_EQ(stat.c_w, 1.0);
  // Y_w / c_w = 1 maps to 1 - e^{-1}.
  const double p = 1.0 - std::exp(-2.0);  // Frechet value 0.5 per block, Y_w = 0.25
  const double same[] = {p, p};
  EXPECT_NEAR(fct_statistic(fct.combiner(), same).y_w, 0.25, 1e-14);
  const double one = 1.0 - std::exp(-1.0);
  const auto single = CombinationTest::fct({{0}}, {1.0}, 1);
  const double ps[] = {one};
  EXPECT_NEAR(combined_pvalue(single, ps), 1.0 - std::exp(-1.0), 1e-14);
}

TEST(CombinedPvalue, UnsupportedPairings) {
  EXPECT_THROW(CombinationTest(TailScale::Cauchy, Combiner::tippett(2)), ConfigError);
  EXPECT_THROW(CombinationTest(TailScale::Frechet1, Combiner::linear({1.0})), ConfigError);
  EXPECT_THROW(CombinationTest(TailScale::Cauchy, Combiner::power_mean({1.0}, 2.0)), ConfigError);
}

TEST(CombinedPvalue, MonotoneEvidence) {
  RngStream rng(11, 0);
  const std::vector<CombinationTest> tests = {
      CombinationTest::pct({0.25, 0.25, 0.25, 0.25}), CombinationTest::cct({0.1, 0.2, 0.3, 0.4}),
      CombinationTest::tippett(4), CombinationTest::power_mean({0.25, 0.25, 0.25, 0.25}, 2.0),
      CombinationTest::fct({{0, 1}, {2, 3}}, {0.5, 0.5}, 4)};
  for (int trial = 0; trial < 2000; ++trial) {
    double p[4];
    for (double& v : p) v = rng.uniform();
    const auto i = static_cast<std::size_t>(rng.uniform() * 4.0);
    double q[4];
    std::copy(p, p + 4, q);
    q[i] = p[i] * rng.uniform();
    for (const auto& t : tests) {
      ASSERT_LE(combined_pvalue(t, q), combined_pvalue(t, p) + 1e-15) << t.name();
    }
  }
}

TEST(CombinedPvalue, ExactUnderIndependence) {
  constexpr std::size_t n = 1000000;
  const auto tippett = CombinationTest::tippett(3);
  const auto fct = CombinationTest::fct({{0, 1}, {2, 3}}, {0.5, 0.5}, 4);
  std::vector<double> pt(n), pf(n);
  RngStream rng(2024, 0);
  for (std::size_t k = 0; k < n; ++k) {
    double p[4];
    for (double& v : p) v = rng.uniform();
    pt[k] = combined_pvalue(tippett, std::span<const double>(p, 3));
    pf[k] = combined_pvalue(fct, p);
  }
  EXPECT_LE(testutil::ks_uniform(pt), testutil::ks_bound(n));
  EXPECT_LE(testutil::ks_uniform(pf), testutil::ks_bound(n));
}

TEST(ParseCombiner, Grammar) {
  EXPECT_EQ(parse_combiner("linear", 4).dimension(), 4u);
  EXPECT_EQ(parse_combiner("linear:w=0.2,0.8", 0).weights()[1], 0.8);
  EXPECT_EQ(parse_combiner("tippett", 3).kind(), CombinerKind::Tippett);
  EXPECT_EQ(parse_combiner("powermean:gamma=2", 2).gamma(), 2.0);
  const auto ml = parse_combiner("maxlinear:blocks=1,2/3,4;w=0.5,0.5", 4);
  EXPECT_EQ(ml.dimension(), 4u);
  EXPECT_DOUBLE_EQ(ml.max_linear_coefficients().c_w, 1.0);
  EXPECT_EQ(parse_combiner(ml.describe(), 4).describe(), ml.describe());
  EXPECT_THROW(parse_combiner("median", 2), ConfigError);
  EXPECT_THROW(parse_combiner("powermean", 2), ConfigError);
  EXPECT_THROW(parse_combiner("linear:q=1", 2), ConfigError);
}

TEST(ParseTest, Names) {
  EXPECT_EQ(parse_test("pct", 3).kind(), TestKind::PCT);
  EXPECT_EQ(parse_test("cct:w=0.5,0.5", 2).kind(), TestKind::CCT);
  EXPECT_EQ(parse_test("tippett", 3).kind(), TestKind::Tippett);
  EXPECT_EQ(parse_test("powermean:gamma=2", 3).kind(), TestKind::PowerMean);
  const auto fct = parse_test("fct:blocks=1,2/3,4", 4);
  EXPECT_EQ(fct.kind(), TestKind::FCT);
  EXPECT_EQ(fct.dimension(), 4u);
  EXPECT_EQ(parse_test("fct", 3).dimension(), 3u);
  EXPECT_THROW(parse_test("lrt", 3), ConfigError);
}
