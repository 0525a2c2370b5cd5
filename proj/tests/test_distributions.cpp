#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mev/distributions.hpp"
#include "oracles.hpp"

using namespace mev;

namespace {

const WeibullTail<double> kTail(10.0, 0.8);

}  // namespace

TEST(WeibullExceedance, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(weibull_exceedance(0.0, kTail), 1.0);
  for (double w : {0.5, 0.8, 1.0, 2.5})
    EXPECT_NEAR(weibull_exceedance(10.0, WeibullTail<double>(10.0, w)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(weibull_exceedance(20.0, kTail), std::exp(-std::pow(2.0, 0.8)), 1e-15);
  EXPECT_NEAR(weibull_exceedance(20.0, kTail), 0.175327, 5e-6);
  EXPECT_THROW(weibull_exceedance(-1.0, kTail), DomainError);
}

TEST(WeibullExceedance, MatchesSampleFrequency) {
  RandomStream rng(11);
  const auto x = weibull_sample(rng, kTail, 200000);
  const double freq = (x > 20.0).cast<double>().mean();
  EXPECT_NEAR(freq, weibull_exceedance(20.0, kTail), 0.003);
}

TEST(WeibullQuantile, InvertsExceedance) {
  EXPECT_NEAR(weibull_quantile(std::exp(-1.0), kTail), 10.0, 1e-12);
  EXPECT_NEAR(weibull_quantile(0.5, WeibullTail<double>(10.0, 1.0)), 10.0 * std::log(2.0), 1e-12);
  for (double h : {1.0, 15.0, 200.0}) EXPECT_NEAR(weibull_quantile(weibull_exceedance(h, kTail), kTail), h, 1e-10 * h);
  for (double p : {1e-9, 0.01, 0.3, 0.9}) EXPECT_NEAR(weibull_exceedance(weibull_quantile(p, kTail), kTail), p, 1e-12 * p);
  EXPECT_THROW(weibull_quantile(0.0, kTail), DomainError);
  EXPECT_THROW(weibull_quantile(1.0, kTail), DomainError);
}

TEST(WeibullTail, RejectsInvalidParameters) {
  EXPECT_THROW(WeibullTail<double>(0.0, 1.0), DomainError);
  EXPECT_THROW(WeibullTail<double>(1.0, -1.0), DomainError);
  EXPECT_THROW(WeibullTail<double>(1.0, 1.0, -0.5), DomainError);
  EXPECT_NEAR(kTail.preconditioned_scale(), std::pow(10.0, 0.8), 1e-12);
}

TEST(WeibullSample, LawOfLargeNumbers) {
  RandomStream rng(3);
  const auto x = weibull_sample(rng, kTail, 100000);
  EXPECT_NEAR((x > 10.0).cast<double>().mean(), std::exp(-1.0), 0.005);
  RandomStream rng_exp(4);
  EXPECT_NEAR(weibull_sample(rng_exp, WeibullTail<double>(10.0, 1.0), 1000000).mean(), 10.0, 0.05);
}

TEST(WeibullSample, DeterministicBySeed) {
  RandomStream a(99);
  RandomStream b(99);
  EXPECT_EQ(weibull_sample(a, kTail, 1)(0), weibull_sample(b, kTail, 1)(0));
  RandomStream c(99);
  EXPECT_EQ(c.substream(5).uniform(), RandomStream(99).substream(5).uniform());
  EXPECT_NE(RandomStream(99).substream(5).uniform(), RandomStream(99).substream(6).uniform());
  RandomStream d(1);
  EXPECT_THROW(weibull_sample(d, kTail, 0), DomainError);
}

TEST(WeibullSample, FloatScalar) {
  RandomStream rng(8);
  const WeibullTail<float> tail(10.0f, 0.8f);
  const auto x = weibull_sample(rng, tail, 1000);
  EXPECT_TRUE((x > 0.0f).all());
  EXPECT_NEAR(weibull_exceedance(10.0f, tail), std::exp(-1.0f), 1e-6f);
}

TEST(ModeUn, Values) {
  EXPECT_NEAR(mode_u_n(std::exp(1.0), kTail), 10.0, 1e-12);
  EXPECT_NEAR(mode_u_n(100.0, kTail), 67.46, 0.005);
  EXPECT_EQ(mode_u_n(1.0, kTail), 0.0);
  EXPECT_THROW(mode_u_n(0.5, kTail), DomainError);
  // oracle: bisection for Psi(U) = 1/n
  for (double n : {2.0, 37.5, 100.0, 365.0}) {
    const double u = test::bisect([&](double h) { return weibull_exceedance(h, kTail) - 1.0 / n; }, 0.0, 1e4);
    EXPECT_NEAR(mode_u_n(n, kTail), u, 1e-9 * u);
    EXPECT_NEAR(weibull_exceedance(mode_u_n(n, kTail), kTail), 1.0 / n, 1e-12 / n);
  }
}

TEST(ExactBlockCdf, ModeValueAndSingleDraw) {
  for (std::int64_t n : {2, 10, 50, 1000})
    EXPECT_NEAR(exact_block_cdf(mode_u_n(static_cast<double>(n), kTail), n, kTail),
                std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(n)), 1e-12);
  EXPECT_NEAR(exact_block_cdf(mode_u_n(50.0, kTail), 50, kTail), 0.36417, 5e-6);
  for (double y : {0.5, 10.0, 40.0}) EXPECT_NEAR(exact_block_cdf(y, 1, kTail), 1 - weibull_exceedance(y, kTail), 1e-15);
  EXPECT_THROW(exact_block_cdf(-1.0, 5, kTail), DomainError);
  EXPECT_THROW(exact_block_cdf(1.0, 0, kTail), DomainError);
}

TEST(ExactBlockCdf, MonteCarloAtMode) {
  RandomStream rng(50);
  const double u = mode_u_n(50.0, kTail);
  const int trials = 200000;
  int below = 0;
  for (int t = 0; t < trials; ++t) below += weibull_sample(rng, kTail, 50).maxCoeff() <= u;
  EXPECT_NEAR(static_cast<double>(below) / trials, std::pow(0.98, 50), 0.004);
}

TEST(PenultimateCdf, Values) {
  for (double n : {5.0, 50.0, 1e4}) EXPECT_NEAR(penultimate_cdf(mode_u_n(n, kTail), n, kTail), std::exp(-1.0), 1e-14);
  EXPECT_NEAR(penultimate_cdf(160.36, 100.0, kTail), 0.99, 2e-5);
  const double y99 =
      test::bisect([&](double y) { return penultimate_cdf(y, 100.0, kTail) - 0.99; }, 0.0, 1e4);
  EXPECT_NEAR(y99, 160.4, 0.1);
  EXPECT_THROW(penultimate_cdf(1.0, 0.5, kTail), DomainError);
  EXPECT_THROW(penultimate_cdf(-1.0, 5.0, kTail), DomainError);
}

TEST(PenultimateCdf, GumbelCoordinateIsLinearInYPowW) {
  for (double y : {5.0, 30.0, 90.0, 200.0}) {
    const double z = -std::log(-std::log(penultimate_cdf(y, 100.0, kTail)));
    const double cw = std::pow(10.0, 0.8);
    EXPECT_NEAR(z, (std::pow(y, 0.8) - cw * std::log(100.0)) / cw, 1e-9);
  }
}

TEST(PenultimateCdf, ShapeOneIsGumbel) {
  const WeibullTail<double> tail(10.0, 1.0);
  for (double n : {5.0, 100.0}) {
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double y = 0.3 * i;
      worst = std::max(worst, std::abs(penultimate_cdf(y, n, tail) - gumbel_cdf(y, 10.0 * std::log(n), 10.0)));
    }
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(PenultimateCdf, SurvivalComplement) {
  for (double y : {1.0, 50.0, 150.0, 400.0}) {
    EXPECT_NEAR(penultimate_survival(y, 100.0, kTail) + penultimate_cdf(y, 100.0, kTail), 1.0, 1e-15);
  }
  // far tail: survival keeps relative accuracy where 1 - cdf would underflow to 0
  const double s = penultimate_survival(2000.0, 100.0, kTail);
  EXPECT_GT(s, 0.0);
  EXPECT_NEAR(s, 100.0 * weibull_exceedance(2000.0, kTail), 1e-6 * s);
}

TEST(PenultimateCdf, TailErrorBoundedByModeError) {
  for (std::int64_t n : {5, 20, 100}) {
    const double nn = static_cast<double>(n);
    const double u = mode_u_n(nn, kTail);
    const double at_mode = std::abs(exact_block_cdf(u, n, kTail) - penultimate_cdf(u, nn, kTail));
    for (int i = 1; i <= 500; ++i) {
      const double y = u + 0.5 * i;
      EXPECT_LE(std::abs(exact_block_cdf(y, n, kTail) - penultimate_cdf(y, nn, kTail)), at_mode + 1e-15);
    }
  }
}

TEST(BlockCdfs, MatchEmpiricalMaxima) {
  for (std::int64_t n : {5, 20}) {
    for (double w : {0.7, 1.5}) {
      const WeibullTail<double> tail(10.0, w);
      RandomStream rng(static_cast<std::uint64_t>(n) * 10 + static_cast<std::uint64_t>(w * 10));
      std::vector<double> maxima(300000);
      for (auto& m : maxima) m = weibull_sample(rng, tail, n).maxCoeff();
      const double nn = static_cast<double>(n);
      const double d_exact = test::ks_distance(maxima, [&](double y) { return exact_block_cdf(y, n, tail); });
      const double d_pen = test::ks_distance(maxima, [&](double y) { return penultimate_cdf(y, nn, tail); });
      EXPECT_LT(d_exact, 0.005) << "n=" << n << " w=" << w;
      EXPECT_LT(d_pen, cauchy_rel_error(n) + 0.005) << "n=" << n << " w=" << w;
    }
  }
}

TEST(CauchyRelError, Values) {
  EXPECT_NEAR(cauchy_rel_error(50), 0.0102, 5e-5);
  EXPECT_NEAR(cauchy_rel_error(2), std::abs(std::exp(-1.0) - 0.25) / 0.25, 1e-12);
  EXPECT_NEAR(cauchy_rel_error(2), 0.4715, 5e-5);
  EXPECT_THROW(cauchy_rel_error(1), DomainError);
}

TEST(CauchyRelError, MonotoneDecreasing) {
  double prev = cauchy_rel_error(2);
  for (std::int64_t n = 3; n <= 10000; ++n) {
    const double cur = cauchy_rel_error(n);
    ASSERT_LT(cur, prev) << "n=" << n;
    prev = cur;
  }
}

TEST(GevCdf, Values) {
  EXPECT_NEAR(gev_cdf(0.0, GevParams<double>(0, 1, 0)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(gev_cdf(2.0, GevParams<double>(0, 1, 0.5)), std::exp(-0.25), 1e-15);
  EXPECT_EQ(gev_cdf(-2.5, GevParams<double>(0, 1, 0.5)), 0.0);
  EXPECT_EQ(gev_cdf(3.0, GevParams<double>(0, 1, -0.5)), 1.0);  // right of the upper end point 2
  EXPECT_NEAR(GevParams<double>(0, 1, 0.5).support_boundary(), -2.0, 1e-15);
  EXPECT_NEAR(GevParams<double>(0, 1, 0.25).tail_index(), 4.0, 1e-15);
  EXPECT_THROW(GevParams<double>(0, 0, 0.1), DomainError);
}

TEST(GevCdf, ContinuousInShapeAtZero) {
  for (int i = 0; i <= 100; ++i) {
    const double s = -3 + 0.12 * i;
    const double g = gev_cdf(s, GevParams<double>(0, 1, 0));
    EXPECT_LT(std::abs(gev_cdf(s, GevParams<double>(0, 1, 1e-7)) - g), 1e-5);
    EXPECT_LT(std::abs(gev_cdf(s, GevParams<double>(0, 1, -1e-7)) - g), 1e-5);
    EXPECT_LT(std::abs(gev_cdf(s, GevParams<double>(0, 1, 5e-9)) - g), 1e-12);
  }
}

TEST(GevQuantile, InvertsCdf) {
  EXPECT_NEAR(gev_quantile(std::exp(-1.0), GevParams<double>(3, 2, 0)), 3.0, 1e-12);
  EXPECT_NEAR(gev_quantile(std::exp(-0.25), GevParams<double>(0, 1, 0.5)), 2.0, 1e-12);
  EXPECT_NEAR(gev_quantile(0.77880, GevParams<double>(0, 1, 0.5)), 2.0, 1e-4);
  for (double k : {-0.3, 0.0, 0.3})
    for (double s : {-1.0, 0.0, 3.0}) {
      const GevParams<double> p(0, 1, k);
      EXPECT_NEAR(gev_quantile(gev_cdf(s, p), p), s, 1e-9);
    }
  for (double k : {-0.2, 0.0, 0.4})
    for (double p : {0.001, 0.3, 0.999}) {
      const GevParams<double> g(10, 3, k);
      EXPECT_NEAR(gev_cdf(gev_quantile(p, g), g), p, 1e-10 * p);
    }
  EXPECT_THROW(gev_quantile(1.0, GevParams<double>(0, 1, 0)), DomainError);
}

TEST(CdfProperties, MonotoneOnGrid) {
  const GevParams<double> gev(50, 15, 0.1);
  double prev[4] = {-1, -1, -1, -1};
  for (int i = 0; i < 1000; ++i) {
    const double y = 0.4 * i;
    const double cur[4] = {exact_block_cdf(y, 100, kTail), penultimate_cdf(y, 100.0, kTail), gev_cdf(y, gev),
                           gumbel_cdf(y, 50.0, 15.0)};
    for (int k = 0; k < 4; ++k) {
      ASSERT_GE(cur[k], prev[k]) << "function " << k << " at y=" << y;
      prev[k] = cur[k];
    }
  }
}

TEST(ReducedVariate, ClampsExtremes) {
  EXPECT_TRUE(std::isfinite(reduced_variate(0.0)));
  EXPECT_TRUE(std::isfinite(reduced_variate(1.0)));
  EXPECT_EQ(clamp_probability(0.0), kProbabilityFloor);
  EXPECT_EQ(clamp_probability(1.0), kProbabilityCeiling);
  EXPECT_NEAR(reduced_variate(std::exp(-1.0)), 0.0, 1e-15);
}

TEST(ArrayOverloads, AgreeWithScalar) {
  Eigen::ArrayXd y = Eigen::ArrayXd::LinSpaced(50, 1.0, 300.0);
  const Eigen::ArrayXd p = penultimate_cdf(y, 100.0, kTail);
  const GevParams<double> gev(50, 15, -0.1);
  const Eigen::ArrayXd g = gev_cdf(y, gev);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    EXPECT_EQ(p(i), penultimate_cdf(y(i), 100.0, kTail));
    EXPECT_EQ(g(i), gev_cdf(y(i), gev));
  }
}
