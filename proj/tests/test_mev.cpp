#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mev/mev.hpp"
#include "mev/montecarlo.hpp"
#include "oracles.hpp"

using namespace mev;

namespace {

const WeibullTail<double> kTail(10, 0.8);

MevModel homogeneous(double n = 100) { return MevModel({{n, kTail}}); }

// Largest of n Weibull draws, by inversion.
double draw_max(RandomStream& rng, double n, const WeibullTail<double>& t) {
  double m = 0;
  for (int i = 0; i < static_cast<int>(n); ++i) m = std::max(m, t.scale * std::pow(-std::log(rng.uniform()), 1.0 / t.shape));
  return m;
}

double sup_distance_to_mixture(const MevModel& model, int draws, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> maxima(static_cast<std::size_t>(draws));
  const auto& comps = model.components();
  for (auto& m : maxima) {
    const auto& c = comps[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(comps.size()) - 1))];
    m = draw_max(rng, c.n, c.tail);
  }
  return test::ks_distance(maxima, [&](double y) { return mev_cdf(y, model); });
}

}  // namespace

TEST(MevModel, Validation) {
  EXPECT_THROW(MevModel({}), ValidationError);
  EXPECT_THROW(MevModel({{0.5, kTail}}), ValidationError);
  EXPECT_THROW(MevModel({{10, kTail}, {20, kTail}}, {0.5, 0.6}), ValidationError);
  EXPECT_THROW(MevModel({{10, kTail}}, {0.5, 0.5}), ValidationError);
  const MevModel m({{80, kTail}, {120, WeibullTail<double>(12, 0.7)}});
  EXPECT_DOUBLE_EQ(m.mean_cardinality(), 100);
  EXPECT_DOUBLE_EQ(m.max_scale(), 12);
  EXPECT_DOUBLE_EQ(m.min_shape(), 0.7);
}

TEST(MevCdf, SingleComponentIsPenultimate) {
  const MevModel m = homogeneous();
  for (double y : {0.0, 5.0, 40.0, 67.46, 160.0, 400.0}) {
    EXPECT_EQ(mev_cdf(y, m), penultimate_cdf(y, 100.0, kTail));
    EXPECT_EQ(mev_cdf(y, m), mev_cdf_homogeneous(y, kTail, 100));
  }
}

TEST(MevCdf, TwoComponentsAverage) {
  const WeibullTail<double> other(12, 0.7);
  const MevModel m({{80, kTail}, {120, other}});
  for (double y : {20.0, 60.0, 100.0, 200.0})
    EXPECT_NEAR(mev_cdf(y, m), 0.5 * (penultimate_cdf(y, 80.0, kTail) + penultimate_cdf(y, 120.0, other)), 1e-15);
}

TEST(MevCdf, ArrayMatchesScalar) {
  const MevModel m({{80, kTail}, {120, WeibullTail<double>(12, 0.7)}});
  const Eigen::ArrayXd y = Eigen::ArrayXd::LinSpaced(50, 1, 300);
  const Eigen::ArrayXd f = mev_cdf(y, m);
  for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_NEAR(f(i), mev_cdf(y(i), m), 1e-15);
  EXPECT_THROW(mev_cdf(-1.0, m), DomainError);
}

TEST(MevCdf, ProperCdfAndMixtureBounds) {
  const std::vector<MevComponent> comps{
      {60, WeibullTail<double>(8, 0.75)}, {100, kTail}, {140, WeibullTail<double>(12, 0.7)}};
  const MevModel m(comps);
  double prev = 0;
  for (double y = 0; y <= 2000; y += 2.5) {
    const double f = mev_cdf(y, m);
    EXPECT_GE(f, prev);
    double lo = 1;
    double hi = 0;
    for (const auto& c : comps) {
      lo = std::min(lo, penultimate_cdf(y, c.n, c.tail));
      hi = std::max(hi, penultimate_cdf(y, c.n, c.tail));
    }
    EXPECT_GE(f, lo - 1e-15);
    EXPECT_LE(f, hi + 1e-15);
    prev = f;
  }
  EXPECT_LT(mev_cdf(1e-3, m), 1e-12);
  EXPECT_GT(mev_cdf(2000, m), 1 - 1e-12);
}

TEST(MevCdf, PermutationInvariant) {
  std::vector<MevComponent> comps{{60, WeibullTail<double>(8, 0.75)},
                                  {100, kTail},
                                  {140, WeibullTail<double>(12, 0.7)},
                                  {90, WeibullTail<double>(9, 0.85)}};
  const MevModel base(comps);
  std::reverse(comps.begin(), comps.end());
  const MevModel reversed(comps);
  std::rotate(comps.begin(), comps.begin() + 1, comps.end());
  const MevModel rotated(comps);
  for (double y : {10.0, 50.0, 90.0, 150.0, 300.0}) {
    EXPECT_NEAR(mev_cdf(y, reversed), mev_cdf(y, base), 1e-15);
    EXPECT_NEAR(mev_cdf(y, rotated), mev_cdf(y, base), 1e-15);
  }
}

TEST(MevCdf, MixedCardinalityApproachesMeanCardinality) {
  const MevModel m({{80, kTail}, {120, kTail}});
  // The two agree only asymptotically; at y = C they are far apart in
  // relative terms and the 0.002 bound is reached from about 9C upward.
  for (double y = 90; y <= 400; y += 5) EXPECT_LT(std::abs(mev_cdf(y, m) - mev_cdf_homogeneous(y, kTail, 100)), 0.002) << y;
  EXPECT_LT(std::abs(mev_cdf(50, m) - mev_cdf_homogeneous(50, kTail, 100)), 0.02);
  EXPECT_NE(mev_cdf(10, m), mev_cdf_homogeneous(10, kTail, 100));
}

TEST(MevCdf, SmallMixtureMatchesBruteForce) {
  const MevModel m({{30, WeibullTail<double>(8, 0.75)},
                    {40, WeibullTail<double>(12, 0.7)},
                    {50, kTail},
                    {35, WeibullTail<double>(9, 0.85)}});
  EXPECT_LT(sup_distance_to_mixture(m, 1'000'000, 314), 0.01);
}

TEST(MevCdf, ExperimentTwoMixtureMatchesBruteForce) {
  const auto spec = ExperimentSpec::preset(2);
  std::vector<MevComponent> comps;
  for (int j = 0; j < spec.n_years; ++j) comps.push_back({100, spec.regime_tail(j)});
  EXPECT_LT(sup_distance_to_mixture(MevModel(comps), 1'000'000, 315), 0.01);
}

TEST(ReturnLevel, AnalyticAnchor) {
  const double y = return_level(100, homogeneous());
  // (y/C)^w = ln n - ln(-ln(1 - 1/T))
  const double expected = 10 * std::pow(std::log(100.0) - std::log(-std::log(0.99)), 1.25);
  EXPECT_NEAR(y, expected, 1e-8 * expected);
  EXPECT_NEAR(y, 160.4, 0.1);
  EXPECT_NEAR(mev_cdf(y, homogeneous()), 0.99, 1e-9);
}

TEST(ReturnLevel, ModeIdentity) {
  const double e = std::numbers::e;
  EXPECT_NEAR(return_level(e / (e - 1), homogeneous()), mode_u_n(100.0, kTail), 1e-8);
  EXPECT_NEAR(return_period(mode_u_n(100.0, kTail), homogeneous()).years, e / (e - 1), 1e-12);
  EXPECT_NEAR(e / (e - 1), 1.582, 5e-4);
}

TEST(ReturnLevel, RoundTrip) {
  const MevModel m({{80, kTail}, {120, WeibullTail<double>(12, 0.7)}, {95, WeibullTail<double>(9, 0.85)}});
  for (double t : {10.0, 100.0, 1000.0}) {
    const double y = return_level(t, m);
    const ReturnPeriod rp = return_period(y, m);
    EXPECT_FALSE(rp.saturated);
    EXPECT_NEAR(rp.years, t, 1e-8 * t);
    EXPECT_NEAR(mev_cdf(y, m), 1 - 1 / t, 1e-9);
  }
  EXPECT_THROW(return_level(1.0, m), DomainError);
  EXPECT_THROW(return_level(0.5, m), DomainError);
}

TEST(ReturnPeriod, EndpointsAndSaturation) {
  const ReturnPeriod at_zero = return_period(0, homogeneous());
  EXPECT_DOUBLE_EQ(at_zero.years, 1.0);
  EXPECT_FALSE(at_zero.saturated);
  const ReturnPeriod far = return_period(5000, homogeneous());
  EXPECT_TRUE(far.saturated);
}

TEST(ReturnPeriod, MatchesBruteForceQuantile) {
  const auto spec = ExperimentSpec::preset(1);
  const TruthCurve truth = truth_curve(spec, 1'000'000, RandomStream(99));
  const double y = truth.quantile(0.999);
  EXPECT_NEAR(return_period(y, homogeneous()).years, 1000, 100);
}

TEST(BuildMevModel, WholeRecordWindow) {
  auto spec = ExperimentSpec::preset(1);
  const auto blocks = summarize_years(generate_experiment(spec, RandomStream(5)), 10.0);
  const MevBuild b = build_mev_model(blocks, 50);
  ASSERT_EQ(b.fits.size(), 1u);
  EXPECT_EQ(b.model.size(), 50u);
  EXPECT_EQ(b.fitted_labels[0], "1-50");
  const WeibullTail<double>& tail = b.model.components()[0].tail;
  for (const auto& c : b.model.components()) {
    EXPECT_EQ(c.tail.scale, tail.scale);
    EXPECT_EQ(c.n, 100);
  }
  for (double y : {150.0, 200.0, 300.0})
    EXPECT_NEAR(mev_cdf(y, b.model), mev_cdf_homogeneous(y, tail, b.model.mean_cardinality()), 1e-12);
}

TEST(BuildMevModel, YearlyWindows) {
  auto spec = ExperimentSpec::preset(3);
  const auto blocks = summarize_years(generate_experiment(spec, RandomStream(6)), 10.0);
  const MevBuild b = build_mev_model(blocks, 1);
  EXPECT_EQ(b.model.size(), 50u);
  EXPECT_EQ(b.fits.size(), 50u);
  for (std::size_t j = 0; j < 50; ++j) {
    EXPECT_EQ(b.model.components()[j].tail.scale, b.fits[j].tail().scale);
    EXPECT_EQ(b.model.components()[j].n, blocks[j].n_wet);
  }
}

TEST(BuildMevModel, ExcludesThinWindow) {
  auto spec = ExperimentSpec::preset(1);
  spec.n_years = 4;
  auto blocks = summarize_years(generate_experiment(spec, RandomStream(7)), 10.0);
  blocks[2].tail_values.resize(2);
  const MevBuild b = build_mev_model(blocks, 1);
  ASSERT_EQ(b.excluded.size(), 1u);
  EXPECT_EQ(b.excluded[0].label, blocks[2].label);
  EXPECT_NE(b.excluded[0].reason.find("InsufficientData"), std::string::npos);
  EXPECT_EQ(b.model.size(), 3u);

  for (auto& blk : blocks) blk.tail_values.resize(1);
  EXPECT_THROW(build_mev_model(blocks, 1), InsufficientData);
}

TEST(MevModelJson, RoundTrip) {
  const MevModel m({{80, kTail}, {120, WeibullTail<double>(12.25, 0.7125, 10)}}, {0.25, 0.75});
  const MevModel back = mev_model_from_json(nlohmann::json::parse(to_json(m).dump()));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.weights(), m.weights());
  for (double y : {30.0, 90.0, 250.0}) EXPECT_EQ(mev_cdf(y, back), mev_cdf(y, m));
  EXPECT_THROW(mev_model_from_json(nlohmann::json::parse(R"({"components": [{"n": 10}]})")), ValidationError);
  EXPECT_THROW(mev_model_from_json(nlohmann::json::parse(R"({"components": []})")), ValidationError);
}
