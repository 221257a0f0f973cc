#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "specstat/models.hpp"
#include "specstat/spectral_stats.hpp"
#include "test_support.hpp"

namespace specstat {
namespace {

const FactorSpectrum kThree({{0, 1}, {1, 1}, {2, 1}});

TEST(FactorMoments, Examples) {
  const auto two = factor_moments(FactorSpectrum::two_level(2));
  EXPECT_EQ(two.mu, 1);
  EXPECT_EQ(two.sigma2, 1);

  const auto single = factor_moments(FactorSpectrum({{Rational(7, 3), 5}}));
  EXPECT_EQ(single.mu, Rational(7, 3));
  EXPECT_EQ(single.sigma2, 0);

  const auto three = factor_moments(kThree);
  EXPECT_EQ(three.mu, 1);
  EXPECT_EQ(three.sigma2, Rational(2, 3));
}

TEST(SystemMoments, Examples) {
  const auto pf = system_moments(build(pf_bcn(3)));
  EXPECT_EQ(pf.mu, 3);
  EXPECT_EQ(pf.sigma2, Rational(7, 2));
  const auto hs = system_moments(build(hs_su11(3)));
  EXPECT_EQ(hs.mu, 2);
  EXPECT_EQ(hs.sigma2, 2);
  const auto coin = system_moments(FactorizedPartitionFunction({FactorSpectrum::two_level(1)}));
  EXPECT_EQ(coin.mu, Rational(1, 2));
  EXPECT_EQ(coin.sigma2, Rational(1, 4));
}

TEST(SystemMoments, ShiftMovesTheMeanOnlyAndMultiplicityIsInert) {
  const auto base = build(pf_bcn(5));
  const FactorizedPartitionFunction moved(
      std::vector<FactorSpectrum>(base.factors().begin(), base.factors().end()), Rational(-9, 4), 17);
  const auto a = system_moments(base);
  const auto b = system_moments(moved);
  EXPECT_EQ(b.mu, a.mu - Rational(9, 4));
  EXPECT_EQ(b.sigma2, a.sigma2);
  EXPECT_EQ(b.skewness, a.skewness);
  EXPECT_EQ(b.excess_kurtosis, a.excess_kurtosis);
}

TEST(DensityMoments, MatchesFactorPathOnRandomSystems) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pf = testing::random_pf(rng);
    const auto exact = system_moments(pf);
    const auto dense = density_moments(expand(pf));
    EXPECT_EQ(dense.mu, exact.mu) << trial;
    EXPECT_EQ(dense.sigma2, exact.sigma2) << trial;
    if (exact.sigma2 > 0) {
      EXPECT_NEAR(dense.skewness, exact.skewness, 1e-12 * (1 + std::abs(exact.skewness)));
      EXPECT_NEAR(dense.excess_kurtosis, exact.excess_kurtosis, 1e-12 * (1 + std::abs(exact.excess_kurtosis)));
    }
  }
}

TEST(DensityMoments, Examples) {
  const auto pf3 = density_moments(expand(build(pf_bcn(3))));
  EXPECT_EQ(pf3.mu, 3);
  EXPECT_EQ(pf3.sigma2, Rational(7, 2));
  EXPECT_EQ(pf3.skewness, 0.0);
  const auto point = density_moments(LevelDensity({{0, 1}}));
  EXPECT_EQ(point.mu, 0);
  EXPECT_EQ(point.sigma2, 0);
  EXPECT_EQ(density_moments(expand(build(hs_su11(12)))).skewness, 0.0);
}

TEST(DensityMoments, OrderControlsHigherMoments) {
  const LevelDensity d({{0, 1}, {1, 3}, {5, 2}});
  const auto two = density_moments(d, 2);
  EXPECT_TRUE(std::isnan(two.skewness));
  EXPECT_TRUE(std::isnan(two.excess_kurtosis));
  const auto three = density_moments(d, 3);
  EXPECT_FALSE(std::isnan(three.skewness));
  EXPECT_TRUE(std::isnan(three.excess_kurtosis));
  EXPECT_THROW(density_moments(d, 1), InvalidArgument);
  EXPECT_THROW(density_moments(d, 5), InvalidArgument);
}

TEST(DensityMoments, BernoulliClosedForms) {
  // One factor {0:1, 1:3}: p = 3/4, skewness (1-2p)/sqrt(p(1-p)), excess kurtosis (1-6p(1-p))/(p(1-p)).
  const auto m = density_moments(LevelDensity({{0, 1}, {1, 3}}));
  const double p = 0.75;
  EXPECT_NEAR(m.skewness, (1 - 2 * p) / std::sqrt(p * (1 - p)), 1e-15);
  EXPECT_NEAR(m.excess_kurtosis, (1 - 6 * p * (1 - p)) / (p * (1 - p)), 1e-14);
}

TEST(ThermodynamicEnergy, AtOneIsTheMean) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pf = testing::random_pf(rng);
    const double mu = to_double(system_moments(pf).mu);
    const auto e = thermodynamic_energy(pf, 1.0);
    EXPECT_NEAR(e.real(), mu, 1e-12 * (1 + std::abs(mu)));
    EXPECT_NEAR(e.imag(), 0.0, 1e-12);
  }
}

TEST(ThermodynamicEnergy, TwoLevelExamples) {
  const FactorizedPartitionFunction coin({FactorSpectrum::two_level(1)});
  for (double q : {0.1, 0.5, 1.0, 3.0}) EXPECT_NEAR(thermodynamic_energy(coin, q).real(), q / (1 + q), 1e-15);
  EXPECT_EQ(thermodynamic_energy(coin, 0.0), std::complex<double>(0.0));
  EXPECT_NEAR(std::abs(thermodynamic_energy(coin, 1e-300)), 0.0, 1e-299);
  EXPECT_THROW(thermodynamic_energy(coin, -1.0), PoleError);
  const FactorizedPartitionFunction e2({FactorSpectrum::two_level(2)});
  EXPECT_THROW(thermodynamic_energy(e2, std::complex<double>(0.0, 1.0)), PoleError);
}

TEST(ThermodynamicEnergy, MatchesLogDerivativeOfZ) {
  const auto pf = build(hs_su11(6));
  const std::complex<double> q = std::polar(0.7, 0.4);
  const double h = 1e-6;
  const auto dlog = (std::log(evaluate(pf, q * (1 + h))) - std::log(evaluate(pf, q * (1 - h)))) / (2 * h);
  EXPECT_LT(std::abs(thermodynamic_energy(pf, q) - dlog), 1e-6);
}

TEST(CharFun, Examples) {
  const FactorizedPartitionFunction coin({FactorSpectrum::two_level(1)});
  EXPECT_EQ(char_fun(coin, 0.0), std::complex<double>(1.0));
  for (double t : {0.3, 1.0, 2.5, -4.0})
    EXPECT_LT(std::abs(char_fun(coin, t) - (1.0 + std::polar(1.0, t)) / 2.0), 1e-15);

  const auto toy5 = build(toy(kThree, 5));
  const FactorizedPartitionFunction one({kThree});
  for (double t : {0.2, 1.1, 3.0}) EXPECT_LT(std::abs(char_fun(toy5, t) - std::pow(char_fun(one, t), 5)), 1e-14);
}

TEST(CharFun, BoundedByOneAndMatchesTheDensity) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pf = testing::random_pf(rng, 4, 3);
    const LevelDensity d = expand(pf);
    for (double t : {0.0, 0.37, 1.9, 7.5}) {
      std::complex<double> direct = 0.0;
      for (const auto& lv : d.levels())
        direct += static_cast<double>(ratio(lv.degeneracy, d.dimension())) * std::polar(1.0, t * to_double(lv.energy));
      const auto phi = char_fun(pf, t);
      EXPECT_LE(std::abs(phi), 1.0 + 1e-15);
      EXPECT_LT(std::abs(phi - direct), 1e-12);
    }
  }
}

TEST(NormalizedCharFun, TwoLevelFactorIsCosine) {
  for (int e : {1, 2, 17, 1000}) {
    const FactorizedPartitionFunction pf({FactorSpectrum::two_level(e)}, 5, 3);
    for (double t : {0.0, 0.4, 1.0, 2.0}) EXPECT_LT(std::abs(normalized_char_fun(pf, t) - std::cos(t)), 1e-13);
  }
}

TEST(NormalizedCharFun, ProductLawAgreesWithTheDefinition) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pf = testing::random_pf(rng, 5, 3);
    const auto m = system_moments(pf);
    if (m.sigma2 == 0) continue;
    const double mu = to_double(m.mu), sigma = std::sqrt(to_double(m.sigma2));
    for (double t : {0.0, 0.5, 1.3}) {
      const auto expected = std::polar(1.0, -t * mu / sigma) * char_fun(pf, t / sigma);
      // The direct form evaluates phases of size t |E| / sigma, which dominate its rounding.
      EXPECT_LT(std::abs(normalized_char_fun(pf, t) - expected), 1e-14 * (1 + t * 20 / sigma)) << trial;
    }
  }
}

TEST(NormalizedCharFun, ZeroVarianceIsRejected) {
  const FactorizedPartitionFunction flat({FactorSpectrum({{3, 2}})});
  EXPECT_THROW(normalized_char_fun(flat, 0.5), ZeroVarianceError);
  const std::vector<double> grid{0.0, 0.1};
  EXPECT_THROW(log_normalized_char_fun(flat, grid), ZeroVarianceError);
}

TEST(LogNormalizedCharFun, SingleTwoLevelFactorIsLogCos) {
  const FactorizedPartitionFunction pf({FactorSpectrum::two_level(4)});
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(std::numbers::pi / 4 * i / 40);
  const auto logs = log_normalized_char_fun(pf, grid);
  EXPECT_EQ(logs.front(), std::complex<double>(0.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(logs[i].real(), std::log(std::cos(grid[i])), 1e-14);
    EXPECT_NEAR(logs[i].imag(), 0.0, 1e-14);
  }
}

TEST(LogNormalizedCharFun, UnwindsPhaseBeyondPi) {
  // One factor {0:1, 1:3} has |phi-bar| > 1/2 everywhere, so its phase winds freely.
  const FactorizedPartitionFunction pf({FactorSpectrum({{0, 1}, {1, 3}})});
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(40.0 * i / 4000);
  const auto logs = log_normalized_char_fun(pf, grid);
  for (std::size_t i = 0; i < grid.size(); i += 97) {
    const auto back = std::exp(logs[i]);
    EXPECT_LT(std::abs(back - normalized_char_fun(pf, grid[i])), 1e-12);
  }
  EXPECT_GT(std::abs(logs.back().imag()), 2 * std::numbers::pi);
}

TEST(LogNormalizedCharFun, HsSixtyStaysNearTheGaussian) {
  const auto pf = build(hs_su11(60));
  std::vector<double> grid;
  for (int i = 0; i < 64; ++i) grid.push_back(3.0 * i / 63);
  const auto logs = log_normalized_char_fun(pf, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(logs[i] + 0.5 * grid[i] * grid[i]));
  // The discrepancy at t = 3 is about 0.17: the fourth cumulant term dominates there.
  EXPECT_LT(worst, 0.2);
  EXPECT_LT(std::abs(logs[21] + 0.5 * grid[21] * grid[21]), 1e-2);
}

TEST(LogNormalizedCharFun, BranchLossAndBadGridsAreReported) {
  const FactorizedPartitionFunction coin({FactorSpectrum::two_level(1)});
  const std::vector<double> through_zero{0.0, 1.0, std::numbers::pi / 2, 2.0};
  EXPECT_THROW(log_normalized_char_fun(coin, through_zero), BranchError);
  const std::vector<double> coarse{0.0, 1.5, 3.0};
  EXPECT_THROW(log_normalized_char_fun(coin, coarse), BranchError);
  EXPECT_THROW(log_normalized_char_fun(coin, std::vector<double>{0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(log_normalized_char_fun(coin, std::vector<double>{0.0, 0.2, 0.2}), InvalidArgument);
  EXPECT_THROW(log_normalized_char_fun(coin, std::vector<double>{}), InvalidArgument);
}

TEST(ThirdLogDerivSup, TwoLevelClosedFormIndependentOfEnergy) {
  for (double tau : {0.1, 0.5, std::numbers::pi / 4}) {
    const double expected = 2 * std::tan(tau) / (std::cos(tau) * std::cos(tau));
    for (int e : {1, 3, 250}) EXPECT_NEAR(third_log_deriv_sup(FactorSpectrum::two_level(e), tau), expected, 1e-8);
  }
  EXPECT_NEAR(third_log_deriv_sup(FactorSpectrum::two_level(9), std::numbers::pi / 4), 4.0, 1e-12);
}

TEST(ThirdLogDerivSup, SmallTauGivesTheStandardizedThirdCumulant) {
  EXPECT_LT(third_log_deriv_sup(kThree, 1e-6), 1e-5);
  // Bernoulli(3/4): |skewness| = 2 / sqrt(3).
  const FactorSpectrum skewed({{0, 1}, {1, 3}});
  EXPECT_NEAR(third_log_deriv_sup(skewed, 1e-7), 2 / std::sqrt(3.0), 1e-6);
}

TEST(ThirdLogDerivSup, MatchesFiniteDifferences) {
  const std::vector<double> e{0, 1, 2}, w{1, 1, 1};
  auto f_re = [&](double s) { return testing::log_phibar_direct(e, w, s).real(); };
  auto f_im = [&](double s) { return testing::log_phibar_direct(e, w, s).imag(); };
  double sup = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double s = -0.1 + 0.2 * i / 20;
    const double re = testing::third_derivative_7pt(f_re, s, 1e-2);
    const double im = testing::third_derivative_7pt(f_im, s, 1e-2);
    sup = std::max(sup, std::hypot(re, im));
  }
  EXPECT_NEAR(third_log_deriv_sup(kThree, 0.1), sup, 1e-6);

  const std::vector<double> e2{0, 1, 5}, w2{2, 1, 3};
  const FactorSpectrum lopsided({{0, 2}, {1, 1}, {5, 3}});
  auto g_re = [&](double s) { return testing::log_phibar_direct(e2, w2, s).real(); };
  auto g_im = [&](double s) { return testing::log_phibar_direct(e2, w2, s).imag(); };
  const double at_edge = std::hypot(testing::third_derivative_7pt(g_re, 0.2, 1e-2),
                                    testing::third_derivative_7pt(g_im, 0.2, 1e-2));
  EXPECT_GE(third_log_deriv_sup(lopsided, 0.2, 2001) + 1e-6, at_edge);
}

TEST(ThirdLogDerivSup, TaylorRemainderBound) {
  const std::vector<FactorSpectrum> factors{kThree, FactorSpectrum({{0, 1}, {1, 3}}),
                                            FactorSpectrum({{-2, 1}, {0, 5}, {3, 2}, {4, 1}}),
                                            FactorSpectrum::two_level(6)};
  const double eps1 = 0.5;
  for (const auto& f : factors) {
    const FactorizedPartitionFunction one({f});
    for (int i = 1; i <= 25; ++i) {
      const double tau = eps1 * i / 25;
      const std::vector<double> grid{0.0, tau / 3, 2 * tau / 3, tau};
      const auto lg = log_normalized_char_fun(one, grid).back();
      const double remainder = std::abs(lg + 0.5 * tau * tau);
      EXPECT_LE(remainder, tau * tau * tau / 6 * third_log_deriv_sup(f, tau) * (1 + 1e-9) + 1e-15);
    }
  }
}

TEST(ThirdLogDerivSup, ErrorsAreTyped) {
  EXPECT_THROW(third_log_deriv_sup(FactorSpectrum({{1, 4}}), 0.3), ZeroVarianceError);
  EXPECT_THROW(third_log_deriv_sup(FactorSpectrum::two_level(1), std::numbers::pi / 2), PoleError);
  EXPECT_THROW(third_log_deriv_sup(FactorSpectrum::two_level(1), 2.0), PoleError);
  EXPECT_THROW(third_log_deriv_sup(kThree, -0.1), InvalidArgument);
  EXPECT_THROW(third_log_deriv_sup(kThree, 0.1, 1), InvalidArgument);
}

TEST(MomentsJson, RationalsAreStrings) {
  const auto j = to_json(system_moments(build(pf_bcn(3))));
  EXPECT_EQ(j["mu"], "3");
  EXPECT_EQ(j["sigma2"], "7/2");
  EXPECT_EQ(j["skewness"].get<double>(), 0.0);
  EXPECT_EQ(j.dump().find("\"mu\":\"3\",\"sigma2\":\"7/2\",\"skewness\""), 1u);
}

}  // namespace
}  // namespace specstat
