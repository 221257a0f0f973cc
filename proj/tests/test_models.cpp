#include <gtest/gtest.h>

#include <vector>

#include "specstat/models.hpp"
#include "specstat/spectral_stats.hpp"

namespace specstat {
namespace {

std::vector<Rational> factor_energies(const FactorizedPartitionFunction& pf) {
  std::vector<Rational> out;
  for (const auto& f : pf.factors()) {
    EXPECT_TRUE(f.is_two_level());
    out.push_back(f.max_energy());
  }
  return out;
}

TEST(Build, PfBcnThree) {
  const auto ferro = build(pf_bcn(3));
  EXPECT_EQ(factor_energies(ferro), (std::vector<Rational>{1, 2, 3}));
  EXPECT_EQ(ferro.energy_shift(), 0);
  EXPECT_EQ(ferro.global_multiplicity(), 1);
  const auto anti = build(pf_bcn(3, +1));
  EXPECT_EQ(factor_energies(anti), (std::vector<Rational>{1, 2, 3}));
  EXPECT_EQ(anti.energy_shift(), 3);
}

TEST(Build, HsSu11Four) {
  const auto hs = build(hs_su11(4));
  EXPECT_EQ(factor_energies(hs), (std::vector<Rational>{3, 4, 3}));
  EXPECT_EQ(hs.energy_shift(), 0);
  EXPECT_EQ(hs.global_multiplicity(), 2);
}

TEST(Build, ToyCopiesTheOneParticleSpectrum) {
  const FactorSpectrum f({{0, 1}, {Rational(1, 2), 2}});
  const auto pf = build(toy(f, 4));
  ASSERT_EQ(pf.factor_count(), 4u);
  for (const auto& g : pf.factors()) EXPECT_EQ(g, f);
}

TEST(Build, TwoLevelFamilyEvaluatesThePolynomial) {
  // E(k, N) = 2 k^2 + k N
  const auto pf = build(two_level_family({{2, 2, 0}, {1, 1, 1}}, 3));
  EXPECT_EQ(factor_energies(pf), (std::vector<Rational>{5, 14, 27}));
}

TEST(Build, InvalidSpecsAreRejected) {
  EXPECT_THROW(build(pf_bcn(0)), ModelError);
  EXPECT_THROW(build(pf_bcn(3, 0)), ModelError);
  EXPECT_THROW(build(hs_su11(1)), ModelError);
  EXPECT_THROW(build(ModelSpec{ModelKind::kToy, 3, -1, {}, {}}), ModelError);
  EXPECT_THROW(build(toy(FactorSpectrum::two_level(1), 0)), ModelError);
  EXPECT_THROW(build(two_level_family({}, 3)), ModelError);
  // E(k, N) = k - 2 vanishes at k = 2.
  EXPECT_THROW(build(two_level_family({{1, 1, 0}, {-2, 0, 0}}, 3)), ModelError);
}

TEST(Models, DimensionsAreTwoToTheN) {
  for (int n : {1, 5, 40}) EXPECT_EQ(expand(build(pf_bcn(n))).dimension(), pow2(static_cast<unsigned>(n)));
  for (int n : {2, 5, 40}) EXPECT_EQ(expand(build(hs_su11(n))).dimension(), pow2(static_cast<unsigned>(n)));
}

TEST(Models, ClosedFormMoments) {
  for (int n = 2; n <= 60; ++n) {
    const auto pf = system_moments(build(pf_bcn(n)));
    EXPECT_EQ(pf.mu, Rational(n * (n + 1), 4));
    EXPECT_EQ(pf.sigma2, Rational(n * (2 * n + 1) * (n + 1), 24));
    const auto hs = system_moments(build(hs_su11(n)));
    const long nn = n;
    EXPECT_EQ(hs.mu, Rational(nn * (nn * nn - 1), 12));
    EXPECT_EQ(hs.sigma2, Rational(nn * (nn * nn * nn * nn - 1), 120));
  }
}

TEST(Models, AntiferromagneticSignIsARigidTranslation) {
  for (int n : {1, 4, 13}) {
    const Rational shift(n * (n - 1), 2);
    EXPECT_EQ(expand(build(pf_bcn(n, +1))), expand(build(pf_bcn(n, -1))).translated(shift));
  }
}

TEST(Models, HsDensityIsSymmetricAboutTheMean) {
  for (int n : {3, 8, 17}) {
    const LevelDensity d = expand(build(hs_su11(n)));
    const Rational two_mu = 2 * system_moments(build(hs_su11(n))).mu;
    for (const auto& lv : d.levels()) EXPECT_EQ(d.degeneracy_at(two_mu - lv.energy), lv.degeneracy);
  }
}

TEST(Models, BinaryToyIsBinomial) {
  const int n = 30;
  const LevelDensity d = expand(build(toy(FactorSpectrum::two_level(1), n)));
  BigInt c = 1;
  for (int j = 0; j <= n; ++j) {
    EXPECT_EQ(d.degeneracy_at(j), c);
    c = c * (n - j) / (j + 1);
  }
}

TEST(EigenvalueSumSample, Examples) {
  const auto coin3 = toy(FactorSpectrum::two_level(1), 3);
  EXPECT_EQ(eigenvalue_sum_sample(coin3, std::vector<std::size_t>{0, 0, 0}), 0);
  EXPECT_EQ(eigenvalue_sum_sample(coin3, std::vector<std::size_t>{1, 0, 1}), 2);

  const auto three2 = toy(FactorSpectrum({{0, 1}, {1, 1}, {2, 1}}), 2);
  EXPECT_EQ(eigenvalue_sum_sample(three2, std::vector<std::size_t>{2, 1}), 3);
  EXPECT_EQ(eigenvalue_sum_sample(three2, std::vector<std::size_t>{1, 2}), 3);
  EXPECT_EQ(expand(build(three2)).degeneracy_at(3), 2);
}

TEST(EigenvalueSumSample, EveryTupleLandsOnAnExpandedLevel) {
  const auto spec = toy(FactorSpectrum({{Rational(-1, 2), 1}, {1, 1}, {Rational(7, 3), 1}}), 4);
  const LevelDensity d = expand(build(spec));
  std::vector<std::size_t> c(4, 0);
  BigInt seen = 0;
  for (int code = 0; code < 81; ++code) {
    for (int k = 0, r = code; k < 4; ++k, r /= 3) c[static_cast<std::size_t>(k)] = static_cast<std::size_t>(r % 3);
    EXPECT_GT(d.degeneracy_at(eigenvalue_sum_sample(spec, c)), 0);
    ++seen;
  }
  EXPECT_EQ(seen, d.dimension());
}

TEST(EigenvalueSumSample, Errors) {
  const auto spec = toy(FactorSpectrum::two_level(1), 2);
  EXPECT_THROW(eigenvalue_sum_sample(spec, std::vector<std::size_t>{0, 2}), InvalidArgument);
  EXPECT_THROW(eigenvalue_sum_sample(spec, std::vector<std::size_t>{0}), InvalidArgument);
  EXPECT_THROW(eigenvalue_sum_sample(pf_bcn(2), std::vector<std::size_t>{0, 0}), ModelError);
}

TEST(ModelKindNames, RoundTrip) {
  for (auto k : {ModelKind::kPfBcn, ModelKind::kHsSu11, ModelKind::kToy, ModelKind::kTwoLevelFamily})
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_EQ(parse_model_kind("pf-bcn"), ModelKind::kPfBcn);
  EXPECT_EQ(parse_model_kind("hs_su11"), ModelKind::kHsSu11);
  EXPECT_THROW(parse_model_kind("ising"), ModelError);
}

TEST(ModelJson, ParsesEveryKind) {
  const auto pf = model_from_json(nlohmann::json::parse(R"({"kind":"PF_BCN","N":5,"epsilon":1})"));
  EXPECT_EQ(pf.kind, ModelKind::kPfBcn);
  EXPECT_EQ(pf.N, 5);
  EXPECT_EQ(pf.epsilon, 1);

  const auto t = model_from_json(
      nlohmann::json::parse(R"({"kind":"TOY","N":2,"one_particle_spectrum":[[0,1],["1/2","3"],[2.5,1]]})"));
  ASSERT_TRUE(t.one_particle_spectrum);
  EXPECT_EQ(*t.one_particle_spectrum, FactorSpectrum({{0, 1}, {Rational(1, 2), 3}, {Rational(5, 2), 1}}));

  const auto fam = model_from_json(nlohmann::json::parse(R"({"kind":"TWO_LEVEL_FAMILY","N":4,"energy_poly":[[1,2,0]]})"));
  EXPECT_EQ(fam.energy_poly, (std::vector<EnergyPolyTerm>{{1, 2, 0}}));
}

TEST(ModelJson, RoundTrip) {
  const std::vector<ModelSpec> specs{pf_bcn(7, +1), hs_su11(9),
                                     toy(FactorSpectrum({{Rational(-1, 3), 2}, {4, 1}}), 3),
                                     two_level_family({{3, 1, 1}, {1, 0, 0}}, 6)};
  for (const auto& s : specs) {
    const auto back = model_from_json(nlohmann::json::parse(to_json(s).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(s).dump());
    EXPECT_EQ(build(back), build(s));
  }
  EXPECT_EQ(to_json(pf_bcn(3)).dump(), R"({"kind":"PF_BCN","N":3,"epsilon":-1})");
}

TEST(ModelJson, MalformedInputIsAModelError) {
  for (const char* text : {R"({"N":3})", R"({"kind":"PF_BCN"})", R"({"kind":"PF_BCN","N":"x"})",
                           R"({"kind":"TOY","N":2,"one_particle_spectrum":[[0]]})",
                           R"({"kind":"TOY","N":2,"one_particle_spectrum":[[0,0]]})",
                           R"({"kind":"TWO_LEVEL_FAMILY","N":2,"energy_poly":[[1,2]]})",
                           R"({"kind":"HS_SU11","N":1})"})
    EXPECT_THROW(model_from_json(nlohmann::json::parse(text)), ModelError) << text;
}

}  // namespace
}  // namespace specstat
