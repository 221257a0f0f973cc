#pragma once

// Reference spectra by direct enumeration of every choice of one level per
// factor. Deliberately shares no code with the convolution engine.

#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "specstat/errors.hpp"
#include "specstat/numeric.hpp"
#include "specstat/partition_poly.hpp"

namespace specstat {

struct OracleBudget {
  std::uint64_t max_states = std::uint64_t{1} << 22;
};

namespace detail {

// Counts tuples (prod_k levels_k) and refuses before any work is done.
inline std::uint64_t tuple_count(const FactorizedPartitionFunction& pf, const OracleBudget& budget) {
  std::uint64_t states = 1;
  for (const auto& f : pf.factors()) {
    if (states > budget.max_states / f.size())
      throw BudgetExceeded("enumeration needs more than " + std::to_string(budget.max_states) + " states");
    states *= f.size();
  }
  if (states > budget.max_states)
    throw BudgetExceeded("enumeration needs more than " + std::to_string(budget.max_states) + " states");
  return states;
}

}  // namespace detail

/// Mixed-radix walk over all level tuples. Energies are scaled to integers by
/// the common denominator; each tuple's energy and weight are kept as suffix
/// accumulators so that a step only recomputes the digits that changed.
inline LevelDensity enumerate_spectrum(const FactorizedPartitionFunction& pf, const OracleBudget& budget = {}) {
  detail::tuple_count(pf, budget);
  const std::size_t n = pf.factor_count();

  BigInt scale = den(pf.energy_shift());
  for (const auto& f : pf.factors())
    for (const auto& lv : f.levels()) scale = boost::multiprecision::lcm(scale, den(lv.energy));

  std::vector<std::vector<BigInt>> energy(n), weight(n);
  bool unit_weights = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& lv : pf.factors()[k].levels()) {
      energy[k].push_back(num(lv.energy * scale));
      weight[k].push_back(lv.degeneracy);
      unit_weights = unit_weights && lv.degeneracy == 1;
    }
  }

  // suffix_e[k] = sum_{i >= k} energy[i][digit[i]], likewise for weights.
  std::vector<std::size_t> digit(n, 0);
  std::vector<BigInt> suffix_e(n + 1, BigInt(0)), suffix_w(n + 1, BigInt(1));
  auto refresh = [&](std::size_t from) {
    for (std::size_t k = from + 1; k-- > 0;) {
      suffix_e[k] = suffix_e[k + 1] + energy[k][digit[k]];
      if (!unit_weights) suffix_w[k] = suffix_w[k + 1] * weight[k][digit[k]];
    }
  };
  refresh(n - 1);

  std::map<BigInt, BigInt> acc;
  while (true) {
    acc[suffix_e[0]] += suffix_w[0];
    std::size_t k = 0;
    while (k < n && ++digit[k] == energy[k].size()) digit[k++] = 0;
    if (k == n) break;
    refresh(k);
  }

  std::vector<Level> levels;
  levels.reserve(acc.size());
  for (auto& [e, w] : acc)
    levels.push_back({Rational(e, scale) + pf.energy_shift(), w * pf.global_multiplicity()});
  return LevelDensity(std::move(levels));
}

/// sigma^{-(2+delta)} sum_k <|E_k - mu_k|^{2+delta}> straight from the factor
/// spectra, in long double throughout.
inline double lyapunov_sum_direct(const FactorizedPartitionFunction& pf, double delta) {
  if (!(delta > 0)) throw InvalidArgument("delta must be positive");
  long double variance = 0.0L, abs_moments = 0.0L;
  for (const auto& f : pf.factors()) {
    BigInt total = 0;
    for (const auto& lv : f.levels()) total += lv.degeneracy;
    long double mean = 0.0L;
    for (const auto& lv : f.levels()) mean += ratio(lv.degeneracy, total) * to_long_double(lv.energy);
    long double var = 0.0L, abs_m = 0.0L;
    for (const auto& lv : f.levels()) {
      const long double w = ratio(lv.degeneracy, total);
      const long double x = std::fabs(to_long_double(lv.energy) - mean);
      var += w * x * x;
      abs_m += w * std::pow(x, 2.0L + delta);
    }
    variance += var;
    abs_moments += abs_m;
  }
  if (variance <= 0) throw ZeroVarianceError("Lyapunov sum needs sigma > 0");
  return static_cast<double>(abs_moments / std::pow(variance, 1.0L + delta / 2.0L));
}

}  // namespace specstat
