#pragma once

// The concrete factorized systems: the BC_N Polychronakos-Frahm chain, the
// su(1|1) Haldane-Shastry chain, N-particle toy models and generic families
// of two-level factors 1 + q^{E(k,N)} with polynomial E.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specstat/errors.hpp"
#include "specstat/numeric.hpp"
#include "specstat/partition_poly.hpp"

namespace specstat {

enum class ModelKind { kPfBcn, kHsSu11, kToy, kTwoLevelFamily };

/// coefficient * k^k_power * N^n_power
struct EnergyPolyTerm {
  BigInt coefficient;
  unsigned k_power = 0;
  unsigned n_power = 0;

  friend bool operator==(const EnergyPolyTerm&, const EnergyPolyTerm&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kPfBcn;
  int N = 1;
  int epsilon = -1;                                     ///< PF_BCN only
  std::optional<FactorSpectrum> one_particle_spectrum;  ///< TOY only
  std::vector<EnergyPolyTerm> energy_poly;              ///< TWO_LEVEL_FAMILY only
};

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPfBcn: return "PF_BCN";
    case ModelKind::kHsSu11: return "HS_SU11";
    case ModelKind::kToy: return "TOY";
    case ModelKind::kTwoLevelFamily: return "TWO_LEVEL_FAMILY";
  }
  return "?";
}

/// Accepts the canonical names and dash/lower-case spellings ("pf-bcn").
inline ModelKind parse_model_kind(std::string_view text) {
  std::string s;
  for (char c : text) s += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "PF_BCN") return ModelKind::kPfBcn;
  if (s == "HS_SU11") return ModelKind::kHsSu11;
  if (s == "TOY") return ModelKind::kToy;
  if (s == "TWO_LEVEL_FAMILY") return ModelKind::kTwoLevelFamily;
  throw ModelError("unknown model kind '" + std::string(text) + "'");
}

inline BigInt evaluate_energy_poly(std::span<const EnergyPolyTerm> poly, long k, long n) {
  BigInt e = 0;
  for (const auto& t : poly)
    e += t.coefficient * boost::multiprecision::pow(BigInt(k), t.k_power) *
         boost::multiprecision::pow(BigInt(n), t.n_power);
  return e;
}

inline void validate(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::kPfBcn:
      if (spec.N < 1) throw ModelError("PF_BCN needs N >= 1");
      if (spec.epsilon != 1 && spec.epsilon != -1) throw ModelError("epsilon must be +1 or -1");
      break;
    case ModelKind::kHsSu11:
      if (spec.N < 2) throw ModelError("HS_SU11 needs N >= 2");
      break;
    case ModelKind::kToy:
      if (spec.N < 1) throw ModelError("TOY needs N >= 1");
      if (!spec.one_particle_spectrum) throw ModelError("TOY needs a one-particle spectrum");
      break;
    case ModelKind::kTwoLevelFamily:
      if (spec.N < 1) throw ModelError("TWO_LEVEL_FAMILY needs N >= 1");
      if (spec.energy_poly.empty()) throw ModelError("TWO_LEVEL_FAMILY needs an energy polynomial");
      for (long k = 1; k <= spec.N; ++k)
        if (evaluate_energy_poly(spec.energy_poly, k, spec.N) <= 0)
          throw ModelError("E(k, N) must be positive, fails at k = " + std::to_string(k));
      break;
  }
}

inline FactorizedPartitionFunction build(const ModelSpec& spec) {
  validate(spec);
  const long n = spec.N;
  std::vector<FactorSpectrum> factors;
  switch (spec.kind) {
    case ModelKind::kPfBcn: {
      for (long k = 1; k <= n; ++k) factors.push_back(FactorSpectrum::two_level(Rational(k)));
      Rational shift = spec.epsilon == 1 ? Rational(n * (n - 1), 2) : Rational(0);
      return FactorizedPartitionFunction(std::move(factors), shift);
    }
    case ModelKind::kHsSu11:
      for (long k = 1; k < n; ++k) factors.push_back(FactorSpectrum::two_level(Rational(k * (n - k))));
      return FactorizedPartitionFunction(std::move(factors), 0, 2);
    case ModelKind::kToy:
      factors.assign(static_cast<std::size_t>(n), *spec.one_particle_spectrum);
      return FactorizedPartitionFunction(std::move(factors));
    case ModelKind::kTwoLevelFamily:
      for (long k = 1; k <= n; ++k)
        factors.push_back(FactorSpectrum::two_level(Rational(evaluate_energy_poly(spec.energy_poly, k, n))));
      return FactorizedPartitionFunction(std::move(factors));
  }
  throw ModelError("unhandled model kind");
}

inline ModelSpec pf_bcn(int n, int epsilon = -1) { return {ModelKind::kPfBcn, n, epsilon, {}, {}}; }
inline ModelSpec hs_su11(int n) { return {ModelKind::kHsSu11, n, -1, {}, {}}; }
inline ModelSpec toy(FactorSpectrum one_particle, int n) {
  return {ModelKind::kToy, n, -1, std::move(one_particle), {}};
}
inline ModelSpec two_level_family(std::vector<EnergyPolyTerm> poly, int n) {
  return {ModelKind::kTwoLevelFamily, n, -1, {}, std::move(poly)};
}

/// One eigenvalue E_1 + ... + E_N of the toy Hamiltonian, choosing level
/// `choices[k]` of the one-particle spectrum for particle k.
inline Rational eigenvalue_sum_sample(const ModelSpec& spec, std::span<const std::size_t> choices) {
  if (spec.kind != ModelKind::kToy || !spec.one_particle_spectrum)
    throw ModelError("eigenvalue_sum_sample needs a TOY model");
  if (choices.size() != static_cast<std::size_t>(spec.N))
    throw InvalidArgument("expected one level choice per particle");
  const auto levels = spec.one_particle_spectrum->levels();
  Rational e = 0;
  for (std::size_t c : choices) {
    if (c >= levels.size()) throw InvalidArgument("level index " + std::to_string(c) + " out of range");
    e += levels[c].energy;
  }
  return e;
}

// ---------------------------------------------------------------------------
// JSON: {"kind", "N", "epsilon"?, "one_particle_spectrum"?, "energy_poly"?}

namespace detail {

inline Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_float()) return parse_rational(j.dump());
  throw ModelError("expected a number or rational string, got " + j.dump());
}

inline BigInt integer_from_json(const nlohmann::json& j) {
  if (j.is_string()) return BigInt(j.get<std::string>());
  if (j.is_number_integer()) return BigInt(j.get<long long>());
  throw ModelError("expected an integer, got " + j.dump());
}

}  // namespace detail

inline ModelSpec model_from_json(const nlohmann::json& j) {
  try {
    ModelSpec spec;
    spec.kind = parse_model_kind(j.at("kind").get<std::string>());
    spec.N = j.at("N").get<int>();
    if (j.contains("epsilon")) spec.epsilon = j.at("epsilon").get<int>();
    if (j.contains("one_particle_spectrum")) {
      std::vector<Level> levels;
      for (const auto& row : j.at("one_particle_spectrum")) {
        if (!row.is_array() || row.size() != 2) throw ModelError("spectrum rows are [energy, degeneracy]");
        levels.push_back({detail::rational_from_json(row[0]), detail::integer_from_json(row[1])});
      }
      spec.one_particle_spectrum = FactorSpectrum(std::move(levels));
    }
    if (j.contains("energy_poly")) {
      for (const auto& row : j.at("energy_poly")) {
        if (!row.is_array() || row.size() != 3) throw ModelError("energy_poly rows are [coef, k_power, N_power]");
        spec.energy_poly.push_back({detail::integer_from_json(row[0]), row[1].get<unsigned>(), row[2].get<unsigned>()});
      }
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ModelError(e.what());
  }
}

inline nlohmann::ordered_json to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["N"] = spec.N;
  if (spec.kind == ModelKind::kPfBcn) j["epsilon"] = spec.epsilon;
  if (spec.one_particle_spectrum) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& lv : spec.one_particle_spectrum->levels())
      rows.push_back({to_string(lv.energy), to_string(lv.degeneracy)});
    j["one_particle_spectrum"] = std::move(rows);
  }
  if (!spec.energy_poly.empty()) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& t : spec.energy_poly) rows.push_back({to_string(t.coefficient), t.k_power, t.n_power});
    j["energy_poly"] = std::move(rows);
  }
  return j;
}

}  // namespace specstat
