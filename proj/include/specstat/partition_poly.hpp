#pragma once

// Factorized partition functions Z(q) = m * q^shift * prod_k Z_k(q) and their
// exact expansion into level densities with big-integer degeneracies.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "specstat/errors.hpp"
#include "specstat/numeric.hpp"

namespace specstat {

struct Level {
  Rational energy;
  BigInt degeneracy;

  friend bool operator==(const Level&, const Level&) = default;
};

/// Exact spectrum of one factor Z_k(q) = sum_j d_j q^{E_j}.
///
/// Levels are kept sorted by energy with duplicates merged, so two spectra
/// compare equal iff they describe the same polynomial.
class FactorSpectrum {
 public:
  explicit FactorSpectrum(std::vector<Level> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw InvalidArgument("factor spectrum needs at least one level");
    std::sort(levels_.begin(), levels_.end(),
              [](const Level& a, const Level& b) { return a.energy < b.energy; });
    std::vector<Level> merged;
    merged.reserve(levels_.size());
    for (auto& lv : levels_) {
      if (lv.degeneracy < 1) throw InvalidArgument("level degeneracy must be >= 1");
      if (!merged.empty() && merged.back().energy == lv.energy)
        merged.back().degeneracy += lv.degeneracy;
      else
        merged.push_back(std::move(lv));
    }
    levels_ = std::move(merged);
  }

  /// The two-level factor 1 + q^E.
  static FactorSpectrum two_level(const Rational& energy) {
    if (energy <= 0) throw InvalidArgument("two-level excitation energy must be positive");
    return FactorSpectrum({{Rational(0), BigInt(1)}, {energy, BigInt(1)}});
  }

  std::span<const Level> levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  const Rational& min_energy() const { return levels_.front().energy; }
  const Rational& max_energy() const { return levels_.back().energy; }

  /// Z_k(1).
  BigInt dimension() const {
    BigInt d = 0;
    for (const auto& lv : levels_) d += lv.degeneracy;
    return d;
  }

  bool is_two_level() const {
    return levels_.size() == 2 && levels_[0].degeneracy == levels_[1].degeneracy;
  }

  friend bool operator==(const FactorSpectrum&, const FactorSpectrum&) = default;

 private:
  std::vector<Level> levels_;
};

class FactorizedPartitionFunction {
 public:
  explicit FactorizedPartitionFunction(std::vector<FactorSpectrum> factors,
                                       Rational energy_shift = 0,
                                       BigInt global_multiplicity = 1)
      : factors_(std::move(factors)),
        energy_shift_(std::move(energy_shift)),
        global_multiplicity_(std::move(global_multiplicity)) {
    if (factors_.empty()) throw InvalidArgument("partition function needs at least one factor");
    if (global_multiplicity_ < 1) throw InvalidArgument("global multiplicity must be >= 1");
  }

  std::span<const FactorSpectrum> factors() const { return factors_; }
  std::size_t factor_count() const { return factors_.size(); }
  const Rational& energy_shift() const { return energy_shift_; }
  const BigInt& global_multiplicity() const { return global_multiplicity_; }

  bool all_two_level() const {
    return std::all_of(factors_.begin(), factors_.end(),
                       [](const FactorSpectrum& f) { return f.is_two_level(); });
  }

  friend bool operator==(const FactorizedPartitionFunction&,
                         const FactorizedPartitionFunction&) = default;

 private:
  std::vector<FactorSpectrum> factors_;
  Rational energy_shift_;
  BigInt global_multiplicity_;
};

/// Fully expanded spectrum: distinct energies in ascending order with their
/// degeneracies. Behaves as an ordered map energy -> degeneracy.
class LevelDensity {
 public:
  LevelDensity() = default;

  /// Sorts, merges duplicate energies and drops nothing; every degeneracy must be >= 1.
  explicit LevelDensity(std::vector<Level> levels) : levels_(std::move(levels)) {
    std::sort(levels_.begin(), levels_.end(),
              [](const Level& a, const Level& b) { return a.energy < b.energy; });
    std::vector<Level> merged;
    merged.reserve(levels_.size());
    for (auto& lv : levels_) {
      if (lv.degeneracy < 1) throw InvalidArgument("level degeneracy must be >= 1");
      if (!merged.empty() && merged.back().energy == lv.energy)
        merged.back().degeneracy += lv.degeneracy;
      else
        merged.push_back(std::move(lv));
    }
    levels_ = std::move(merged);
    for (const auto& lv : levels_) dimension_ += lv.degeneracy;
  }

  std::span<const Level> levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }
  bool empty() const { return levels_.empty(); }
  const BigInt& dimension() const { return dimension_; }

  /// Degeneracy at an energy, zero when the energy is not in the spectrum.
  BigInt degeneracy_at(const Rational& energy) const {
    auto it = std::lower_bound(levels_.begin(), levels_.end(), energy,
                               [](const Level& lv, const Rational& e) { return lv.energy < e; });
    if (it == levels_.end() || it->energy != energy) return 0;
    return it->degeneracy;
  }

  LevelDensity translated(const Rational& delta) const {
    LevelDensity out = *this;
    for (auto& lv : out.levels_) lv.energy += delta;
    return out;
  }

  friend bool operator==(const LevelDensity&, const LevelDensity&) = default;

 private:
  std::vector<Level> levels_;
  BigInt dimension_ = 0;

  friend class DensityBuilder;
};

/// Appends levels that are already strictly ascending, skipping the sort/merge pass.
class DensityBuilder {
 public:
  void reserve(std::size_t n) { levels_.reserve(n); }
  void push(Rational energy, BigInt degeneracy) {
    dimension_ += degeneracy;
    levels_.push_back({std::move(energy), std::move(degeneracy)});
  }
  LevelDensity finish() && {
    LevelDensity d;
    d.levels_ = std::move(levels_);
    d.dimension_ = std::move(dimension_);
    return d;
  }

 private:
  std::vector<Level> levels_;
  BigInt dimension_ = 0;
};

enum class ExpandStrategy {
  kDenseAbsorption,  ///< absorb factors one by one into a flat limb array
  kBalancedTree,     ///< pairwise polynomial products over a balanced tree
};

struct ExpandOptions {
  ExpandStrategy strategy = ExpandStrategy::kDenseAbsorption;
  std::uint64_t support_cap = 100'000'000;  ///< max lattice points in the expanded support
};

inline BigInt dimension(const FactorizedPartitionFunction& pf) {
  BigInt d = pf.global_multiplicity();
  for (const auto& f : pf.factors()) d *= f.dimension();
  return d;
}

inline FactorizedPartitionFunction shift_ground_state(const FactorizedPartitionFunction& pf,
                                                      const Rational& delta) {
  std::vector<FactorSpectrum> factors(pf.factors().begin(), pf.factors().end());
  return FactorizedPartitionFunction(std::move(factors), pf.energy_shift() + delta,
                                     pf.global_multiplicity());
}

namespace detail {

// All energies mapped onto a common integer lattice:
//   E = origin + step * n,  n = sum_k offset_{k, j_k}.
struct Lattice {
  Rational origin;
  Rational step;
  std::vector<std::vector<std::uint64_t>> offsets;  // per factor, ascending, first is 0
  std::uint64_t support = 0;                        // number of lattice points
};

inline Lattice make_lattice(const FactorizedPartitionFunction& pf, std::uint64_t support_cap) {
  BigInt common_den = den(pf.energy_shift());
  for (const auto& f : pf.factors())
    for (const auto& lv : f.levels()) common_den = boost::multiprecision::lcm(common_den, den(lv.energy));

  std::vector<std::vector<BigInt>> scaled;
  scaled.reserve(pf.factor_count());
  BigInt g = 0;
  Rational origin = pf.energy_shift();
  for (const auto& f : pf.factors()) {
    origin += f.min_energy();
    std::vector<BigInt> row;
    row.reserve(f.size());
    for (const auto& lv : f.levels()) {
      Rational rel = (lv.energy - f.min_energy()) * common_den;
      row.push_back(num(rel));
      g = boost::multiprecision::gcd(g, row.back());
    }
    scaled.push_back(std::move(row));
  }
  if (g == 0) g = 1;

  BigInt support = 1;
  for (auto& row : scaled) {
    for (auto& v : row) v /= g;
    support += row.back();
  }
  if (support > support_cap)
    throw BudgetExceeded("expanded support of " + support.str() + " lattice points exceeds cap " +
                         std::to_string(support_cap));

  Lattice lat;
  lat.origin = std::move(origin);
  lat.step = Rational(g, common_den);
  lat.support = support.convert_to<std::uint64_t>();
  lat.offsets.reserve(scaled.size());
  for (const auto& row : scaled) {
    std::vector<std::uint64_t> r;
    r.reserve(row.size());
    for (const auto& v : row) r.push_back(v.convert_to<std::uint64_t>());
    lat.offsets.push_back(std::move(r));
  }
  return lat;
}

inline std::vector<std::uint64_t> to_limbs(const BigInt& z) {
  const mpz_srcptr p = z.backend().data();
  std::vector<std::uint64_t> limbs((mpz_sizeinbase(p, 2) + 63) / 64);
  std::size_t count = 0;
  mpz_export(limbs.data(), &count, -1, sizeof(std::uint64_t), 0, 0, p);
  limbs.resize(count);
  return limbs;
}

inline BigInt from_limbs(std::span<const std::uint64_t> limbs) {
  BigInt z;
  mpz_import(z.backend().data(), limbs.size(), -1, sizeof(std::uint64_t), 0, 0, limbs.data());
  return z;
}

// Dense polynomial whose coefficients are fixed-width little-endian limb
// vectors. The width is chosen from an a-priori bound on every coefficient
// (the final dimension), so no carry ever leaves a row.
class LimbPolynomial {
 public:
  LimbPolynomial(std::size_t support, std::size_t width)
      : width_(width), limbs_(support * width, 0) {
    limbs_[0] = 1;
  }

  std::size_t width() const { return width_; }
  std::size_t support() const { return limbs_.size() / width_; }

  std::span<const std::uint64_t> row(std::size_t i) const {
    return {limbs_.data() + i * width_, width_};
  }

  // this *= (1 + q^offset), in place.
  void absorb_two_level(std::uint64_t offset) {
    const std::size_t new_top = top_ + offset;
    for (std::size_t i = new_top + 1; i-- > offset;) add_row(i, i - offset);
    top_ = new_top;
  }

  // this *= sum_j d_j q^{o_j}, with o_0 = 0.
  void absorb(std::span<const std::uint64_t> offsets,
              const std::vector<std::vector<std::uint64_t>>& multipliers) {
    const std::size_t new_top = top_ + offsets.back();
    std::vector<std::uint64_t> acc(width_);
    for (std::size_t i = new_top + 1; i-- > 0;) {
      std::fill(acc.begin(), acc.end(), 0);
      for (std::size_t j = 0; j < offsets.size(); ++j) {
        if (offsets[j] > i || i - offsets[j] > top_) continue;
        mul_add(acc, row(i - offsets[j]), multipliers[j]);
      }
      std::copy(acc.begin(), acc.end(), limbs_.begin() + static_cast<std::ptrdiff_t>(i * width_));
    }
    top_ = new_top;
  }

  void scale(const std::vector<std::uint64_t>& multiplier) {
    std::vector<std::uint64_t> acc(width_);
    for (std::size_t i = 0; i <= top_; ++i) {
      std::fill(acc.begin(), acc.end(), 0);
      mul_add(acc, row(i), multiplier);
      std::copy(acc.begin(), acc.end(), limbs_.begin() + static_cast<std::ptrdiff_t>(i * width_));
    }
  }

 private:
  void add_row(std::size_t dst, std::size_t src) {
    std::uint64_t* d = limbs_.data() + dst * width_;
    const std::uint64_t* s = limbs_.data() + src * width_;
    unsigned char carry = 0;
    for (std::size_t w = 0; w < width_; ++w) {
      unsigned __int128 sum = static_cast<unsigned __int128>(d[w]) + s[w] + carry;
      d[w] = static_cast<std::uint64_t>(sum);
      carry = static_cast<unsigned char>(sum >> 64);
    }
  }

  // acc += a * b, truncated to acc.size() limbs.
  static void mul_add(std::vector<std::uint64_t>& acc, std::span<const std::uint64_t> a,
                      const std::vector<std::uint64_t>& b) {
    const std::size_t n = acc.size();
    for (std::size_t j = 0; j < b.size() && j < n; ++j) {
      if (b[j] == 0) continue;
      std::uint64_t carry = 0;
      for (std::size_t i = 0; i + j < n; ++i) {
        unsigned __int128 t = static_cast<unsigned __int128>(a[i]) * b[j] + acc[i + j] + carry;
        acc[i + j] = static_cast<std::uint64_t>(t);
        carry = static_cast<std::uint64_t>(t >> 64);
      }
    }
  }

  std::size_t width_;
  std::vector<std::uint64_t> limbs_;
  std::size_t top_ = 0;
};

inline std::vector<BigInt> multiply(const std::vector<BigInt>& a, const std::vector<BigInt>& b) {
  std::vector<BigInt> out(a.size() + b.size() - 1, BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (b[j] != 0) out[i + j] += a[i] * b[j];
  }
  return out;
}

inline std::vector<BigInt> dense_factor(const FactorSpectrum& f, std::span<const std::uint64_t> offsets) {
  std::vector<BigInt> poly(offsets.back() + 1, BigInt(0));
  for (std::size_t j = 0; j < offsets.size(); ++j) poly[offsets[j]] = f.levels()[j].degeneracy;
  return poly;
}

inline LevelDensity expand_dense(const FactorizedPartitionFunction& pf, const Lattice& lat) {
  const BigInt bound = dimension(pf);
  const std::size_t width = mpz_sizeinbase(bound.backend().data(), 2) / 64 + 1;
  LimbPolynomial poly(lat.support, width);
  for (std::size_t k = 0; k < pf.factor_count(); ++k) {
    const FactorSpectrum& f = pf.factors()[k];
    const auto& offsets = lat.offsets[k];
    if (offsets.size() == 1 && f.levels()[0].degeneracy == 1) continue;
    if (offsets.size() == 2 && f.levels()[0].degeneracy == 1 && f.levels()[1].degeneracy == 1) {
      poly.absorb_two_level(offsets[1]);
      continue;
    }
    std::vector<std::vector<std::uint64_t>> mult;
    mult.reserve(f.size());
    for (const auto& lv : f.levels()) mult.push_back(to_limbs(lv.degeneracy));
    poly.absorb(offsets, mult);
  }
  if (pf.global_multiplicity() != 1) poly.scale(to_limbs(pf.global_multiplicity()));

  DensityBuilder out;
  for (std::size_t i = 0; i < lat.support; ++i) {
    auto r = poly.row(i);
    if (std::all_of(r.begin(), r.end(), [](std::uint64_t w) { return w == 0; })) continue;
    out.push(lat.origin + lat.step * i, from_limbs(r));
  }
  return std::move(out).finish();
}

inline LevelDensity expand_tree(const FactorizedPartitionFunction& pf, const Lattice& lat) {
  std::vector<std::vector<BigInt>> layer;
  layer.reserve(pf.factor_count());
  for (std::size_t k = 0; k < pf.factor_count(); ++k)
    layer.push_back(dense_factor(pf.factors()[k], lat.offsets[k]));
  while (layer.size() > 1) {
    std::vector<std::vector<BigInt>> next;
    next.reserve((layer.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) next.push_back(multiply(layer[i], layer[i + 1]));
    if (layer.size() % 2 == 1) next.push_back(std::move(layer.back()));
    layer = std::move(next);
  }
  DensityBuilder out;
  const auto& coeffs = layer.front();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    out.push(lat.origin + lat.step * i, coeffs[i] * pf.global_multiplicity());
  }
  return std::move(out).finish();
}

}  // namespace detail

/// Exact coefficient list of m * q^shift * prod_k Z_k(q).
inline LevelDensity expand(const FactorizedPartitionFunction& pf, const ExpandOptions& options = {}) {
  const detail::Lattice lat = detail::make_lattice(pf, options.support_cap);
  switch (options.strategy) {
    case ExpandStrategy::kBalancedTree:
      return detail::expand_tree(pf, lat);
    case ExpandStrategy::kDenseAbsorption:
    default:
      return detail::expand_dense(pf, lat);
  }
}

/// log Z(q) as (log|Z|, arg Z); `zero` is set when Z(q) vanishes exactly.
struct LogValue {
  double log_abs = 0.0;
  double arg = 0.0;
  bool zero = false;

  std::complex<double> value() const {
    if (zero) return {0.0, 0.0};
    if (log_abs > std::log(std::numeric_limits<double>::max()))
      throw OverflowError("|Z(q)| = exp(" + format_double(log_abs) + ") overflows double");
    return std::polar(std::exp(log_abs), arg);
  }
};

namespace detail {

// log(sum_j d_j q^{E_j}) for one factor, scaled by the dominant term.
inline LogValue log_factor(const FactorSpectrum& f, std::complex<double> log_q) {
  std::vector<std::complex<double>> terms;
  terms.reserve(f.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& lv : f.levels()) {
    std::complex<double> t = static_cast<double>(log_abs(lv.degeneracy)) + to_double(lv.energy) * log_q;
    peak = std::max(peak, t.real());
    terms.push_back(t);
  }
  std::complex<double> sum = 0.0;
  for (const auto& t : terms) sum += std::exp(t - peak);
  if (sum == 0.0) return {0.0, 0.0, true};
  return {peak + std::log(std::abs(sum)), std::arg(sum), false};
}

// q == 0: only zero-energy levels survive.
inline LogValue log_at_zero(const FactorizedPartitionFunction& pf) {
  auto check = [](const Rational& e) {
    if (e < 0) throw PoleError("Z(q) is singular at q = 0 with negative energies");
  };
  check(pf.energy_shift());
  LogValue out{static_cast<double>(log_abs(pf.global_multiplicity())), 0.0, pf.energy_shift() > 0};
  for (const auto& f : pf.factors()) {
    check(f.min_energy());
    if (f.min_energy() > 0) out.zero = true;
    else out.log_abs += static_cast<double>(log_abs(f.levels().front().degeneracy));
  }
  return out;
}

}  // namespace detail

/// Z(q) accumulated factor by factor in log-magnitude/phase form.
inline LogValue evaluate_log(const FactorizedPartitionFunction& pf, std::complex<double> q) {
  if (q == 0.0) return detail::log_at_zero(pf);
  if (q == 1.0) return {static_cast<double>(log_abs(dimension(pf))), 0.0, false};
  const std::complex<double> log_q = std::log(q);
  LogValue acc{static_cast<double>(log_abs(pf.global_multiplicity())), 0.0, false};
  const std::complex<double> shift = to_double(pf.energy_shift()) * log_q;
  acc.log_abs += shift.real();
  acc.arg += shift.imag();
  for (const auto& f : pf.factors()) {
    LogValue v = detail::log_factor(f, log_q);
    if (v.zero) return v;
    acc.log_abs += v.log_abs;
    acc.arg += v.arg;
  }
  acc.arg = std::remainder(acc.arg, 2.0 * std::numbers::pi);
  return acc;
}

/// Z(q). At q = 1 this is the exact dimension rounded once to double.
inline std::complex<double> evaluate(const FactorizedPartitionFunction& pf, std::complex<double> q) {
  if (q == 1.0) {
    const double d = to_double(dimension(pf));
    if (std::isinf(d)) throw OverflowError("Z(1) = dimension overflows double");
    return d;
  }
  return evaluate_log(pf, q).value();
}

// ---------------------------------------------------------------------------
// Serialization: JSON {"dimension": "...", "levels": [{"energy", "degeneracy"}]}
// and CSV "energy,degeneracy", both ascending in energy.

inline nlohmann::ordered_json to_json(const LevelDensity& d) {
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const auto& lv : d.levels())
    levels.push_back({{"energy", to_string(lv.energy)}, {"degeneracy", to_string(lv.degeneracy)}});
  return {{"dimension", to_string(d.dimension())}, {"levels", std::move(levels)}};
}

inline LevelDensity density_from_json(const nlohmann::json& j) {
  std::vector<Level> levels;
  for (const auto& row : j.at("levels"))
    levels.push_back({parse_rational(row.at("energy").get<std::string>()),
                      BigInt(row.at("degeneracy").get<std::string>())});
  LevelDensity d(std::move(levels));
  if (j.contains("dimension") && BigInt(j.at("dimension").get<std::string>()) != d.dimension())
    throw InvalidArgument("density dimension field disagrees with the level sum");
  return d;
}

inline void write_csv(std::ostream& os, const LevelDensity& d) {
  os << "energy,degeneracy\n";
  for (const auto& lv : d.levels()) os << to_string(lv.energy) << ',' << to_string(lv.degeneracy) << '\n';
}

}  // namespace specstat
