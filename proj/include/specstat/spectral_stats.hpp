#pragma once

// Moments, thermodynamic energy and characteristic functions of factorized
// spectra. Exact quantities (mean, variance, third and fourth cumulants) are
// carried as rationals; everything living on the unit circle is double.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specstat/errors.hpp"
#include "specstat/numeric.hpp"
#include "specstat/partition_poly.hpp"

namespace specstat {

struct SpectralMoments {
  Rational mu;
  Rational sigma2;
  double skewness = std::numeric_limits<double>::quiet_NaN();  ///< NaN when undefined or not requested
  double excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
};

/// Exact mean and the second to fourth cumulants of a spectrum.
struct Cumulants {
  Rational mean;
  Rational k2;
  Rational k3;
  Rational k4;
};

namespace detail {

inline double skewness_of(const Rational& k3, const Rational& k2) {
  if (k2 == 0) return std::numeric_limits<double>::quiet_NaN();
  if (k3 == 0) return 0.0;
  // Square first so the only inexact step is the final root.
  Rational sq = k3 * k3 / (k2 * k2 * k2);
  double v = std::sqrt(static_cast<double>(to_long_double(sq)));
  return k3 < 0 ? -v : v;
}

inline double excess_kurtosis_of(const Rational& k4, const Rational& k2) {
  if (k2 == 0) return std::numeric_limits<double>::quiet_NaN();
  return to_double(k4 / (k2 * k2));
}

inline SpectralMoments moments_from(const Cumulants& c) {
  return {c.mean, c.k2, skewness_of(c.k3, c.k2), excess_kurtosis_of(c.k4, c.k2)};
}

}  // namespace detail

inline Cumulants factor_cumulants(const FactorSpectrum& f) {
  const BigInt total = f.dimension();
  Rational mean = 0;
  for (const auto& lv : f.levels()) mean += lv.energy * lv.degeneracy;
  mean /= total;
  Rational c2 = 0, c3 = 0, c4 = 0;
  for (const auto& lv : f.levels()) {
    Rational x = lv.energy - mean;
    Rational x2 = x * x;
    c2 += x2 * lv.degeneracy;
    c3 += x2 * x * lv.degeneracy;
    c4 += x2 * x2 * lv.degeneracy;
  }
  c2 /= total;
  c3 /= total;
  c4 /= total;
  return {mean, c2, c3, c4 - 3 * c2 * c2};
}

/// Cumulants add over independent factors; the shift moves the mean only.
inline Cumulants system_cumulants(const FactorizedPartitionFunction& pf) {
  Cumulants sum{pf.energy_shift(), 0, 0, 0};
  for (const auto& f : pf.factors()) {
    Cumulants c = factor_cumulants(f);
    sum.mean += c.mean;
    sum.k2 += c.k2;
    sum.k3 += c.k3;
    sum.k4 += c.k4;
  }
  return sum;
}

inline SpectralMoments factor_moments(const FactorSpectrum& f) {
  return detail::moments_from(factor_cumulants(f));
}

inline SpectralMoments system_moments(const FactorizedPartitionFunction& pf) {
  return detail::moments_from(system_cumulants(pf));
}

/// Moments of an expanded density from exact power sums. `order` (2, 3 or 4)
/// selects how many of skewness / excess kurtosis are filled in.
inline SpectralMoments density_moments(const LevelDensity& d, int order = 4) {
  if (order < 2 || order > 4) throw InvalidArgument("density_moments order must be 2, 3 or 4");
  if (d.empty()) throw InvalidArgument("density_moments of an empty density");

  BigInt scale = 1;
  for (const auto& lv : d.levels()) scale = boost::multiprecision::lcm(scale, den(lv.energy));
  const Rational base = d.levels().front().energy;

  // Integer power sums of e = (E - base) * scale.
  BigInt s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (const auto& lv : d.levels()) {
    const BigInt e = num((lv.energy - base) * scale);
    if (e == 0) continue;
    BigInt term = lv.degeneracy * e;
    s1 += term;
    term *= e;
    s2 += term;
    if (order >= 3) {
      term *= e;
      s3 += term;
    }
    if (order >= 4) {
      term *= e;
      s4 += term;
    }
  }
  const BigInt& total = d.dimension();
  const Rational m(s1, total);
  const Rational p2(s2, total), p3(s3, total), p4(s4, total);
  const Rational c2 = p2 - m * m;
  const Rational c3 = p3 - 3 * m * p2 + 2 * m * m * m;
  const Rational c4 = p4 - 4 * m * p3 + 6 * m * m * p2 - 3 * m * m * m * m;

  const Rational sc(scale);
  SpectralMoments out;
  out.mu = base + m / sc;
  out.sigma2 = c2 / (sc * sc);
  if (order >= 3) out.skewness = detail::skewness_of(c3, c2);
  if (order >= 4) out.excess_kurtosis = detail::excess_kurtosis_of(c4 - 3 * c2 * c2, c2);
  return out;
}

namespace detail {

// Floating-point view of one factor: weights d_j / Z_k(1), raw energies and
// standardized energies z_j = (E_j - mu_k) / sigma_k.
struct FactorNumerics {
  std::vector<double> weight;
  std::vector<double> energy;
  std::vector<double> z;
  double sigma = 0.0;
};

inline FactorNumerics numerics(const FactorSpectrum& f) {
  FactorNumerics n;
  const BigInt total = f.dimension();
  const Cumulants c = factor_cumulants(f);
  n.sigma = std::sqrt(to_double(c.k2));
  for (const auto& lv : f.levels()) {
    n.weight.push_back(static_cast<double>(ratio(lv.degeneracy, total)));
    n.energy.push_back(to_double(lv.energy));
    n.z.push_back(n.sigma > 0 ? to_double(lv.energy - c.mean) / n.sigma : 0.0);
  }
  return n;
}

inline std::vector<FactorNumerics> numerics(const FactorizedPartitionFunction& pf) {
  std::vector<FactorNumerics> out;
  out.reserve(pf.factor_count());
  for (const auto& f : pf.factors()) out.push_back(numerics(f));
  return out;
}

// phi-bar_k(tau) = sum_j w_j exp(i tau z_j).
inline std::complex<double> normalized_factor_cf(const FactorNumerics& n, double tau) {
  std::complex<double> s = 0.0;
  for (std::size_t j = 0; j < n.z.size(); ++j) s += n.weight[j] * std::polar(1.0, tau * n.z[j]);
  return s;
}

constexpr double kZeroTolerance = 1e-12;

// |third cumulant| of z under the complex weight exp(i s z), i.e.
// |d^3/ds^3 log phi-bar_k(s)|.
inline double third_cumulant_abs(const FactorNumerics& n, double s) {
  std::complex<double> m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (std::size_t j = 0; j < n.z.size(); ++j) {
    const double z = n.z[j];
    const std::complex<double> w = n.weight[j] * std::polar(1.0, s * z);
    m0 += w;
    m1 += w * z;
    m2 += w * z * z;
    m3 += w * z * z * z;
  }
  if (std::abs(m0) < kZeroTolerance)
    throw PoleError("factor partition function vanishes at s = " + format_double(s));
  m1 /= m0;
  m2 /= m0;
  m3 /= m0;
  return std::abs(m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1);
}

// Walks an ascending grid checking that phi-bar_k stays away from zero and
// turns by less than pi/2 between neighbours.
inline void check_no_zero_crossing(const FactorNumerics& n, std::span<const double> grid) {
  std::complex<double> prev = normalized_factor_cf(n, grid.front());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::complex<double> v = normalized_factor_cf(n, grid[i]);
    if (std::abs(v) < kZeroTolerance)
      throw PoleError("factor characteristic function vanishes at s = " + format_double(grid[i]));
    if (std::abs(std::arg(v / prev)) >= std::numbers::pi / 2)
      throw PoleError("factor characteristic function crosses zero near s = " + format_double(grid[i]));
    prev = v;
  }
}

inline double sup_third_log_deriv(const FactorNumerics& n, double tau, int grid_points) {
  if (n.sigma <= 0) throw ZeroVarianceError("M_k(tau) needs a factor with positive variance");
  if (!(tau >= 0)) throw InvalidArgument("tau must be non-negative");
  if (grid_points < 2) throw InvalidArgument("grid_points must be >= 2");
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i)
    grid[static_cast<std::size_t>(i)] = -tau + 2.0 * tau * i / (grid_points - 1);
  check_no_zero_crossing(n, grid);
  double sup = 0.0;
  for (double s : grid) sup = std::max(sup, third_cumulant_abs(n, s));
  return sup;
}

}  // namespace detail

/// E(q) = q d/dq log Z(q), at q = 0 its ground-state limit.
inline std::complex<double> thermodynamic_energy(const FactorizedPartitionFunction& pf,
                                                 std::complex<double> q) {
  std::complex<double> total = to_double(pf.energy_shift());
  if (q == 0.0) {
    for (const auto& f : pf.factors()) total += to_double(f.min_energy());
    return total;
  }
  const std::complex<double> log_q = std::log(q);
  for (std::size_t k = 0; k < pf.factor_count(); ++k) {
    const FactorSpectrum& f = pf.factors()[k];
    std::vector<std::complex<double>> t;
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& lv : f.levels()) {
      t.push_back(static_cast<double>(log_abs(lv.degeneracy)) + to_double(lv.energy) * log_q);
      peak = std::max(peak, t.back().real());
    }
    std::complex<double> z = 0.0, ez = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const std::complex<double> w = std::exp(t[j] - peak);
      z += w;
      ez += to_double(f.levels()[j].energy) * w;
      scale += std::abs(w);
    }
    if (std::abs(z) <= detail::kZeroTolerance * scale)
      throw PoleError("Z_" + std::to_string(k + 1) + "(q) vanishes at the evaluation point");
    total += ez / z;
  }
  return total;
}

/// phi(t) = Z(e^{it}) / Z(1), as a product of per-factor normalized sums.
inline std::complex<double> char_fun(const FactorizedPartitionFunction& pf, double t) {
  std::complex<double> v = std::polar(1.0, t * to_double(pf.energy_shift()));
  for (const auto& f : pf.factors()) {
    const BigInt total = f.dimension();
    std::complex<double> s = 0.0;
    for (const auto& lv : f.levels())
      s += static_cast<double>(ratio(lv.degeneracy, total)) * std::polar(1.0, t * to_double(lv.energy));
    v *= s;
  }
  return v;
}

/// phi-bar(t) = exp(-i t mu / sigma) phi(t / sigma), evaluated in centered form
/// as prod_k phi-bar_k(sigma_k t / sigma).
inline std::complex<double> normalized_char_fun(const FactorizedPartitionFunction& pf, double t) {
  const Rational sigma2 = system_cumulants(pf).k2;
  if (sigma2 == 0) throw ZeroVarianceError("normalized characteristic function needs sigma > 0");
  const double sigma = std::sqrt(to_double(sigma2));
  std::complex<double> v = 1.0;
  for (const auto& f : pf.factors()) {
    const auto n = detail::numerics(f);
    if (n.sigma > 0) v *= detail::normalized_factor_cf(n, n.sigma * t / sigma);
  }
  return v;
}

/// Continuous branch of log phi-bar along an ascending grid starting at 0,
/// unwound factor by factor.
inline std::vector<std::complex<double>> log_normalized_char_fun(const FactorizedPartitionFunction& pf,
                                                                 std::span<const double> t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0) throw InvalidArgument("t grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("t grid must be strictly ascending");
  const Rational sigma2 = system_cumulants(pf).k2;
  if (sigma2 == 0) throw ZeroVarianceError("normalized characteristic function needs sigma > 0");
  const double sigma = std::sqrt(to_double(sigma2));

  std::vector<std::complex<double>> out(t_grid.size(), 0.0);
  for (std::size_t k = 0; k < pf.factor_count(); ++k) {
    const auto n = detail::numerics(pf.factors()[k]);
    if (n.sigma <= 0) continue;
    double wrapped = 0.0, unwound = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const std::complex<double> v = detail::normalized_factor_cf(n, n.sigma * t_grid[i] / sigma);
      const double mag = std::abs(v);
      const double arg = std::arg(v);
      const double step = std::remainder(arg - wrapped, 2.0 * std::numbers::pi);
      if (mag < detail::kZeroTolerance || std::abs(step) >= std::numbers::pi / 2)
        throw BranchError("log branch lost for factor k = " + std::to_string(k + 1) +
                          " at t = " + format_double(t_grid[i]));
      unwound += step;
      wrapped = arg;
      out[i] += std::complex<double>(std::log(mag), unwound);
    }
  }
  return out;
}

/// M_k(tau) = sup_{|s| <= tau} |d^3/ds^3 log phi-bar_k(s)|, realized as a max
/// over a uniform grid of `grid_points` points on [-tau, tau].
inline double third_log_deriv_sup(const FactorSpectrum& f, double tau, int grid_points = 512) {
  return detail::sup_third_log_deriv(detail::numerics(f), tau, grid_points);
}

inline nlohmann::ordered_json to_json(const SpectralMoments& m) {
  return {{"mu", to_string(m.mu)},
          {"sigma2", to_string(m.sigma2)},
          {"skewness", m.skewness},
          {"excess_kurtosis", m.excess_kurtosis}};
}

}  // namespace specstat
