#pragma once

// Finite-N diagnostics for the Gaussian limit of factorized level densities:
// variance non-concentration, third-log-derivative growth, Lyapunov sums,
// the explicit characteristic-function error bound, and KS distance.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "specstat/errors.hpp"
#include "specstat/numeric.hpp"
#include "specstat/partition_poly.hpp"
#include "specstat/spectral_stats.hpp"

namespace specstat {

struct CltParams {
  double t0 = 3.0;
  double epsilon1 = 0.5;
  double delta = 1.0;
  double alpha = 0.5;
  int grid_points = 512;  ///< grid for each M_k(tau) supremum
  int t_points = 64;      ///< grid over [0, t0] for the error profile
  std::uint64_t support_cap = 100'000'000;
};

struct CLTDiagnostics {
  double c1_statistic = 0.0;
  double m_of_N = 0.0;
  double m_lower = 0.0;
  double ratio_A = 0.0;
  double alpha = 0.0;
  double epsilon1 = 0.0;
  double max_Mk = 0.0;
  double lyapunov_delta = 0.0;
  double lyapunov_sum = 0.0;
  double ks_distance = std::numeric_limits<double>::quiet_NaN();  ///< NaN when expansion exceeds the cap
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double charfun_error_sup = 0.0;
  double charfun_bound = 0.0;
  double t0 = 0.0;
};

namespace detail {

inline Rational total_variance(const FactorizedPartitionFunction& pf) {
  Rational s = 0;
  for (const auto& f : pf.factors()) s += factor_cumulants(f).k2;
  return s;
}

inline std::vector<Rational> factor_variances(const FactorizedPartitionFunction& pf) {
  std::vector<Rational> v;
  v.reserve(pf.factor_count());
  for (const auto& f : pf.factors()) v.push_back(factor_cumulants(f).k2);
  return v;
}

}  // namespace detail

/// sqrt(N) * max_k sigma_k / sigma; bounded in N iff condition (i) holds.
inline double condition_one_statistic(const FactorizedPartitionFunction& pf) {
  const auto vars = detail::factor_variances(pf);
  Rational total = 0;
  for (const auto& v : vars) total += v;
  if (total == 0) throw ZeroVarianceError("condition (i) statistic needs sigma > 0");
  const Rational largest = *std::max_element(vars.begin(), vars.end());
  return std::sqrt(to_double(largest * static_cast<unsigned long>(vars.size()) / total));
}

struct VarianceCriterion {
  Rational max_variance;    ///< M(N)
  Rational lower_variance;  ///< m(N), the ceil(alpha N)-th largest sigma_k^2
  std::size_t count_required = 0;
  double ratio_A = 0.0;
  double implied_c1 = 0.0;  ///< (A / alpha)^{1/2}
};

inline VarianceCriterion sufficient_variance_criterion(const FactorizedPartitionFunction& pf, double alpha) {
  if (!(alpha > 0 && alpha <= 1)) throw InvalidArgument("alpha must lie in (0, 1]");
  auto vars = detail::factor_variances(pf);
  const std::size_t n = vars.size();
  // The 1e-9 slack keeps alpha * N = 2.0000000000000004 from rounding up to 3.
  std::size_t count = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, n);
  std::sort(vars.begin(), vars.end(), [](const Rational& a, const Rational& b) { return a > b; });
  VarianceCriterion c;
  c.max_variance = vars.front();
  c.lower_variance = vars[count - 1];
  c.count_required = count;
  if (c.lower_variance == 0) {
    c.ratio_A = std::numeric_limits<double>::infinity();
    c.implied_c1 = std::numeric_limits<double>::infinity();
  } else {
    const Rational a = c.max_variance / c.lower_variance;
    c.ratio_A = to_double(a);
    c.implied_c1 = std::sqrt(c.ratio_A / alpha);
  }
  return c;
}

/// max_k M_k(epsilon1) over the factors with positive variance.
inline double max_third_log_deriv(const FactorizedPartitionFunction& pf, double epsilon1, int grid_points = 512) {
  double best = 0.0;
  std::vector<const FactorSpectrum*> seen;
  for (const auto& f : pf.factors()) {
    if (std::any_of(seen.begin(), seen.end(), [&](const FactorSpectrum* s) { return *s == f; })) continue;
    seen.push_back(&f);
    const auto n = detail::numerics(f);
    if (n.sigma <= 0) continue;
    best = std::max(best, detail::sup_third_log_deriv(n, epsilon1, grid_points));
  }
  return best;
}

struct ConditionTwoRow {
  int N = 0;
  double max_Mk = 0.0;
};

using ModelFamily = std::function<FactorizedPartitionFunction(int)>;

inline std::vector<ConditionTwoRow> condition_two_profile(const ModelFamily& family, double epsilon1,
                                                          std::span<const int> n_sweep, int grid_points = 512) {
  std::vector<ConditionTwoRow> rows;
  for (int n : n_sweep) rows.push_back({n, max_third_log_deriv(family(n), epsilon1, grid_points)});
  return rows;
}

/// sigma^{-(2+delta)} sum_k <|E_k - mu_k|^{2+delta}>, with exact means and variance.
inline double lyapunov_sum(const FactorizedPartitionFunction& pf, double delta) {
  if (!(delta > 0)) throw InvalidArgument("delta must be positive");
  Rational variance = 0;
  double sum = 0.0;
  for (const auto& f : pf.factors()) {
    const Cumulants c = factor_cumulants(f);
    variance += c.k2;
    const BigInt total = f.dimension();
    for (const auto& lv : f.levels()) {
      const double x = std::abs(to_double(lv.energy - c.mean));
      sum += static_cast<double>(ratio(lv.degeneracy, total)) * std::pow(x, 2.0 + delta);
    }
  }
  if (variance == 0) throw ZeroVarianceError("Lyapunov sum needs sigma > 0");
  return sum / std::pow(to_double(variance), 1.0 + delta / 2.0);
}

struct CharfunErrorRow {
  double t = 0.0;
  double error = 0.0;  ///< |log phi-bar(t) + t^2/2|
  double bound = 0.0;  ///< (1/6) sum_k (sigma_k t / sigma)^3 M_k(sigma_k t / sigma)
};

struct CharfunError {
  std::vector<CharfunErrorRow> profile;
  double error_sup = 0.0;
  double bound = 0.0;
};

inline std::vector<double> uniform_grid(double t0, int points) {
  if (points < 2) throw InvalidArgument("a t grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = t0 * i / (points - 1);
  return g;
}

inline CharfunError charfun_error(const FactorizedPartitionFunction& pf, double t0,
                                  std::span<const double> t_grid, int grid_points = 512) {
  if (!(t0 > 0)) throw InvalidArgument("t0 must be positive");
  for (double t : t_grid)
    if (t < 0 || t > t0) throw InvalidArgument("t grid must lie inside [0, t0]");
  const Rational variance = detail::total_variance(pf);
  if (variance == 0) throw ZeroVarianceError("characteristic-function error needs sigma > 0");
  const double sigma = std::sqrt(to_double(variance));
  const auto nums = detail::numerics(pf);

  if (pf.all_two_level()) {
    double widest = 0.0;
    for (const auto& n : nums) widest = std::max(widest, n.sigma * t0 / sigma);
    if (widest >= std::numbers::pi / 2)
      throw NumericError("max_k sigma_k t0 / sigma = " + format_double(widest) +
                         " reaches pi/2; N is too small for this t0");
  }

  const auto logs = log_normalized_char_fun(pf, t_grid);
  CharfunError out;
  out.profile.reserve(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const double err = std::abs(logs[i] + std::complex<double>(0.5 * t * t, 0.0));
    double bound = 0.0;
    if (t > 0) {
      for (const auto& n : nums) {
        if (n.sigma <= 0) continue;
        const double tau = n.sigma * t / sigma;
        bound += tau * tau * tau * detail::sup_third_log_deriv(n, tau, grid_points);
      }
      bound /= 6.0;
    }
    out.profile.push_back({t, err, bound});
    out.error_sup = std::max(out.error_sup, err);
    out.bound = std::max(out.bound, bound);
  }
  return out;
}

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// sup over atoms of |F(E^-) - Phi(z)| and |F(E^+) - Phi(z)|. With sigma = 0
/// every atom sits at the center, where Phi = 1/2.
inline double ks_distance(const LevelDensity& d, const Rational& mu, double sigma) {
  if (d.empty()) throw InvalidArgument("KS distance of an empty density");
  const BigInt& total = d.dimension();
  BigInt below = 0;
  double ks = 0.0;
  for (const auto& lv : d.levels()) {
    const double z = sigma > 0 ? to_double(lv.energy - mu) / sigma : 0.0;
    const double phi = standard_normal_cdf(z);
    const double f_minus = static_cast<double>(ratio(below, total));
    below += lv.degeneracy;
    const double f_plus = static_cast<double>(ratio(below, total));
    ks = std::max({ks, std::abs(f_minus - phi), std::abs(f_plus - phi)});
  }
  return ks;
}

struct GaussianDistance {
  double ks_distance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline GaussianDistance gaussian_distance(const LevelDensity& d) {
  const SpectralMoments m = density_moments(d, 4);
  if (m.sigma2 == 0) throw ZeroVarianceError("Gaussian distance needs sigma > 0");
  return {ks_distance(d, m.mu, std::sqrt(to_double(m.sigma2))), m.skewness, m.excess_kurtosis};
}

/// Every diagnostic for one system. The KS distance is left NaN when the
/// expanded support would exceed `params.support_cap`.
inline CLTDiagnostics diagnose(const FactorizedPartitionFunction& pf, const CltParams& params) {
  CLTDiagnostics d;
  d.alpha = params.alpha;
  d.epsilon1 = params.epsilon1;
  d.lyapunov_delta = params.delta;
  d.t0 = params.t0;
  d.c1_statistic = condition_one_statistic(pf);
  const auto crit = sufficient_variance_criterion(pf, params.alpha);
  d.m_of_N = to_double(crit.max_variance);
  d.m_lower = to_double(crit.lower_variance);
  d.ratio_A = crit.ratio_A;
  d.max_Mk = max_third_log_deriv(pf, params.epsilon1, params.grid_points);
  d.lyapunov_sum = lyapunov_sum(pf, params.delta);
  const SpectralMoments m = system_moments(pf);
  d.skewness = m.skewness;
  d.excess_kurtosis = m.excess_kurtosis;
  const auto grid = uniform_grid(params.t0, params.t_points);
  const auto err = charfun_error(pf, params.t0, grid, params.grid_points);
  d.charfun_error_sup = err.error_sup;
  d.charfun_bound = err.bound;
  try {
    const LevelDensity density = expand(pf, {ExpandStrategy::kDenseAbsorption, params.support_cap});
    d.ks_distance = ks_distance(density, m.mu, std::sqrt(to_double(m.sigma2)));
  } catch (const BudgetExceeded&) {
  }
  return d;
}

/// Least-squares slope of log y against log x; NaN if any point is not positive.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct SweepRow {
  int N = 0;
  std::size_t factors = 0;
  Rational mu;
  Rational sigma2;
  double max_sigma_k2 = 0.0;
  CLTDiagnostics diagnostics;
};

struct SweepExponents {
  double sigma2 = 0.0;
  double max_sigma_k2 = 0.0;
  double c1_statistic = 0.0;
  double max_Mk = 0.0;
  double lyapunov_sum = 0.0;
  double charfun_error_sup = 0.0;
  double ks_distance = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  SweepExponents exponents;
  double exponent_tolerance = 0.1;
  bool consistent_condition_one = false;  ///< c1 slope <= tolerance
  bool consistent_condition_two = false;  ///< max M_k slope <= 1/2 - tolerance
};

/// Runs `diagnose` for each N. Rows are computed on up to `threads` workers
/// and stored by index, so the report does not depend on scheduling.
inline SweepReport sweep(const ModelFamily& family, std::span<const int> n_sweep, const CltParams& params,
                         unsigned threads = 1, double exponent_tolerance = 0.1) {
  SweepReport rep;
  rep.exponent_tolerance = exponent_tolerance;
  rep.rows.resize(n_sweep.size());
  std::vector<std::exception_ptr> failures(n_sweep.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n_sweep.size(); i = next++) {
      try {
        const auto pf = family(n_sweep[i]);
        const SpectralMoments m = system_moments(pf);
        Rational largest = 0;
        for (const auto& v : detail::factor_variances(pf)) largest = std::max(largest, v);
        rep.rows[i] = {n_sweep[i], pf.factor_count(), m.mu, m.sigma2, to_double(largest), diagnose(pf, params)};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_sweep.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<double> x, s2, mk2, c1, mk, ly, ce, ks;
  for (const auto& r : rep.rows) {
    x.push_back(r.N);
    s2.push_back(to_double(r.sigma2));
    mk2.push_back(r.max_sigma_k2);
    c1.push_back(r.diagnostics.c1_statistic);
    mk.push_back(r.diagnostics.max_Mk);
    ly.push_back(r.diagnostics.lyapunov_sum);
    ce.push_back(r.diagnostics.charfun_error_sup);
    ks.push_back(r.diagnostics.ks_distance);
  }
  rep.exponents = {loglog_slope(x, s2), loglog_slope(x, mk2), loglog_slope(x, c1), loglog_slope(x, mk),
                   loglog_slope(x, ly), loglog_slope(x, ce), loglog_slope(x, ks)};
  rep.consistent_condition_one = rep.exponents.c1_statistic <= exponent_tolerance;
  rep.consistent_condition_two = rep.exponents.max_Mk <= 0.5 - exponent_tolerance;
  return rep;
}

inline nlohmann::ordered_json to_json(const CLTDiagnostics& d) {
  return {{"c1_statistic", d.c1_statistic},
          {"m_of_N", d.m_of_N},
          {"m_lower", d.m_lower},
          {"ratio_A", d.ratio_A},
          {"alpha", d.alpha},
          {"epsilon1", d.epsilon1},
          {"max_Mk", d.max_Mk},
          {"lyapunov_delta", d.lyapunov_delta},
          {"lyapunov_sum", d.lyapunov_sum},
          {"ks_distance", d.ks_distance},
          {"skewness", d.skewness},
          {"excess_kurtosis", d.excess_kurtosis},
          {"charfun_error_sup", d.charfun_error_sup},
          {"charfun_bound", d.charfun_bound},
          {"t0", d.t0}};
}

inline nlohmann::ordered_json to_json(const SweepReport& r) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json j{{"N", row.N},
                             {"factors", row.factors},
                             {"mu", to_string(row.mu)},
                             {"sigma2", to_string(row.sigma2)},
                             {"max_sigma_k2", row.max_sigma_k2}};
    const auto diagnostics = to_json(row.diagnostics);
    for (const auto& [key, value] : diagnostics.items()) j[key] = value;
    rows.push_back(std::move(j));
  }
  const auto& e = r.exponents;
  return {{"rows", std::move(rows)},
          {"exponents",
           {{"sigma2", e.sigma2},
            {"max_sigma_k2", e.max_sigma_k2},
            {"c1_statistic", e.c1_statistic},
            {"max_Mk", e.max_Mk},
            {"lyapunov_sum", e.lyapunov_sum},
            {"charfun_error_sup", e.charfun_error_sup},
            {"ks_distance", e.ks_distance}}},
          {"exponent_tolerance", r.exponent_tolerance},
          {"consistent_with_condition_i", r.consistent_condition_one},
          {"consistent_with_condition_ii", r.consistent_condition_two},
          {"verdict_basis", "finite-N extrapolation from log-log fits"}};
}

inline void write_csv(std::ostream& os, const SweepReport& r) {
  os << "N,factors,mu,sigma2,max_sigma_k2,c1_statistic,m_of_N,m_lower,ratio_A,max_Mk,lyapunov_sum,"
        "ks_distance,skewness,excess_kurtosis,charfun_error_sup,charfun_bound\n";
  for (const auto& row : r.rows) {
    const auto& d = row.diagnostics;
    os << row.N << ',' << row.factors << ',' << to_string(row.mu) << ',' << to_string(row.sigma2);
    for (double v : {row.max_sigma_k2, d.c1_statistic, d.m_of_N, d.m_lower, d.ratio_A, d.max_Mk, d.lyapunov_sum,
                     d.ks_distance, d.skewness, d.excess_kurtosis, d.charfun_error_sup, d.charfun_bound})
      os << ',' << format_double(v);
    os << '\n';
  }
}

}  // namespace specstat
