#pragma once

// Q_N(k): partitions of k into distinct parts no larger than N, and the
// Gaussian asymptotic Q_N(k) ~ 2^N / (sqrt(2 pi) sigma) exp(-(k - mu)^2 / (2 sigma^2)).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <vector>

#include "specstat/errors.hpp"
#include "specstat/numeric.hpp"

namespace specstat {

struct PartitionTable {
  int N = 0;
  std::vector<BigInt> counts;  ///< counts[k] = Q_N(k), k = 0 .. N(N+1)/2
};

inline std::uint64_t max_part_sum(int n) {
  return static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n + 1) / 2;
}

/// Dynamic programming over parts 1..N with an in-place reverse scan.
inline PartitionTable q_table(int n, std::uint64_t cap = 100'000'000) {
  if (n < 1) throw InvalidArgument("q_table needs N >= 1");
  const std::uint64_t top = max_part_sum(n);
  if (top + 1 > cap) throw BudgetExceeded("Q_N table of " + std::to_string(top + 1) + " entries exceeds cap");
  PartitionTable t{n, std::vector<BigInt>(top + 1, BigInt(0))};
  t.counts[0] = 1;
  std::uint64_t reach = 0;
  for (std::uint64_t part = 1; part <= static_cast<std::uint64_t>(n); ++part) {
    reach += part;
    for (std::uint64_t k = reach; k >= part; --k) t.counts[k] += t.counts[k - part];
  }
  return t;
}

inline double q_mean(int n) { return n * (n + 1.0) / 4.0; }
inline double q_variance(int n) { return n * (n + 0.5) * (n + 1.0) / 12.0; }

/// Natural log of the Gaussian approximation to Q_N(k).
inline double q_asymptotic_log(int n, double k) {
  const double mu = q_mean(n);
  const double var = q_variance(n);
  return n * std::numbers::ln2 - 0.5 * std::log(2.0 * std::numbers::pi * var) -
         (k - mu) * (k - mu) / (2.0 * var);
}

inline double q_asymptotic(int n, double k) {
  if (k < 0 || k > static_cast<double>(max_part_sum(n)))
    throw InvalidArgument("k outside 0 .. N(N+1)/2");
  return std::exp(q_asymptotic_log(n, k));
}

struct AccuracyRow {
  std::uint64_t k = 0;
  BigInt exact;
  double approx = 0.0;
  double relative_error = 0.0;
};

struct AccuracyReport {
  int N = 0;
  double window_sigmas = 0.0;
  std::vector<AccuracyRow> rows;
  double max_relative_error = 0.0;
};

/// Compares exact and asymptotic counts for every k with |k - mu| <= window * sigma.
inline AccuracyReport q_accuracy_report(const PartitionTable& table, double window_sigmas) {
  if (!(window_sigmas >= 0)) throw InvalidArgument("window must be non-negative");
  const int n = table.N;
  const double mu = q_mean(n);
  const double sigma = std::sqrt(q_variance(n));
  AccuracyReport rep{n, window_sigmas, {}, 0.0};
  for (std::uint64_t k = 0; k < table.counts.size(); ++k) {
    if (std::abs(static_cast<double>(k) - mu) > window_sigmas * sigma) continue;
    const BigInt& exact = table.counts[k];
    const long double log_approx = q_asymptotic_log(n, static_cast<double>(k));
    const double rel = static_cast<double>(std::abs(std::expm1(log_abs(exact) - log_approx)));
    rep.rows.push_back({k, exact, std::exp(static_cast<double>(log_approx)), rel});
    rep.max_relative_error = std::max(rep.max_relative_error, rel);
  }
  return rep;
}

inline AccuracyReport q_accuracy_report(int n, double window_sigmas) {
  return q_accuracy_report(q_table(n), window_sigmas);
}

inline void write_csv(std::ostream& os, const PartitionTable& t) {
  os << "k,Q_N(k)\n";
  for (std::size_t k = 0; k < t.counts.size(); ++k) os << k << ',' << to_string(t.counts[k]) << '\n';
}

inline void write_csv(std::ostream& os, const AccuracyReport& r) {
  os << "k,exact,approx,rel_error\n";
  for (const auto& row : r.rows)
    os << row.k << ',' << to_string(row.exact) << ',' << format_double(row.approx) << ','
       << format_double(row.relative_error) << '\n';
}

}  // namespace specstat
