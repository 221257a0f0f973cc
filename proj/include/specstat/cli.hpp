#pragma once

// Report generation behind the `specstat` command-line tool. `run` is the
// whole program minus argument parsing, so it can be driven in-process.

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specstat/bruteforce_oracle.hpp"
#include "specstat/clt_check.hpp"
#include "specstat/errors.hpp"
#include "specstat/models.hpp"
#include "specstat/partition_poly.hpp"
#include "specstat/partition_theory.hpp"
#include "specstat/spectral_stats.hpp"

namespace specstat {

enum class Command { kDensity, kMoments, kCharfun, kCltCheck, kSweep, kQPartitions, kOracleCheck };
enum class OutputFormat { kJson, kCsv };

namespace exit_code {
constexpr int kSuccess = 0;
constexpr int kMismatch = 1;  ///< oracle-check found a difference
constexpr int kUsage = 2;
constexpr int kModel = 3;
constexpr int kNumeric = 4;
constexpr int kBudget = 5;
}  // namespace exit_code

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::kDensity: return "density";
    case Command::kMoments: return "moments";
    case Command::kCharfun: return "charfun";
    case Command::kCltCheck: return "clt-check";
    case Command::kSweep: return "sweep";
    case Command::kQPartitions: return "qpartitions";
    case Command::kOracleCheck: return "oracle-check";
  }
  return "?";
}

inline Command parse_command(std::string_view s) {
  for (Command c : {Command::kDensity, Command::kMoments, Command::kCharfun, Command::kCltCheck, Command::kSweep,
                    Command::kQPartitions, Command::kOracleCheck})
    if (to_string(c) == s) return c;
  throw InvalidArgument("unknown command '" + std::string(s) + "'");
}

struct RunConfig {
  Command command = Command::kMoments;
  ModelSpec model;
  OutputFormat format = OutputFormat::kJson;
  std::optional<std::string> output_path;
  CltParams clt;
  std::vector<int> n_sweep{10, 20, 40, 80, 160};
  std::optional<double> temperature;  ///< q = exp(-1/T), k_B = 1
  std::uint64_t budget = std::uint64_t{1} << 22;
  double window_sigmas = 2.0;
  unsigned threads = 1;  ///< not part of the report: results are thread-count independent
};

/// Resolved configuration as embedded in every report.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = std::string(to_string(c.command));
  j["model"] = to_json(c.model);
  j["format"] = c.format == OutputFormat::kJson ? "json" : "csv";
  j["t0"] = c.clt.t0;
  j["eps1"] = c.clt.epsilon1;
  j["delta"] = c.clt.delta;
  j["alpha"] = c.clt.alpha;
  j["grid"] = c.clt.grid_points;
  j["t_points"] = c.clt.t_points;
  j["support_cap"] = c.clt.support_cap;
  j["sweep"] = c.n_sweep;
  j["temperature"] = c.temperature ? nlohmann::ordered_json(*c.temperature) : nlohmann::ordered_json(nullptr);
  j["budget"] = c.budget;
  j["window_sigmas"] = c.window_sigmas;
  return j;
}

inline void validate(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be a positive number");
  };
  positive(c.clt.t0, "--t0");
  positive(c.clt.epsilon1, "--eps1");
  positive(c.clt.delta, "--delta");
  if (!(c.clt.alpha > 0 && c.clt.alpha <= 1)) throw InvalidArgument("--alpha must lie in (0, 1]");
  if (c.clt.grid_points < 2) throw InvalidArgument("--grid must be >= 2");
  if (c.clt.t_points < 2) throw InvalidArgument("--t-points must be >= 2");
  if (c.temperature) positive(*c.temperature, "--temperature");
  if (c.budget == 0) throw InvalidArgument("--budget must be positive");
  if (c.clt.support_cap == 0) throw InvalidArgument("--support-cap must be positive");
  if (c.n_sweep.empty()) throw InvalidArgument("--sweep needs at least one N");
  for (int n : c.n_sweep)
    if (n < 1) throw InvalidArgument("--sweep entries must be positive");
  if (!(c.window_sigmas >= 0)) throw InvalidArgument("--window must be non-negative");
}

namespace detail {

inline void write_config_comment(std::ostream& os, const RunConfig& c) {
  os << "# config: " << to_json(c).dump() << '\n';
}

inline int report_density(const RunConfig& c, std::ostream& os) {
  const LevelDensity d = expand(build(c.model), {ExpandStrategy::kDenseAbsorption, c.clt.support_cap});
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    write_csv(os, d);
  } else {
    nlohmann::ordered_json j{{"config", to_json(c)}, {"density", to_json(d)}};
    os << j.dump(2) << '\n';
  }
  return exit_code::kSuccess;
}

inline int report_moments(const RunConfig& c, std::ostream& os) {
  const auto pf = build(c.model);
  const SpectralMoments m = system_moments(pf);
  std::optional<std::complex<double>> energy;
  double q = 0.0;
  if (c.temperature) {
    q = std::exp(-1.0 / *c.temperature);
    energy = thermodynamic_energy(pf, q);
  }
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    os << "mu,sigma2,skewness,excess_kurtosis" << (energy ? ",q,energy_re,energy_im" : "") << '\n';
    os << to_string(m.mu) << ',' << to_string(m.sigma2) << ',' << format_double(m.skewness) << ','
       << format_double(m.excess_kurtosis);
    if (energy) os << ',' << format_double(q) << ',' << format_double(energy->real()) << ',' << format_double(energy->imag());
    os << '\n';
  } else {
    nlohmann::ordered_json j{{"config", to_json(c)}, {"moments", to_json(m)}};
    j["dimension"] = to_string(dimension(pf));
    if (energy)
      j["thermodynamic_energy"] = {{"temperature", *c.temperature}, {"q", q}, {"re", energy->real()}, {"im", energy->imag()}};
    os << j.dump(2) << '\n';
  }
  return exit_code::kSuccess;
}

inline int report_charfun(const RunConfig& c, std::ostream& os) {
  const auto pf = build(c.model);
  const auto grid = uniform_grid(c.clt.t0, c.clt.t_points);
  const auto logs = log_normalized_char_fun(pf, grid);
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    os << "t,Re,Im,Re_log,Im_log\n";
  }
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::complex<double> v = normalized_char_fun(pf, grid[i]);
    if (c.format == OutputFormat::kCsv)
      os << format_double(grid[i]) << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << ','
         << format_double(logs[i].real()) << ',' << format_double(logs[i].imag()) << '\n';
    else
      rows.push_back({{"t", grid[i]}, {"re", v.real()}, {"im", v.imag()}, {"re_log", logs[i].real()}, {"im_log", logs[i].imag()}});
  }
  if (c.format == OutputFormat::kJson) {
    nlohmann::ordered_json j{{"config", to_json(c)}, {"trace", std::move(rows)}};
    os << j.dump(2) << '\n';
  }
  return exit_code::kSuccess;
}

inline int report_clt(const RunConfig& c, std::ostream& os) {
  const auto pf = build(c.model);
  const CLTDiagnostics d = diagnose(pf, c.clt);
  const VarianceCriterion crit = sufficient_variance_criterion(pf, c.clt.alpha);
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    const auto j = to_json(d);
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) os << (std::exchange(first, false) ? "" : ",") << it.key();
    os << ",implied_c1\n";
    first = true;
    for (auto it = j.begin(); it != j.end(); ++it)
      os << (std::exchange(first, false) ? "" : ",") << format_double(it.value().is_null() ? NAN : it.value().get<double>());
    os << ',' << format_double(crit.implied_c1) << '\n';
  } else {
    nlohmann::ordered_json j{{"config", to_json(c)}, {"diagnostics", to_json(d)}};
    j["variance_criterion"] = {{"M_of_N", to_string(crit.max_variance)},
                               {"m_of_N", to_string(crit.lower_variance)},
                               {"count_required", crit.count_required},
                               {"ratio_A", crit.ratio_A},
                               {"implied_c1", crit.implied_c1}};
    os << j.dump(2) << '\n';
  }
  return exit_code::kSuccess;
}

inline int report_sweep(const RunConfig& c, std::ostream& os) {
  const ModelSpec base = c.model;
  const ModelFamily family = [base](int n) {
    ModelSpec s = base;
    s.N = n;
    return build(s);
  };
  const SweepReport rep = sweep(family, c.n_sweep, c.clt, c.threads);
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    write_csv(os, rep);
  } else {
    nlohmann::ordered_json j{{"config", to_json(c)}, {"sweep", to_json(rep)}};
    os << j.dump(2) << '\n';
  }
  return exit_code::kSuccess;
}

inline int report_qpartitions(const RunConfig& c, std::ostream& os) {
  const PartitionTable t = q_table(c.model.N, c.clt.support_cap);
  const AccuracyReport acc = q_accuracy_report(t, c.window_sigmas);
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    write_csv(os, t);
    os << "# accuracy: window_sigmas=" << format_double(acc.window_sigmas)
       << " max_relative_error=" << format_double(acc.max_relative_error) << '\n';
    write_csv(os, acc);
  } else {
    auto counts = nlohmann::ordered_json::array();
    for (const auto& q : t.counts) counts.push_back(to_string(q));
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : acc.rows)
      rows.push_back({{"k", r.k}, {"exact", to_string(r.exact)}, {"approx", r.approx}, {"rel_error", r.relative_error}});
    nlohmann::ordered_json j{{"config", to_json(c)},
                             {"N", t.N},
                             {"counts", std::move(counts)},
                             {"accuracy",
                              {{"window_sigmas", acc.window_sigmas},
                               {"max_relative_error", acc.max_relative_error},
                               {"rows", std::move(rows)}}}};
    os << j.dump(2) << '\n';
  }
  return exit_code::kSuccess;
}

inline int report_oracle(const RunConfig& c, std::ostream& os) {
  const auto pf = build(c.model);
  const LevelDensity oracle = enumerate_spectrum(pf, {c.budget});
  const LevelDensity fast = expand(pf, {ExpandStrategy::kDenseAbsorption, c.clt.support_cap});
  const bool match = oracle == fast;
  const char* verdict = match ? "EXACT_MATCH" : "MISMATCH";
  if (c.format == OutputFormat::kCsv) {
    write_config_comment(os, c);
    os << "verdict,levels,dimension\n" << verdict << ',' << fast.size() << ',' << to_string(fast.dimension()) << '\n';
  } else {
    nlohmann::ordered_json j{{"config", to_json(c)},
                             {"verdict", verdict},
                             {"levels", fast.size()},
                             {"dimension", to_string(fast.dimension())}};
    os << j.dump(2) << '\n';
  }
  return match ? exit_code::kSuccess : exit_code::kMismatch;
}

inline int dispatch(const RunConfig& c, std::ostream& os) {
  switch (c.command) {
    case Command::kDensity: return report_density(c, os);
    case Command::kMoments: return report_moments(c, os);
    case Command::kCharfun: return report_charfun(c, os);
    case Command::kCltCheck: return report_clt(c, os);
    case Command::kSweep: return report_sweep(c, os);
    case Command::kQPartitions: return report_qpartitions(c, os);
    case Command::kOracleCheck: return report_oracle(c, os);
  }
  throw InvalidArgument("unhandled command");
}

}  // namespace detail

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const ModelError*>(&e)) return exit_code::kModel;
  if (dynamic_cast<const BudgetExceeded*>(&e)) return exit_code::kBudget;
  if (dynamic_cast<const NumericError*>(&e)) return exit_code::kNumeric;
  return exit_code::kUsage;
}

inline void write_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  nlohmann::ordered_json j{{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}};
  err << j.dump() << '\n';
}

/// Executes one command. The report goes to `out` (or the configured file);
/// failures produce a JSON error object on `err` and a documented exit code.
inline int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    validate(config.model);
    std::ostringstream buffer;
    const int code = detail::dispatch(config, buffer);
    if (config.output_path) {
      std::ofstream file(*config.output_path, std::ios::binary);
      if (!file) throw InvalidArgument("cannot open output file " + *config.output_path);
      file << buffer.str();
    } else {
      out << buffer.str();
    }
    return code;
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    write_error(err, e.kind(), code, e.what());
    return code;
  }
}

}  // namespace specstat
