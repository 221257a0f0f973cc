// specstat: exact level densities and Gaussian-limit diagnostics for
// factorized partition functions.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specstat/cli.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

// "0:1,1:1,2:1" -> levels (energy:degeneracy).
specstat::FactorSpectrum parse_spectrum(const std::string& text) {
  std::vector<specstat::Level> levels;
  for (const auto& item : split(text, ',')) {
    auto parts = split(item, ':');
    if (parts.size() != 2) throw specstat::ModelError("--spectrum entries are energy:degeneracy");
    levels.push_back({specstat::parse_rational(parts[0]), specstat::BigInt(parts[1])});
  }
  return specstat::FactorSpectrum(std::move(levels));
}

// "1:2:0,3:0:1" -> 1*k^2 + 3*N.
std::vector<specstat::EnergyPolyTerm> parse_poly(const std::string& text) {
  std::vector<specstat::EnergyPolyTerm> poly;
  for (const auto& item : split(text, ',')) {
    auto parts = split(item, ':');
    if (parts.size() != 3) throw specstat::ModelError("--energy-poly terms are coef:k_power:N_power");
    poly.push_back({specstat::BigInt(parts[0]), static_cast<unsigned>(std::stoul(parts[1])),
                    static_cast<unsigned>(std::stoul(parts[2]))});
  }
  return poly;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace specstat;
  CLI::App app{"Exact spectral statistics and Gaussian-limit diagnostics for factorized partition functions"};

  RunConfig config;
  std::string command, model_kind, model_file, spectrum, energy_poly, format = "json", out_path;
  std::optional<int> n, epsilon;
  std::optional<double> temperature;

  app.add_option("command", command, "density | moments | charfun | clt-check | sweep | qpartitions | oracle-check")
      ->required()
      ->check(CLI::IsMember({"density", "moments", "charfun", "clt-check", "sweep", "qpartitions", "oracle-check"}));
  app.add_option("--model", model_kind, "PF_BCN | HS_SU11 | TOY | TWO_LEVEL_FAMILY");
  app.add_option("--model-file", model_file, "ModelSpec JSON file")->check(CLI::ExistingFile);
  app.add_option("--N", n, "number of sites / particles");
  app.add_option("--epsilon", epsilon, "PF_BCN sign, +1 or -1");
  app.add_option("--spectrum", spectrum, "TOY one-particle spectrum, e.g. 0:1,1:1,2:1");
  app.add_option("--energy-poly", energy_poly, "TWO_LEVEL_FAMILY E(k,N) terms coef:k_power:N_power");
  app.add_option("--t0", config.clt.t0, "upper end of the t grid")->capture_default_str();
  app.add_option("--eps1", config.clt.epsilon1, "epsilon_1 for M_k(epsilon_1)")->capture_default_str();
  app.add_option("--delta", config.clt.delta, "Lyapunov exponent delta")->capture_default_str();
  app.add_option("--alpha", config.clt.alpha, "fraction alpha for the variance criterion")->capture_default_str();
  app.add_option("--grid", config.clt.grid_points, "grid points per M_k supremum")->capture_default_str();
  app.add_option("--t-points", config.clt.t_points, "points on the [0, t0] grid")->capture_default_str();
  app.add_option("--sweep", config.n_sweep, "comma-separated N values")->delimiter(',')->capture_default_str();
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--out", out_path, "output file (default: standard output)");
  app.add_option("--temperature", temperature, "temperature T > 0 (k_B = 1), q = exp(-1/T)");
  app.add_option("--budget", config.budget, "oracle state budget")->capture_default_str();
  app.add_option("--support-cap", config.clt.support_cap, "max expanded support size")->capture_default_str();
  app.add_option("--window", config.window_sigmas, "qpartitions accuracy window in sigmas")->capture_default_str();
  app.add_option("--threads", config.threads, "worker threads for sweeps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    write_error(std::cerr, "usage", exit_code::kUsage, e.what());
    return exit_code::kUsage;
  }

  try {
    config.command = parse_command(command);
    config.format = format == "csv" ? OutputFormat::kCsv : OutputFormat::kJson;
    if (!out_path.empty()) config.output_path = out_path;
    config.temperature = temperature;

    if (!model_file.empty()) {
      std::ifstream in(model_file);
      config.model = model_from_json(nlohmann::json::parse(in, nullptr, true));
    } else if (!model_kind.empty()) {
      config.model.kind = parse_model_kind(model_kind);
    } else if (config.command == Command::kQPartitions) {
      config.model.kind = ModelKind::kPfBcn;
    } else {
      throw InvalidArgument("one of --model or --model-file is required");
    }
    if (n) config.model.N = *n;
    if (epsilon) config.model.epsilon = *epsilon;
    if (!spectrum.empty()) config.model.one_particle_spectrum = parse_spectrum(spectrum);
    if (!energy_poly.empty()) config.model.energy_poly = parse_poly(energy_poly);
  } catch (const nlohmann::json::exception& e) {
    write_error(std::cerr, "model_error", exit_code::kModel, e.what());
    return exit_code::kModel;
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    write_error(std::cerr, e.kind(), code, e.what());
    return code;
  } catch (const std::exception& e) {
    write_error(std::cerr, "usage", exit_code::kUsage, e.what());
    return exit_code::kUsage;
  }

  return run(config, std::cout, std::cerr);
}
