// chronon: runs a JSON-configured chronon simulation and writes CSV/JSON
// series plus a summary record.
//
// Exit codes: 0 success, 1 validation error, 2 simulation error, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chronon/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kSimulation = 2, kIo = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chronon finite-difference quantum and classical simulations"};
  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<double> tau;
  std::optional<std::int64_t> steps;
  std::optional<std::string> scheme;
  bool quiet = false;

  app.add_option("-c,--config", config_path, "JSON run configuration")->required();
  app.add_option("-o,--output", output, "output path (overrides output.path)");
  app.add_option("--format", format, "csv|json (overrides output.format)");
  app.add_option("--tau", tau, "chronon in seconds (overrides scheme.tau)");
  app.add_option("--steps", steps, "number of chronon steps (overrides steps)");
  app.add_option("--scheme", scheme, "retarded|symmetric|advanced (overrides scheme.variant)");
  app.add_flag("-q,--quiet", quiet, "do not list written files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    chronon::cli::RunConfig config = chronon::cli::load_config(config_path);
    chronon::cli::Overrides overrides;
    overrides.tau = tau;
    overrides.steps = steps;
    if (scheme) overrides.scheme = chronon::parse_variant(*scheme);
    if (output) overrides.output = *output;
    if (format) overrides.format = chronon::cli::parse_format(*format);
    chronon::cli::apply_overrides(config, overrides);

    const auto report = chronon::cli::run(config);
    if (!quiet) {
      for (const auto& p : report.written) std::cout << p.string() << '\n';
    }
    return kOk;
  } catch (const chronon::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const chronon::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const chronon::SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return kSimulation;
  } catch (const std::exception& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return kSimulation;
  }
}
