#pragma once

// JSON run configuration for the chronon command-line runner.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "chronon/classical.hpp"
#include "chronon/decohere.hpp"
#include "chronon/physcore.hpp"
#include "chronon/qevolve.hpp"

namespace chronon::cli {

enum class Command { Decohere, Schrodinger, Classical, Sweep };
enum class Format { Csv, Json };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);
Format parse_format(std::string_view name);

namespace system_spec {
struct Literal {
  Matrix hamiltonian;
};
/// diag(0, delta_e)
struct TwoLevel {
  double delta_e;
};
/// diag(hbar_omega (n + 1/2)), n = 0..dim-1
struct TruncatedOscillator {
  int dim;
  double hbar_omega;
};
/// Free electron on a 1-D grid, three-point Laplacian with Dirichlet ends.
struct FreeGrid {
  int dim;
  double spacing_cm;
};
}  // namespace system_spec

using SystemSpec = std::variant<system_spec::Literal, system_spec::TwoLevel,
                                system_spec::TruncatedOscillator, system_spec::FreeGrid>;

namespace initial_spec {
struct Amplitudes {
  Vector amplitudes;
};
struct Density {
  Matrix rho;
};
struct Measurement {
  decohere::MeasurementSetup setup;
};
}  // namespace initial_spec

using InitialSpec =
    std::variant<initial_spec::Amplitudes, initial_spec::Density, initial_spec::Measurement>;

struct ClassicalSpec {
  classical::Scenario scenario = classical::scenario::FreeMotion{};
  bool relativistic = false;
  classical::Transmission transmission = classical::Transmission::Averaged;
  double charge = Constants::e_esu;
  double mass = Constants::m_e_g;
};

struct SweepSpec {
  Command base = Command::Decohere;
  std::string parameter;  ///< tau | steps | delta_e
  std::vector<double> values;
};

struct OutputSpec {
  std::filesystem::path path;
  Format format = Format::Csv;
};

struct RunConfig {
  Command command = Command::Decohere;
  Variant variant = Variant::Retarded;
  /// Required for quantum commands; for `classical` it defaults to the
  /// particle's chronon 2 theta_0.
  std::optional<double> tau;
  std::optional<SystemSpec> system;
  std::optional<InitialSpec> initial;
  std::optional<ClassicalSpec> classical;
  std::int64_t steps = 0;
  std::int64_t stride = 1;
  qevolve::Seeding seeding = qevolve::Seeding::ContinuumStep;
  /// Pairs (r, s), r != s, reported by `decohere`; empty means all r < s.
  std::vector<std::pair<int, int>> track;
  OutputSpec output;
  std::optional<SweepSpec> sweep;
};

/// Command-line overrides; each set field replaces the config value.
struct Overrides {
  std::optional<double> tau;
  std::optional<std::int64_t> steps;
  std::optional<Variant> scheme;
  std::optional<std::filesystem::path> output;
  std::optional<Format> format;
};

/// Parses and validates a JSON document. Syntax errors are reported as
/// ValidationError with line/column; schema errors name the offending field.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Re-checks the cross-field invariants (also run by parse_config).
void validate(const RunConfig& config);

Matrix build_hamiltonian(const SystemSpec& spec);

}  // namespace chronon::cli
