#include "chronon/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace chronon::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError(field, what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail(path + key, "is required");
  return obj.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

std::int64_t integer(const json& j, const std::string& field) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  // Accept integral floating values such as 1e6.
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.2e18) {
      return static_cast<std::int64_t>(v);
    }
  }
  fail(field, "must be an integer");
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "must be a string");
  return j.get<std::string>();
}

// A complex entry is a number or a [re, im] pair.
cplx complex_value(const json& j, const std::string& field) {
  if (j.is_number()) return {number(j, field), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], field), number(j[1], field)};
  fail(field, "complex entries are numbers or [re, im] pairs");
}

Vector complex_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = complex_value(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

RealVector real_vector(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "must be an array");
  RealVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

classical::Vec3 vec3(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return classical::Vec3::Zero();
  const RealVector v = real_vector(obj.at(key), path + key);
  if (v.size() != 3) fail(path + key, "must have 3 components");
  return v;
}

Matrix complex_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != j.size()) fail(row_field, "matrix must be square");
    for (std::size_t c = 0; c < j.size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_value(j[r][c], row_field + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

const json& single_key(const json& obj, const std::string& field, std::string& key) {
  if (!obj.is_object() || obj.size() != 1) {
    fail(field, "must contain exactly one specification");
  }
  key = obj.begin().key();
  return obj.begin().value();
}

SystemSpec parse_system(const json& j) {
  std::string key;
  const json& v = single_key(j, "system", key);
  const std::string p = "system." + key + ".";
  if (key == "hamiltonian") return system_spec::Literal{complex_matrix(v, "system.hamiltonian")};
  if (key == "two_level") {
    return system_spec::TwoLevel{number(require(v, "delta_e", p), p + "delta_e")};
  }
  if (key == "truncated_oscillator") {
    const auto dim = integer(require(v, "dim", p), p + "dim");
    const double hw = number(require(v, "hbar_omega", p), p + "hbar_omega");
    if (dim < 1 || dim > 4096) fail(p + "dim", "must be in [1, 4096]");
    return system_spec::TruncatedOscillator{static_cast<int>(dim), hw};
  }
  if (key == "free_grid") {
    const auto dim = integer(require(v, "dim", p), p + "dim");
    const double a = number(require(v, "spacing_cm", p), p + "spacing_cm");
    if (dim < 1 || dim > 4096) fail(p + "dim", "must be in [1, 4096]");
    if (!(a > 0.0)) fail(p + "spacing_cm", "must be > 0");
    return system_spec::FreeGrid{static_cast<int>(dim), a};
  }
  fail("system", "unknown system '" + key +
                     "' (expected hamiltonian|two_level|truncated_oscillator|free_grid)");
}

InitialSpec parse_initial(const json& j) {
  std::string key;
  const json& v = single_key(j, "initial", key);
  if (key == "amplitudes") {
    Vector a = complex_vector(v, "initial.amplitudes");
    if (std::abs(a.squaredNorm() - 1.0) > 1e-12) {
      fail("initial.amplitudes", "must be normalized (sum |c|^2 = 1)");
    }
    return initial_spec::Amplitudes{std::move(a)};
  }
  if (key == "density_matrix") {
    Matrix rho = complex_matrix(v, "initial.density_matrix");
    try {
      DensityMatrix check(rho);
    } catch (const ValidationError& e) {
      fail("initial.density_matrix", e.what());
    }
    return initial_spec::Density{std::move(rho)};
  }
  if (key == "measurement") {
    const std::string p = "initial.measurement.";
    decohere::MeasurementSetup s;
    s.object_amplitudes = complex_vector(require(v, "amplitudes", p), p + "amplitudes");
    s.classical_weights = v.contains("weights") ? real_vector(v.at("weights"), p + "weights")
                                                : RealVector::Ones(1);
    if (v.contains("pointer_labels")) {
      s.pointer_labels = real_vector(v.at("pointer_labels"), p + "pointer_labels");
    }
    try {
      s.validate();
    } catch (const ValidationError& e) {
      fail(p + e.field(), e.what());
    }
    return initial_spec::Measurement{std::move(s)};
  }
  fail("initial", "unknown initial state '" + key +
                      "' (expected amplitudes|density_matrix|measurement)");
}

classical::Scenario parse_scenario(const json& j) {
  std::string key;
  const json& v = single_key(j, "classical.scenario", key);
  const std::string p = "classical.scenario." + key + ".";
  const classical::Vec3 x0 = vec3(v, "x0", p);
  const classical::Vec3 v0 = vec3(v, "v0", p);
  if (key == "free_motion") return classical::scenario::FreeMotion{x0, v0};
  if (key == "uniform_b") return classical::scenario::UniformB{vec3(v, "B", p), x0, v0};
  if (key == "constant_e") return classical::scenario::ConstantE{vec3(v, "E", p), x0, v0};
  if (key == "elastic_line") {
    classical::scenario::ElasticLine s;
    s.spring_constant = number(require(v, "spring_constant", p), p + "spring_constant");
    if (!(s.spring_constant >= 0.0)) fail(p + "spring_constant", "must be >= 0");
    s.axis = v.contains("axis") ? static_cast<int>(integer(v.at("axis"), p + "axis")) : 0;
    if (s.axis < 0 || s.axis > 2) fail(p + "axis", "must be 0, 1 or 2");
    s.x0 = x0;
    s.v0 = v0;
    return s;
  }
  if (key == "em_pulse") {
    classical::scenario::EMPulse s;
    s.onset = integer(require(v, "onset", p), p + "onset");
    s.duration = integer(require(v, "duration", p), p + "duration");
    if (s.onset < 0) fail(p + "onset", "must be >= 0");
    if (s.duration < 1) fail(p + "duration", "must be >= 1");
    s.amplitude = vec3(v, "amplitude", p);
    s.x0 = x0;
    s.v0 = v0;
    return s;
  }
  fail("classical.scenario",
       "unknown scenario '" + key +
           "' (expected free_motion|uniform_b|constant_e|elastic_line|em_pulse)");
}

ClassicalSpec parse_classical(const json& j) {
  if (!j.is_object()) fail("classical", "must be an object");
  ClassicalSpec c;
  c.scenario = parse_scenario(require(j, "scenario", "classical."));
  if (j.contains("relativistic")) {
    if (!j.at("relativistic").is_boolean()) fail("classical.relativistic", "must be a boolean");
    c.relativistic = j.at("relativistic").get<bool>();
  }
  if (j.contains("transmission")) {
    const std::string t = text(j.at("transmission"), "classical.transmission");
    if (t == "averaged") {
      c.transmission = classical::Transmission::Averaged;
    } else if (t == "printed") {
      c.transmission = classical::Transmission::Printed;
    } else {
      fail("classical.transmission", "expected averaged|printed");
    }
  }
  if (j.contains("particle")) {
    const json& p = j.at("particle");
    if (p.is_string()) {
      const std::string name = p.get<std::string>();
      if (name == "electron") {
        c.charge = Constants::e_esu;
        c.mass = Constants::m_e_g;
      } else if (name == "muon") {
        c.charge = Constants::e_esu;
        c.mass = Constants::m_e_g * Constants::muon_electron_mass_ratio;
      } else {
        fail("classical.particle", "expected electron|muon or {charge, mass}");
      }
    } else {
      c.charge = number(require(p, "charge", "classical.particle."), "classical.particle.charge");
      c.mass = number(require(p, "mass", "classical.particle."), "classical.particle.mass");
      if (!(c.mass > 0.0)) fail("classical.particle.mass", "must be > 0");
      if (c.charge == 0.0) fail("classical.particle.charge", "must be non-zero");
    }
  }
  return c;
}

qevolve::Seeding parse_seeding(const std::string& s) {
  if (s == "continuum") return qevolve::Seeding::ContinuumStep;
  if (s == "retarded") return qevolve::Seeding::RetardedStep;
  if (s == "discrete") return qevolve::Seeding::DiscretePhase;
  fail("seeding", "expected continuum|retarded|discrete");
}

Eigen::Index system_dim(const SystemSpec& s) {
  return std::visit(
      [](const auto& v) -> Eigen::Index {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, system_spec::Literal>) return v.hamiltonian.rows();
        if constexpr (std::is_same_v<T, system_spec::TwoLevel>) return 2;
        if constexpr (std::is_same_v<T, system_spec::TruncatedOscillator>) return v.dim;
        if constexpr (std::is_same_v<T, system_spec::FreeGrid>) return v.dim;
      },
      s);
}

Eigen::Index initial_dim(const InitialSpec& s) {
  return std::visit(
      [](const auto& v) -> Eigen::Index {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, initial_spec::Amplitudes>) return v.amplitudes.size();
        if constexpr (std::is_same_v<T, initial_spec::Density>) return v.rho.rows();
        if constexpr (std::is_same_v<T, initial_spec::Measurement>) {
          return v.setup.object_amplitudes.size() * v.setup.classical_weights.size();
        }
      },
      s);
}

const std::set<std::string> kKnownKeys = {"command", "scheme", "system",   "initial",
                                          "classical", "steps", "stride",  "seeding",
                                          "track",   "output", "sweep"};

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Decohere:
      return "decohere";
    case Command::Schrodinger:
      return "schrodinger";
    case Command::Classical:
      return "classical";
    case Command::Sweep:
      return "sweep";
  }
  return "decohere";
}

Command parse_command(std::string_view name) {
  if (name == "decohere") return Command::Decohere;
  if (name == "schrodinger") return Command::Schrodinger;
  if (name == "classical") return Command::Classical;
  if (name == "sweep") return Command::Sweep;
  throw ValidationError("command", "unknown command '" + std::string(name) +
                                       "' (expected decohere|schrodinger|classical|sweep)");
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ValidationError("format", "expected csv|json");
}

RunConfig parse_config(std::string_view text_in) {
  json doc;
  try {
    doc = json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text_in.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text_in[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError("parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) fail("", "config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key())) fail(item.key(), "unknown key");
  }

  RunConfig cfg;
  cfg.command = parse_command(text(require(doc, "command", ""), "command"));

  if (doc.contains("scheme")) {
    const json& s = doc.at("scheme");
    if (!s.is_object()) fail("scheme", "must be an object");
    if (s.contains("variant")) cfg.variant = parse_variant(text(s.at("variant"), "scheme.variant"));
    if (s.contains("tau")) cfg.tau = number(s.at("tau"), "scheme.tau");
  }
  if (doc.contains("system")) cfg.system = parse_system(doc.at("system"));
  if (doc.contains("initial")) cfg.initial = parse_initial(doc.at("initial"));
  if (doc.contains("classical")) cfg.classical = parse_classical(doc.at("classical"));
  if (doc.contains("steps")) cfg.steps = integer(doc.at("steps"), "steps");
  if (doc.contains("stride")) cfg.stride = integer(doc.at("stride"), "stride");
  if (doc.contains("seeding")) cfg.seeding = parse_seeding(text(doc.at("seeding"), "seeding"));
  if (doc.contains("track")) {
    const json& t = doc.at("track");
    if (!t.is_array()) fail("track", "must be an array of [r, s] pairs");
    for (const auto& pair : t) {
      if (!pair.is_array() || pair.size() != 2) fail("track", "entries must be [r, s] pairs");
      cfg.track.emplace_back(static_cast<int>(integer(pair[0], "track")),
                             static_cast<int>(integer(pair[1], "track")));
    }
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (!o.is_object()) fail("output", "must be an object");
    if (o.contains("path")) cfg.output.path = text(o.at("path"), "output.path");
    if (o.contains("format")) cfg.output.format = parse_format(text(o.at("format"), "output.format"));
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    SweepSpec sw;
    sw.base = parse_command(text(require(s, "command", "sweep."), "sweep.command"));
    sw.parameter = text(require(s, "parameter", "sweep."), "sweep.parameter");
    const RealVector values = real_vector(require(s, "values", "sweep."), "sweep.values");
    sw.values.assign(values.data(), values.data() + values.size());
    cfg.sweep = std::move(sw);
  }
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.steps < 0) fail("steps", "must be >= 0");
  if (cfg.stride < 1) fail("stride", "must be >= 1");
  if (cfg.tau) require_positive_tau(*cfg.tau);

  if (cfg.command == Command::Sweep) {
    if (!cfg.sweep) fail("sweep", "is required for the sweep command");
    const SweepSpec& s = *cfg.sweep;
    if (s.base == Command::Sweep) fail("sweep.command", "cannot be sweep");
    if (s.values.empty()) fail("sweep.values", "must be non-empty");
    if (s.parameter == "tau") {
      for (double v : s.values) {
        if (!(v > 0.0)) fail("sweep.values", "tau values must be > 0");
      }
    } else if (s.parameter == "steps") {
      for (double v : s.values) {
        if (!(v >= 0.0) || v != std::floor(v)) fail("sweep.values", "steps must be integers >= 0");
      }
    } else if (s.parameter == "delta_e") {
      if (!cfg.system || !std::holds_alternative<system_spec::TwoLevel>(*cfg.system)) {
        fail("sweep.parameter", "delta_e sweeps need a two_level system");
      }
    } else {
      fail("sweep.parameter", "expected tau|steps|delta_e");
    }
    RunConfig base = cfg;
    base.command = s.base;
    base.sweep.reset();
    if (s.parameter == "tau") base.tau = s.values.front();
    validate(base);
    return;
  }
  if (cfg.sweep) fail("sweep", "only allowed with the sweep command");

  if (cfg.command == Command::Classical) {
    if (!cfg.classical) fail("classical", "is required for the classical command");
    if (cfg.system) fail("system", "not used by the classical command");
    if (cfg.initial) fail("initial", "not used by the classical command");
    return;
  }
  if (cfg.classical) fail("classical", "only used by the classical command");
  if (!cfg.tau) fail("scheme.tau", "is required");
  if (!cfg.system) fail("system", "exactly one system specification is required");
  if (!cfg.initial) fail("initial", "exactly one initial-state specification is required");
  const Eigen::Index n = system_dim(*cfg.system);
  if (initial_dim(*cfg.initial) != n) {
    fail("initial", "dimension " + std::to_string(initial_dim(*cfg.initial)) +
                        " does not match system dimension " + std::to_string(n));
  }
  if (cfg.command == Command::Schrodinger &&
      !std::holds_alternative<initial_spec::Amplitudes>(*cfg.initial)) {
    fail("initial", "schrodinger needs initial amplitudes");
  }
  if (cfg.command == Command::Decohere) {
    if (cfg.variant != Variant::Retarded) {
      fail("scheme.variant", "decohere evolves the retarded Liouville-von Neumann equation");
    }
    for (const auto& [r, s] : cfg.track) {
      if (r < 0 || s < 0 || r >= n || s >= n || r == s) {
        fail("track", "pairs must be distinct indices below the dimension");
      }
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.tau) cfg.tau = *o.tau;
  if (o.steps) cfg.steps = *o.steps;
  if (o.scheme) cfg.variant = *o.scheme;
  if (o.output) cfg.output.path = *o.output;
  if (o.format) cfg.output.format = *o.format;
  validate(cfg);
}

Matrix build_hamiltonian(const SystemSpec& spec) {
  return std::visit(
      [](const auto& v) -> Matrix {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, system_spec::Literal>) {
          return v.hamiltonian;
        } else if constexpr (std::is_same_v<T, system_spec::TwoLevel>) {
          Matrix h = Matrix::Zero(2, 2);
          h(1, 1) = v.delta_e;
          return h;
        } else if constexpr (std::is_same_v<T, system_spec::TruncatedOscillator>) {
          Matrix h = Matrix::Zero(v.dim, v.dim);
          for (int n = 0; n < v.dim; ++n) h(n, n) = v.hbar_omega * (n + 0.5);
          return h;
        } else {
          // hbar^2 / (2 m_e a^2) in eV
          const double hop = Constants::hbar_erg_s * Constants::hbar_eVs /
                             (2.0 * Constants::m_e_g * v.spacing_cm * v.spacing_cm);
          Matrix h = Matrix::Zero(v.dim, v.dim);
          for (int i = 0; i < v.dim; ++i) {
            h(i, i) = 2.0 * hop;
            if (i + 1 < v.dim) {
              h(i, i + 1) = -hop;
              h(i + 1, i) = -hop;
            }
          }
          return h;
        }
      },
      spec);
}

}  // namespace chronon::cli
