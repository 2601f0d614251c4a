#include "chronon/runner.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>

namespace chronon::cli {

namespace {

using nlohmann::ordered_json;

ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json real_array(const RealVector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

DensityMatrix initial_density(const InitialSpec& spec, const SpectralSystem& sys) {
  return std::visit(
      [&](const auto& v) -> DensityMatrix {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, initial_spec::Amplitudes>) {
          return DensityMatrix(v.amplitudes * v.amplitudes.adjoint());
        } else if constexpr (std::is_same_v<T, initial_spec::Density>) {
          return DensityMatrix(v.rho);
        } else {
          // The pointer basis is the energy basis of the system.
          return from_energy_basis(decohere::build_measurement_state(v.setup), sys);
        }
      },
      spec);
}

std::vector<std::pair<int, int>> tracked_pairs(const RunConfig& cfg, Eigen::Index dim) {
  if (!cfg.track.empty()) return cfg.track;
  std::vector<std::pair<int, int>> pairs;
  for (int r = 0; r < dim; ++r) {
    for (int s = r + 1; s < dim; ++s) pairs.emplace_back(r, s);
  }
  return pairs;
}

CommandResult run_decohere(const RunConfig& cfg) {
  const double tau = *cfg.tau;
  const SpectralSystem sys = spectral_decompose(build_hamiltonian(*cfg.system));
  const DensityMatrix rho0 = initial_density(*cfg.initial, sys);
  const auto profile =
      decohere::evolve_density(rho0, sys, tau, cfg.steps, {cfg.stride, /*keep_states=*/true});
  const auto pairs = tracked_pairs(cfg, sys.dim());

  CommandResult out;
  Table& t = out.table;
  t.header = {"k", "t_seconds"};
  for (const auto& [r, s] : pairs) {
    const std::string tag = "rho_" + std::to_string(r) + "_" + std::to_string(s);
    t.header.push_back(tag + "_re");
    t.header.push_back(tag + "_im");
    t.header.push_back(tag + "_abs");
  }
  t.header.insert(t.header.end(), {"offdiag_frobenius", "trace_re", "min_eigenvalue"});
  for (std::size_t i = 0; i < profile.steps.size(); ++i) {
    std::vector<Cell> row{profile.steps[i], profile.times[i]};
    const Matrix& rho = profile.states[i];
    for (const auto& [r, s] : pairs) {
      const cplx v = rho(r, s);
      row.insert(row.end(), {v.real(), v.imag(), std::abs(v)});
    }
    row.insert(row.end(),
               {profile.offdiag_norm[i], profile.trace[i], profile.min_eigenvalue[i]});
    t.rows.push_back(std::move(row));
  }

  const auto omega = decohere::TransitionFrequencies::from_system(sys);
  ordered_json summary;
  summary["command"] = "decohere";
  summary["tau"] = tau;
  summary["steps"] = cfg.steps;
  summary["dimension"] = sys.dim();
  summary["energies_eV"] = real_array(sys.eigenvalues());
  summary["pairs"] = ordered_json::array();
  for (const auto& [r, s] : pairs) {
    const double w = omega(r, s);
    const auto half = decohere::coherence_half_time(w, tau);
    ordered_json p;
    p["r"] = r;
    p["s"] = s;
    p["omega"] = w;
    p["gamma"] = decohere::decay_rate(w, tau);
    p["gamma_first_order"] = w * w * tau / 2.0;
    p["nu"] = decohere::oscillation_frequency(w, tau);
    p["half_time"] = half ? ordered_json(*half) : ordered_json(nullptr);
    summary["pairs"].push_back(std::move(p));
  }
  out.summary = std::move(summary);
  return out;
}

CommandResult run_schrodinger(const RunConfig& cfg) {
  const double tau = *cfg.tau;
  const SpectralSystem sys = spectral_decompose(build_hamiltonian(*cfg.system));
  const auto& amps = std::get<initial_spec::Amplitudes>(*cfg.initial).amplitudes;
  const StateVector psi0(amps);
  const auto traj =
      qevolve::evolve(ChrononScheme(cfg.variant, tau), psi0, sys, cfg.steps, cfg.seeding,
                      cfg.stride);

  CommandResult out;
  Table& t = out.table;
  t.header = {"k", "t_seconds"};
  for (Eigen::Index n = 0; n < psi0.dim(); ++n) {
    t.header.push_back("re_" + std::to_string(n));
    t.header.push_back("im_" + std::to_string(n));
  }
  t.header.push_back("norm_sq");
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    std::vector<Cell> row{traj.steps[i], traj.times[i]};
    const Vector& a = traj.states[i].amplitudes();
    for (Eigen::Index n = 0; n < a.size(); ++n) row.insert(row.end(), {a(n).real(), a(n).imag()});
    row.push_back(traj.norms_sq[i]);
    t.rows.push_back(std::move(row));
  }

  const auto rates = qevolve::retarded_decay_rates(sys, tau);
  const auto freqs = qevolve::symmetric_frequencies(sys, tau);
  ordered_json summary;
  summary["command"] = "schrodinger";
  summary["scheme"] = std::string(to_string(cfg.variant));
  summary["tau"] = tau;
  summary["steps"] = cfg.steps;
  summary["energies_eV"] = real_array(sys.eigenvalues());
  summary["retarded_gamma"] = real_array(rates.gamma_n);
  summary["retarded_gamma_leading_order"] = real_array(rates.leading_order);
  summary["symmetric_alpha"] = real_array(freqs.alpha_n);
  summary["symmetric_frequency_shift"] = real_array(freqs.shift);
  summary["final_norm_sq"] = traj.norms_sq.back();
  out.summary = std::move(summary);
  return out;
}

CommandResult run_classical(const RunConfig& cfg) {
  const ClassicalSpec& spec = *cfg.classical;
  const double tau0 = cfg.tau ? *cfg.tau : chronon_of(spec.charge, spec.mass, true);
  const classical::ParticleParams params(spec.charge, spec.mass, tau0);
  classical::StepOptions options;
  options.transmission = spec.transmission;
  const auto line =
      classical::simulate(spec.scenario, cfg.variant, params, cfg.steps, spec.relativistic, options);

  CommandResult out;
  Table& t = out.table;
  t.header = {"tick", "t_seconds", "x", "y", "z", "vx", "vy", "vz", "kinetic_energy"};
  double max_shell = 0.0;
  for (const auto& p : line) {
    if (p.four_velocity) max_shell = std::max(max_shell, p.four_velocity->shell_residual());
    if (p.tick % cfg.stride != 0 && p.tick != cfg.steps) continue;
    t.rows.push_back({p.tick, p.lab_time, p.position.x(), p.position.y(), p.position.z(),
                      p.velocity.x(), p.velocity.y(), p.velocity.z(),
                      p.kinetic_energy(params.mass)});
  }

  ordered_json summary;
  summary["command"] = "classical";
  summary["scheme"] = std::string(to_string(cfg.variant));
  summary["relativistic"] = spec.relativistic;
  summary["transmission"] =
      spec.transmission == classical::Transmission::Averaged ? "averaged" : "printed";
  summary["tau0"] = tau0;
  summary["theta0"] = chronon_of(spec.charge, spec.mass);
  summary["steps"] = cfg.steps;
  if (spec.relativistic) summary["max_mass_shell_residual"] = max_shell;
  out.summary = std::move(summary);
  return out;
}

RunConfig sweep_point(const RunConfig& cfg, double value) {
  RunConfig point = cfg;
  point.command = cfg.sweep->base;
  point.sweep.reset();
  const std::string& name = cfg.sweep->parameter;
  if (name == "tau") {
    point.tau = value;
  } else if (name == "steps") {
    point.steps = static_cast<std::int64_t>(value);
  } else {
    std::get<system_spec::TwoLevel>(*point.system).delta_e = value;
  }
  validate(point);
  return point;
}

std::filesystem::path indexed_path(const std::filesystem::path& p, std::size_t index) {
  std::filesystem::path out = p.parent_path() / p.stem();
  out += "_" + std::to_string(index);
  out += p.extension();
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string render(const Table& table, Format format) {
  if (format == Format::Csv) return to_csv(table);
  return to_json(table).dump(2) + "\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* k = std::get_if<std::int64_t>(&row[i])) {
        out += std::to_string(*k);
      } else {
        out += format_double(std::get<double>(row[i]));
      }
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const Table& table) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i) {
      std::visit([&](auto v) { obj[table.header[i]] = v; }, row[i]);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

CommandResult execute(const RunConfig& config) {
  validate(config);
  switch (config.command) {
    case Command::Decohere:
      return run_decohere(config);
    case Command::Schrodinger:
      return run_schrodinger(config);
    case Command::Classical:
      return run_classical(config);
    case Command::Sweep:
      break;
  }
  throw ValidationError("command", "sweep configs are executed through run()");
}

std::filesystem::path summary_path(const std::filesystem::path& output) {
  std::filesystem::path p = output.parent_path() / output.stem();
  p += ".summary.json";
  return p;
}

RunReport run(const RunConfig& config) {
  validate(config);
  if (config.output.path.empty()) throw ValidationError("output.path", "is required");
  RunReport report;
  const Format format = config.output.format;

  if (config.command != Command::Sweep) {
    const CommandResult result = execute(config);
    write_text(config.output.path, render(result.table, format));
    report.written.push_back(config.output.path);
    const auto sp = summary_path(config.output.path);
    write_text(sp, result.summary.dump(2) + "\n");
    report.written.push_back(sp);
    return report;
  }

  const SweepSpec& sweep = *config.sweep;
  std::vector<RunConfig> points;
  points.reserve(sweep.values.size());
  for (double v : sweep.values) points.push_back(sweep_point(config, v));

  std::vector<std::future<CommandResult>> futures;
  futures.reserve(points.size());
  for (const auto& p : points) {
    futures.push_back(std::async(std::launch::async, [&p] { return execute(p); }));
  }
  std::vector<CommandResult> results;
  results.reserve(futures.size());
  for (auto& f : futures) results.push_back(f.get());

  ordered_json combined;
  combined["command"] = "sweep";
  combined["base"] = std::string(to_string(sweep.base));
  combined["parameter"] = sweep.parameter;
  combined["points"] = ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto path = indexed_path(config.output.path, i);
    write_text(path, render(results[i].table, format));
    report.written.push_back(path);
    ordered_json entry;
    entry["index"] = i;
    entry["value"] = sweep.values[i];
    entry["output"] = path.filename().string();
    entry["summary"] = std::move(results[i].summary);
    combined["points"].push_back(std::move(entry));
  }
  const auto sp = summary_path(config.output.path);
  write_text(sp, combined.dump(2) + "\n");
  report.written.push_back(sp);
  return report;
}

}  // namespace chronon::cli
