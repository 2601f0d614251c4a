#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chronon/classical.hpp"
#include "chronon/decohere.hpp"
#include "chronon/physcore.hpp"
#include "chronon/qevolve.hpp"
#include "chronon/runner.hpp"

namespace py = pybind11;
using namespace chronon;

namespace {

// Scenario objects are passed from Python as (kind, dict) so callers don't
// need a class per scenario.
classical::Vec3 vec3(const py::dict& d, const char* key) {
  if (!d.contains(key)) return classical::Vec3::Zero();
  return d[key].cast<classical::Vec3>();
}

classical::Scenario make_scenario(const std::string& kind, const py::dict& d) {
  namespace sc = classical::scenario;
  if (kind == "free_motion") return sc::FreeMotion{vec3(d, "x0"), vec3(d, "v0")};
  if (kind == "uniform_b") return sc::UniformB{vec3(d, "B"), vec3(d, "x0"), vec3(d, "v0")};
  if (kind == "constant_e") return sc::ConstantE{vec3(d, "E"), vec3(d, "x0"), vec3(d, "v0")};
  if (kind == "elastic_line") {
    return sc::ElasticLine{d["spring_constant"].cast<double>(),
                           d.contains("axis") ? d["axis"].cast<int>() : 0, vec3(d, "x0"),
                           vec3(d, "v0")};
  }
  if (kind == "em_pulse") {
    return sc::EMPulse{d["onset"].cast<std::int64_t>(), d["duration"].cast<std::int64_t>(),
                       vec3(d, "amplitude"), vec3(d, "x0"), vec3(d, "v0")};
  }
  throw ValidationError("scenario", "unknown scenario '" + kind + "'");
}

py::object json_to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-difference chronon dynamics";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::enum_<Variant>(m, "Variant")
      .value("retarded", Variant::Retarded)
      .value("symmetric", Variant::Symmetric)
      .value("advanced", Variant::Advanced);
  py::enum_<qevolve::Seeding>(m, "Seeding")
      .value("continuum", qevolve::Seeding::ContinuumStep)
      .value("retarded", qevolve::Seeding::RetardedStep)
      .value("discrete", qevolve::Seeding::DiscretePhase);

  auto consts = m.def_submodule("constants");
  consts.attr("hbar_eVs") = Constants::hbar_eVs;
  consts.attr("hbar_erg_s") = Constants::hbar_erg_s;
  consts.attr("c") = Constants::c_cm_per_s;
  consts.attr("e_esu") = Constants::e_esu;
  consts.attr("m_e") = Constants::m_e_g;
  consts.attr("alpha") = Constants::alpha;

  m.def("chronon_of", &chronon_of, py::arg("charge_esu"), py::arg("mass_g"),
        py::arg("full_chronon") = false);

  py::class_<SpectralSystem>(m, "SpectralSystem")
      .def_property_readonly("dim", &SpectralSystem::dim)
      .def_property_readonly("hamiltonian", &SpectralSystem::hamiltonian)
      .def_property_readonly("eigenvalues", &SpectralSystem::eigenvalues)
      .def_property_readonly("eigenvectors", &SpectralSystem::eigenvectors)
      .def("reconstruct", &SpectralSystem::reconstruct);
  m.def("spectral_decompose", &spectral_decompose, py::arg("hamiltonian"));

  // qevolve works on StateVector internally; Python sees plain arrays.
  auto q = m.def_submodule("qevolve");
  q.def(
      "step",
      [](Variant v, const Vector& psi, const SpectralSystem& sys, double tau,
         std::optional<Vector> prev) -> Vector {
        const StateVector cur(psi);
        switch (v) {
          case Variant::Retarded: return qevolve::step_retarded(cur, sys, tau).amplitudes();
          case Variant::Advanced: return qevolve::step_advanced(cur, sys, tau).amplitudes();
          case Variant::Symmetric:
            if (!prev) throw ValidationError("prev", "symmetric step needs the previous state");
            return qevolve::step_symmetric(StateVector(*prev), cur, sys, tau).amplitudes();
        }
        throw ValidationError("variant", "unknown variant");
      },
      py::arg("variant"), py::arg("psi"), py::arg("system"), py::arg("tau"),
      py::arg("prev") = py::none());
  q.def(
      "evolve",
      [](Variant v, double tau, const Vector& psi0, const SpectralSystem& sys, std::int64_t steps,
         qevolve::Seeding seeding, std::int64_t stride) {
        const auto traj = qevolve::evolve(ChrononScheme(v, tau), StateVector(psi0), sys, steps,
                                          seeding, stride);
        Matrix states(static_cast<Eigen::Index>(traj.states.size()), sys.dim());
        for (std::size_t i = 0; i < traj.states.size(); ++i) {
          states.row(static_cast<Eigen::Index>(i)) = traj.states[i].amplitudes().transpose();
        }
        py::dict out;
        out["steps"] = traj.steps;
        out["times"] = traj.times;
        out["states"] = states;
        out["norms_sq"] = traj.norms_sq;
        return out;
      },
      py::arg("variant"), py::arg("tau"), py::arg("psi0"), py::arg("system"), py::arg("steps"),
      py::arg("seeding") = qevolve::Seeding::ContinuumStep, py::arg("stride") = 1);
  q.def(
      "retarded_decay_rates",
      [](const SpectralSystem& sys, double tau) {
        const auto r = qevolve::retarded_decay_rates(sys, tau);
        return py::make_tuple(r.gamma_n, r.leading_order);
      },
      py::arg("system"), py::arg("tau"));
  q.def(
      "symmetric_frequencies",
      [](const SpectralSystem& sys, double tau) {
        const auto f = qevolve::symmetric_frequencies(sys, tau);
        return py::make_tuple(f.alpha_n, f.valid, f.shift);
      },
      py::arg("system"), py::arg("tau"));
  q.def(
      "continuum_error",
      [](const Vector& psi0, const SpectralSystem& sys, double tau, double t_final, Variant v,
         qevolve::Seeding seeding) {
        return qevolve::continuum_error(StateVector(psi0), sys, tau, t_final, v, seeding);
      },
      py::arg("psi0"), py::arg("system"), py::arg("tau"), py::arg("t_final"),
      py::arg("variant") = Variant::Retarded, py::arg("seeding") = qevolve::Seeding::ContinuumStep);

  auto d = m.def_submodule("decohere");
  d.def("decay_rate", &decohere::decay_rate, py::arg("omega"), py::arg("tau"));
  d.def("oscillation_frequency", &decohere::oscillation_frequency, py::arg("omega"),
        py::arg("tau"));
  d.def("evolution_factor", &decohere::evolution_factor, py::arg("omega"), py::arg("tau"),
        py::arg("k"));
  d.def("first_order_decay", &decohere::first_order_decay, py::arg("omega"), py::arg("tau"),
        py::arg("t"));
  d.def("coherence_half_time", &decohere::coherence_half_time, py::arg("omega"), py::arg("tau"));
  d.def("symmetric_multipliers", &decohere::symmetric_multipliers, py::arg("omega_tau"));
  d.def(
      "semigroup_check",
      [](const RealVector& energies, double tau, std::int64_t k, std::int64_t mm) {
        return decohere::semigroup_check(decohere::TransitionFrequencies::from_energies(energies),
                                         tau, k, mm);
      },
      py::arg("energies"), py::arg("tau"), py::arg("k"), py::arg("m"));
  d.def(
      "lvn_step",
      [](const Matrix& rho, const RealVector& energies, double tau) -> Matrix {
        return decohere::lvn_step_retarded(DensityMatrix::unchecked(rho, BasisTag::Energy),
                                           decohere::TransitionFrequencies::from_energies(energies),
                                           tau)
            .rho();
      },
      py::arg("rho"), py::arg("energies"), py::arg("tau"));
  d.def(
      "build_measurement_state",
      [](const Vector& amplitudes, const RealVector& weights, const RealVector& labels) -> Matrix {
        return decohere::build_measurement_state({amplitudes, weights, labels}).rho();
      },
      py::arg("amplitudes"), py::arg("weights"), py::arg("pointer_labels"));
  d.def(
      "evolve_density",
      [](const Matrix& rho0, const SpectralSystem& sys, double tau, std::int64_t steps,
         std::int64_t stride, bool keep_states) {
        const auto p = decohere::evolve_density(DensityMatrix(rho0), sys, tau, steps,
                                                {stride, keep_states});
        py::dict out;
        out["steps"] = p.steps;
        out["times"] = p.times;
        out["offdiag_norm"] = p.offdiag_norm;
        out["diagonal"] = p.diagonal;
        out["trace"] = p.trace;
        out["min_eigenvalue"] = p.min_eigenvalue;
        if (keep_states) out["states"] = p.states;
        return out;
      },
      py::arg("rho0"), py::arg("system"), py::arg("tau"), py::arg("steps"), py::arg("stride") = 1,
      py::arg("keep_states") = false);

  auto c = m.def_submodule("classical");
  py::class_<classical::ParticleParams>(c, "ParticleParams")
      .def(py::init<double, double, double>(), py::arg("charge"), py::arg("mass"),
           py::arg("tau0"))
      .def_static("electron", &classical::ParticleParams::electron)
      .def_readonly("charge", &classical::ParticleParams::charge)
      .def_readonly("mass", &classical::ParticleParams::mass)
      .def_readonly("tau0", &classical::ParticleParams::tau0);
  c.def(
      "simulate",
      [](const std::string& kind, const py::dict& params, Variant v, std::int64_t steps,
         bool relativistic, std::optional<classical::ParticleParams> particle) {
        const auto pp = particle.value_or(classical::ParticleParams::electron());
        const auto line =
            classical::simulate(make_scenario(kind, params), v, pp, steps, relativistic);
        const auto n = static_cast<Eigen::Index>(line.size());
        RealVector time(n), lab_time(n), ke(n);
        RealMatrix pos(n, 3), vel(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& p = line[static_cast<std::size_t>(i)];
          time(i) = p.time;
          lab_time(i) = p.lab_time;
          pos.row(i) = p.position.transpose();
          vel.row(i) = p.velocity.transpose();
          ke(i) = p.kinetic_energy(pp.mass);
        }
        py::dict out;
        out["time"] = time;
        out["lab_time"] = lab_time;
        out["position"] = pos;
        out["velocity"] = vel;
        out["kinetic_energy"] = ke;
        return out;
      },
      py::arg("scenario"), py::arg("params"), py::arg("variant"), py::arg("steps"),
      py::arg("relativistic") = false, py::arg("particle") = py::none());
  c.def(
      "internal_solution_check",
      [](std::optional<classical::ParticleParams> particle) {
        const auto s = classical::internal_solution_check(
            particle.value_or(classical::ParticleParams::electron()));
        py::dict out;
        out["beta0"] = s.beta0;
        out["lorentz_factor"] = s.lorentz_factor;
        out["kinetic_energy_ratio"] = s.kinetic_energy_ratio;
        out["max_speed_deviation"] = s.max_speed_deviation;
        return out;
      },
      py::arg("particle") = py::none());
  c.def(
      "anomalous_moment",
      [](std::optional<classical::ParticleParams> particle) {
        const auto a =
            classical::anomalous_moment(particle.value_or(classical::ParticleParams::electron()));
        return py::make_tuple(a.mu_a, a.ratio_to_bohr);
      },
      py::arg("particle") = py::none());

  m.def(
      "run_config",
      [](const std::string& text) {
        const auto result = cli::execute(cli::parse_config(text));
        py::dict out;
        out["table"] = json_to_py(cli::to_json(result.table));
        out["summary"] = json_to_py(result.summary);
        return out;
      },
      py::arg("config_json"),
      "Parses a JSON run config and executes it in memory (no files written).");
}
