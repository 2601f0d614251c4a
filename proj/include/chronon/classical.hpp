#pragma once

// Classical finite-difference electron dynamics (Gaussian cgs): retarded,
// advanced and symmetric chronon equations in relativistic and
// non-relativistic form, plus the Abraham-Lorentz baseline.

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "chronon/physcore.hpp"

namespace chronon::classical {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct ParticleParams {
  double charge;  ///< esu
  double mass;    ///< g
  double tau0;    ///< s

  ParticleParams(double charge_esu, double mass_g, double tau0_s);

  /// Electron with tau0 = 2 theta_0.
  static ParticleParams electron();
};

/// Minkowski product with signature (-,+,+,+).
double minkowski(const Vec4& a, const Vec4& b);

/// Four-velocity u = (u^0, u^1, u^2, u^3), cm/s.
struct FourVelocity {
  Vec4 u = Vec4(Constants::c_cm_per_s, 0.0, 0.0, 0.0);

  /// Builds u on the mass shell from its spatial part.
  static FourVelocity from_spatial(const Vec3& w);
  static FourVelocity from_velocity(const Vec3& v);

  Vec3 spatial() const { return u.tail<3>(); }
  double lorentz_factor() const { return u(0) / Constants::c_cm_per_s; }
  /// Lab-frame velocity dx/dt.
  Vec3 velocity() const { return spatial() / lorentz_factor(); }
  /// |u.u + c^2| / c^2
  double shell_residual() const;
};

/// External field as functions of (lab time, position).
struct EMField {
  std::function<Vec3(double, const Vec3&)> E;
  std::function<Vec3(double, const Vec3&)> B;

  static EMField none();
  static EMField uniform(const Vec3& e, const Vec3& b);

  /// F_{mu nu} with F_{0i} = -E_i, F_{ij} = eps_{ijk} B_k (lower indices).
  Mat4 tensor(double t, const Vec3& x) const;
  /// F^mu_nu, so that dp^mu/dtau = (e/c) F^mu_nu u^nu.
  Mat4 mixed_tensor(double t, const Vec3& x) const;
};

/// Discrete worldline sample. For relativistic points `time` is proper time
/// n*tau0 and `lab_time` is x^0/c; otherwise both are the lab time.
struct WorldlinePoint {
  std::int64_t tick = 0;
  double time = 0.0;
  double lab_time = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  ///< lab velocity dx/dt
  std::optional<FourVelocity> four_velocity;

  bool relativistic() const { return four_velocity.has_value(); }
  double kinetic_energy(double mass) const;
};

enum class Transmission {
  Averaged,  ///< x(n) - x(n-1) = tau0/2 [u(n) + u(n-1)]
  Printed,   ///< x(n) - x(n-1) = tau0/2 [u(n) - u(n-1)], literal form
};

struct StepOptions {
  Transmission transmission = Transmission::Averaged;
  double tolerance = 1e-12;
  int max_iterations = 50;
};

/// Advances one tick. `previous` is required by the symmetric scheme.
WorldlinePoint step_nonrel(Variant scheme, const WorldlinePoint& current,
                           const WorldlinePoint* previous, const EMField& field,
                           const ParticleParams& params, const StepOptions& options = {});

WorldlinePoint step_rel(Variant scheme, const WorldlinePoint& current,
                        const WorldlinePoint* previous, const EMField& field,
                        const ParticleParams& params, const StepOptions& options = {});

namespace scenario {
struct FreeMotion {
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
};
struct UniformB {
  Vec3 B = Vec3::Zero();  ///< gauss
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
};
struct ConstantE {
  Vec3 E = Vec3::Zero();  ///< statvolt/cm
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
};
/// Restoring force -k x along `axis`, applied as an effective electric field.
struct ElasticLine {
  double spring_constant = 0.0;  ///< dyn/cm
  int axis = 0;
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
};
/// Spatially uniform half-sine electric pulse starting at tick `onset`.
struct EMPulse {
  std::int64_t onset = 0;
  std::int64_t duration = 1;  ///< ticks
  Vec3 amplitude = Vec3::Zero();
  Vec3 x0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();
};
}  // namespace scenario

using Scenario = std::variant<scenario::FreeMotion, scenario::UniformB, scenario::ConstantE,
                              scenario::ElasticLine, scenario::EMPulse>;

EMField field_for(const Scenario& s, const ParticleParams& params);

/// Worldline of steps+1 points. The symmetric scheme's second point comes
/// from one retarded step.
std::vector<WorldlinePoint> simulate(const Scenario& s, Variant scheme,
                                     const ParticleParams& params, std::int64_t steps,
                                     bool relativistic, const StepOptions& options = {});

struct InternalSolution {
  double beta0;
  double lorentz_factor;
  double kinetic_energy_ratio;
  /// max | |v(sample)| - beta0 c | / c over one period of the circular motion.
  double max_speed_deviation;
};

/// Circular internal motion whose rotational kinetic energy equals m0 c^2.
InternalSolution internal_solution_check(const ParticleParams& params, int samples = 64);

struct AnomalousMoment {
  double mu_a;           ///< erg/gauss
  double ratio_to_bohr;  ///< mu_a / (e hbar / 2 m c)
};

AnomalousMoment anomalous_moment(const ParticleParams& params);

struct ALState {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

/// One RK4 step of the Abraham-Lorentz equation written as a first-order
/// system in (r, v, a). dt is an integrator step, unrelated to the chronon.
ALState step_abraham_lorentz(const ALState& state, const EMField& field, double dt,
                             const ParticleParams& params);

/// Least-squares slope of ln|a| against time.
double runaway_rate(const std::vector<ALState>& worldline, double dt);

}  // namespace chronon::classical
