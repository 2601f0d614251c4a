#pragma once

// Retarded (and, for contrast, symmetric) finite-difference Liouville-von
// Neumann evolution in the energy basis, its decay/phase rates, and the
// pointer-basis measurement state.

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "chronon/physcore.hpp"
#include "chronon/qevolve.hpp"

namespace chronon::decohere {

/// Bohr frequencies omega[r][s] = (E_r - E_s)/hbar in rad/s.
class TransitionFrequencies {
 public:
  static TransitionFrequencies from_energies(const RealVector& energies_eV);
  static TransitionFrequencies from_system(const SpectralSystem& sys);
  /// Validates exact antisymmetry.
  static TransitionFrequencies from_matrix(RealMatrix omega);

  const RealMatrix& omega() const noexcept { return omega_; }
  Eigen::Index dim() const noexcept { return omega_.rows(); }
  double operator()(Eigen::Index r, Eigen::Index s) const { return omega_(r, s); }

 private:
  explicit TransitionFrequencies(RealMatrix omega) : omega_(std::move(omega)) {}
  RealMatrix omega_;
};

struct DecoherenceRates {
  RealMatrix gamma;  ///< symmetric, >= 0, zero diagonal (1/s)
  RealMatrix nu;     ///< antisymmetric (rad/s)
};

struct ReductionProfile {
  double tau = 0.0;
  std::vector<std::int64_t> steps;
  std::vector<double> times;
  std::vector<double> offdiag_norm;
  std::vector<RealVector> diagonal;
  std::vector<double> trace;
  std::vector<double> min_eigenvalue;
  /// Energy-basis matrices, filled only when requested.
  std::vector<Matrix> states;
};

/// c_r for the measured object, classical weights C_M over apparatus
/// branches, and pointer readings alpha_r (one per r).
struct MeasurementSetup {
  Vector object_amplitudes;
  RealVector classical_weights;
  RealVector pointer_labels;

  void validate() const;
};

// Single-element updates, generic over the real type so the recurrence can
// be iterated in extended precision.

/// rho_rs(t) = rho_rs(t - tau) / (1 + i omega tau)
template <typename Real>
std::complex<Real> retarded_update(const std::complex<Real>& rho_rs, Real omega_tau) {
  const Real denom = Real(1) + omega_tau * omega_tau;
  const std::complex<Real> factor(Real(1) / denom, -omega_tau / denom);
  return rho_rs * factor;
}

/// rho_rs(t + tau) = rho_rs(t - tau) - 2 i omega tau rho_rs(t)
template <typename Real>
std::complex<Real> symmetric_update(const std::complex<Real>& prev,
                                    const std::complex<Real>& curr, Real omega_tau) {
  return prev - std::complex<Real>(Real(0), Real(2) * omega_tau) * curr;
}

DensityMatrix lvn_step_retarded(const DensityMatrix& rho, const TransitionFrequencies& omega,
                                double tau);

DensityMatrix lvn_step_symmetric(const DensityMatrix& rho_prev, const DensityMatrix& rho_curr,
                                 const TransitionFrequencies& omega, double tau);

/// (1 + i omega tau)^(-k) = exp(-gamma k tau) exp(-i nu k tau)
cplx evolution_factor(double omega_rs, double tau, std::int64_t k);

/// gamma = ln(1 + omega^2 tau^2) / (2 tau)
double decay_rate(double omega_rs, double tau);

/// nu = atan(omega tau) / tau
double oscillation_frequency(double omega_rs, double tau);

/// exp(-omega^2 tau t / 2), the small omega*tau limit of |evolution_factor|.
double first_order_decay(double omega_nm, double tau, double t);

DecoherenceRates decoherence_rates(const TransitionFrequencies& omega, double tau);

/// ln 2 / gamma; std::nullopt when the coherence never decays (omega = 0).
std::optional<double> coherence_half_time(double omega_rs, double tau);

/// Elementwise factor matrix V(k tau) acting on energy-basis rho.
Matrix factor_matrix(const TransitionFrequencies& omega, double tau, std::int64_t k);

/// Closed-form retarded state at t = k tau, in the energy basis.
DensityMatrix density_at(const DensityMatrix& rho0_energy, const TransitionFrequencies& omega,
                         double tau, std::int64_t k);

struct EvolveOptions {
  std::int64_t stride = 1;  ///< record every stride-th step (and always the last)
  bool keep_states = false;
};

/// Transforms rho0 to the energy basis, applies the closed-form factors at
/// each recorded step and records the reduction profile (energy basis).
ReductionProfile evolve_density(const DensityMatrix& rho0, const SpectralSystem& sys, double tau,
                                std::int64_t steps, const EvolveOptions& options = {});

/// max |V(k tau) o V(m tau) - V((k+m) tau)| over all entries.
double semigroup_check(const TransitionFrequencies& omega, double tau, std::int64_t k,
                       std::int64_t m);

/// Roots of lambda^2 + 2 i omega tau lambda - 1 = 0, the characteristic
/// multipliers of the symmetric recurrence.
std::pair<cplx, cplx> symmetric_multipliers(double omega_tau);

/// Post-interaction state sum_M C_M sum_{r1,r2} c*_{r1} c_{r2} |r1,M><r2,M|.
/// Basis index is M * R + r, so branches form diagonal blocks.
DensityMatrix build_measurement_state(const MeasurementSetup& setup);

/// rho(t) = |psi(t)><psi(t)| without renormalization, in the trajectory's basis.
ReductionProfile schrodinger_induced_density(const qevolve::SchrodingerTrajectory& traj,
                                             bool keep_states = false);
/// Same, with the states first rotated to the energy basis of sys.
ReductionProfile schrodinger_induced_density(const qevolve::SchrodingerTrajectory& traj,
                                             const SpectralSystem& sys, bool keep_states = false);

/// Frobenius norm of the off-diagonal part.
double offdiag_frobenius(const Matrix& rho);

}  // namespace chronon::decohere
