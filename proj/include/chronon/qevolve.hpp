#pragma once

// Finite-difference Schrodinger evolution with a chronon: retarded,
// symmetric and advanced schemes, implemented on the spectrum of a
// time-independent Hamiltonian.

#include <cstdint>
#include <vector>

#include "chronon/physcore.hpp"

namespace chronon::qevolve {

struct SchrodingerTrajectory {
  double tau = 0.0;
  std::vector<std::int64_t> steps;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> norms_sq;
};

/// Retarded-scheme norm decay rates gamma_n = ln(1 + tau^2 W_n^2/hbar^2)/tau,
/// together with their leading-order value W_n^2 tau / hbar^2.
struct DecayRates {
  RealVector gamma_n;
  RealVector leading_order;
};

/// Symmetric-scheme discrete frequencies alpha_n = asin(W_n tau/hbar)/tau.
/// Entries with |W_n tau/hbar| > 1 are flagged invalid and set to NaN.
struct DiscreteFrequencies {
  RealVector alpha_n;
  std::vector<bool> valid;
  /// alpha_n - W_n/hbar (NaN where invalid)
  RealVector shift;
};

/// How the second level of the symmetric three-term recurrence is produced.
enum class Seeding {
  ContinuumStep,  ///< psi(tau) = exp(-i H tau/hbar) psi(0)
  RetardedStep,   ///< one retarded step
  DiscretePhase,  ///< c_n -> c_n exp(-i alpha_n tau); requires |W_n tau/hbar| <= 1
};

/// Dimensionless per-mode step parameter x_n = W_n tau / hbar.
RealVector step_parameters(const SpectralSystem& sys, double tau);

/// psi(t) from psi(t - tau): c_n -> c_n / (1 + i tau W_n/hbar).
StateVector step_retarded(const StateVector& psi, const SpectralSystem& sys, double tau);

/// psi(t + tau) from psi(t): c_n -> c_n (1 - i tau W_n/hbar).
StateVector step_advanced(const StateVector& psi, const SpectralSystem& sys, double tau);

/// psi(t + tau) = psi(t - tau) - (2 i tau/hbar) H psi(t).
StateVector step_symmetric(const StateVector& psi_prev, const StateVector& psi_curr,
                           const SpectralSystem& sys, double tau);

/// Trajectory at t = k tau, k = 0..steps. With stride > 1 only every
/// stride-th step (and the last one) is recorded.
SchrodingerTrajectory evolve(const ChrononScheme& scheme, const StateVector& psi0,
                             const SpectralSystem& sys, std::int64_t steps,
                             Seeding seeding = Seeding::ContinuumStep, std::int64_t stride = 1);

DecayRates retarded_decay_rates(const SpectralSystem& sys, double tau);

DiscreteFrequencies symmetric_frequencies(const SpectralSystem& sys, double tau);

/// Exact continuum propagation exp(-i H t/hbar) psi0.
StateVector continuum_state(const StateVector& psi0, const SpectralSystem& sys, double t);

/// Max-norm difference between the discrete trajectory at t_final and the
/// continuum evolution. t_final must be an integer multiple of tau.
double continuum_error(const StateVector& psi0, const SpectralSystem& sys, double tau,
                       double t_final, Variant variant = Variant::Retarded,
                       Seeding seeding = Seeding::ContinuumStep);

/// Returns k = t/tau when t is an integer multiple of tau (relative 1e-9),
/// otherwise throws ValidationError naming `field`.
std::int64_t steps_for(double t, double tau, const char* field = "t_final");

}  // namespace chronon::qevolve
