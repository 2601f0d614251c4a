#include "chronon/qevolve.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace chronon::qevolve {

namespace {

constexpr cplx I{0.0, 1.0};

void check_inputs(const StateVector& psi, const SpectralSystem& sys, double tau) {
  require_same_dim(sys.dim(), psi.dim(), "state");
  require_positive_tau(tau);
}

// (1 + i x)^(-k) for the retarded scheme, (1 - i x)^k for the advanced one,
// evaluated in log-polar form so large k neither drifts nor overflows early.
cplx power_factor(Variant variant, double x, std::int64_t k) {
  const double kk = static_cast<double>(k);
  const double log_mod = 0.5 * std::log1p(x * x) * kk;
  const double phase = -std::atan(x) * kk;
  const double mod = variant == Variant::Retarded ? std::exp(-log_mod) : std::exp(log_mod);
  return std::polar(mod, phase);
}

Vector seed_second_level(const Vector& c0, const RealVector& x, Seeding seeding) {
  Vector c1(c0.size());
  for (Eigen::Index n = 0; n < c0.size(); ++n) {
    switch (seeding) {
      case Seeding::ContinuumStep:
        c1(n) = c0(n) * std::polar(1.0, -x(n));
        break;
      case Seeding::RetardedStep:
        c1(n) = c0(n) / (1.0 + I * x(n));
        break;
      case Seeding::DiscretePhase:
        if (std::abs(x(n)) > 1.0) {
          throw ValidationError("seeding", "discrete phase undefined for |W tau/hbar| > 1 (mode " +
                                               std::to_string(n) + ")");
        }
        c1(n) = c0(n) * std::polar(1.0, -std::asin(x(n)));
        break;
    }
  }
  return c1;
}

// Energy-basis coefficients after k steps, without storing intermediates.
Vector coefficients_at(Variant variant, const Vector& c0, const RealVector& x, std::int64_t k,
                       Seeding seeding) {
  if (k == 0) return c0;
  if (variant != Variant::Symmetric) {
    Vector c(c0.size());
    for (Eigen::Index n = 0; n < c0.size(); ++n) c(n) = c0(n) * power_factor(variant, x(n), k);
    return c;
  }
  Vector prev = c0;
  Vector curr = seed_second_level(c0, x, seeding);
  for (std::int64_t j = 1; j < k; ++j) {
    Vector next = prev - 2.0 * I * x.cast<cplx>().cwiseProduct(curr);
    prev = std::move(curr);
    curr = std::move(next);
  }
  return curr;
}

}  // namespace

RealVector step_parameters(const SpectralSystem& sys, double tau) {
  return sys.eigenvalues() * (tau / Constants::hbar_eVs);
}

StateVector step_retarded(const StateVector& psi, const SpectralSystem& sys, double tau) {
  check_inputs(psi, sys, tau);
  const RealVector x = step_parameters(sys, tau);
  Vector c = sys.to_energy(psi.amplitudes());
  for (Eigen::Index n = 0; n < c.size(); ++n) c(n) /= (1.0 + I * x(n));
  return StateVector(sys.from_energy(c), psi.basis());
}

StateVector step_advanced(const StateVector& psi, const SpectralSystem& sys, double tau) {
  check_inputs(psi, sys, tau);
  const RealVector x = step_parameters(sys, tau);
  Vector c = sys.to_energy(psi.amplitudes());
  for (Eigen::Index n = 0; n < c.size(); ++n) c(n) *= (1.0 - I * x(n));
  return StateVector(sys.from_energy(c), psi.basis());
}

StateVector step_symmetric(const StateVector& psi_prev, const StateVector& psi_curr,
                           const SpectralSystem& sys, double tau) {
  check_inputs(psi_prev, sys, tau);
  require_same_dim(sys.dim(), psi_curr.dim(), "state");
  const RealVector x = step_parameters(sys, tau);
  const Vector cp = sys.to_energy(psi_prev.amplitudes());
  const Vector cc = sys.to_energy(psi_curr.amplitudes());
  const Vector cn = cp - 2.0 * I * x.cast<cplx>().cwiseProduct(cc);
  return StateVector(sys.from_energy(cn), psi_curr.basis());
}

SchrodingerTrajectory evolve(const ChrononScheme& scheme, const StateVector& psi0,
                             const SpectralSystem& sys, std::int64_t steps, Seeding seeding,
                             std::int64_t stride) {
  check_inputs(psi0, sys, scheme.tau());
  if (steps < 0) throw ValidationError("steps", "must be >= 0");
  if (stride < 1) throw ValidationError("stride", "must be >= 1");

  const double tau = scheme.tau();
  const RealVector x = step_parameters(sys, tau);
  const Vector c0 = sys.to_energy(psi0.amplitudes());

  SchrodingerTrajectory traj;
  traj.tau = tau;
  const auto n = static_cast<std::size_t>(steps / stride) + 2;
  traj.steps.reserve(n);
  traj.times.reserve(n);
  traj.states.reserve(n);
  traj.norms_sq.reserve(n);

  auto recorded = [&](std::int64_t k) { return k % stride == 0 || k == steps; };
  auto push = [&](std::int64_t k, Vector amplitudes) {
    if (!amplitudes.allFinite()) {
      throw SimulationError("amplitudes overflowed at step " + std::to_string(k));
    }
    StateVector s(std::move(amplitudes), psi0.basis());
    traj.steps.push_back(k);
    traj.times.push_back(static_cast<double>(k) * tau);
    traj.norms_sq.push_back(s.norm_sq());
    traj.states.push_back(std::move(s));
  };

  push(0, psi0.amplitudes());
  if (scheme.variant() == Variant::Symmetric) {
    if (steps == 0) return traj;
    Vector prev = c0;
    Vector curr = seed_second_level(c0, x, seeding);
    if (recorded(1)) push(1, sys.from_energy(curr));
    const Vector two_ix = 2.0 * I * x.cast<cplx>();
    for (std::int64_t k = 2; k <= steps; ++k) {
      Vector next = prev - two_ix.cwiseProduct(curr);
      prev = std::move(curr);
      curr = std::move(next);
      if (recorded(k)) push(k, sys.from_energy(curr));
    }
  } else {
    for (std::int64_t k = std::min(stride, steps); k <= steps && k > 0;) {
      push(k, sys.from_energy(coefficients_at(scheme.variant(), c0, x, k, seeding)));
      if (k == steps) break;
      k = std::min(k + stride, steps);
    }
  }
  return traj;
}

DecayRates retarded_decay_rates(const SpectralSystem& sys, double tau) {
  require_positive_tau(tau);
  const RealVector x = step_parameters(sys, tau);
  DecayRates r;
  r.gamma_n.resize(x.size());
  r.leading_order.resize(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    r.gamma_n(n) = std::log1p(x(n) * x(n)) / tau;
    r.leading_order(n) = x(n) * x(n) / tau;
  }
  return r;
}

DiscreteFrequencies symmetric_frequencies(const SpectralSystem& sys, double tau) {
  require_positive_tau(tau);
  const RealVector x = step_parameters(sys, tau);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DiscreteFrequencies f;
  f.alpha_n.resize(x.size());
  f.shift.resize(x.size());
  f.valid.resize(static_cast<std::size_t>(x.size()));
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    const bool ok = std::abs(x(n)) <= 1.0;
    f.valid[static_cast<std::size_t>(n)] = ok;
    f.alpha_n(n) = ok ? std::asin(x(n)) / tau : nan;
    f.shift(n) = ok ? f.alpha_n(n) - sys.eigenvalues()(n) / Constants::hbar_eVs : nan;
  }
  return f;
}

StateVector continuum_state(const StateVector& psi0, const SpectralSystem& sys, double t) {
  require_same_dim(sys.dim(), psi0.dim(), "state");
  Vector c = sys.to_energy(psi0.amplitudes());
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    c(n) *= std::polar(1.0, -sys.eigenvalues()(n) * t / Constants::hbar_eVs);
  }
  return StateVector(sys.from_energy(c), psi0.basis());
}

std::int64_t steps_for(double t, double tau, const char* field) {
  require_positive_tau(tau);
  if (!(std::isfinite(t) && t >= 0.0)) throw ValidationError(field, "must be finite and >= 0");
  const double k = t / tau;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * std::max(1.0, r)) {
    throw ValidationError(field, "must be an integer multiple of tau");
  }
  return static_cast<std::int64_t>(r);
}

double continuum_error(const StateVector& psi0, const SpectralSystem& sys, double tau,
                       double t_final, Variant variant, Seeding seeding) {
  check_inputs(psi0, sys, tau);
  const std::int64_t k = steps_for(t_final, tau);
  const RealVector x = step_parameters(sys, tau);
  const Vector ck = coefficients_at(variant, sys.to_energy(psi0.amplitudes()), x, k, seeding);
  const Vector discrete = sys.from_energy(ck);
  const Vector exact = continuum_state(psi0, sys, static_cast<double>(k) * tau).amplitudes();
  if (discrete.size() == 0) return 0.0;
  return (discrete - exact).cwiseAbs().maxCoeff();
}

}  // namespace chronon::qevolve
