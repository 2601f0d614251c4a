#include "chronon/decohere.hpp"

#include <cmath>
#include <string>

namespace chronon::decohere {

namespace {

void check_dim(const TransitionFrequencies& omega, const DensityMatrix& rho) {
  require_same_dim(omega.dim(), rho.dim(), "density_matrix");
}

RealVector real_diagonal(const Matrix& m) { return m.diagonal().real(); }

void record(ReductionProfile& p, std::int64_t k, double tau, const Matrix& rho, bool keep) {
  p.steps.push_back(k);
  p.times.push_back(static_cast<double>(k) * tau);
  p.offdiag_norm.push_back(offdiag_frobenius(rho));
  p.diagonal.push_back(real_diagonal(rho));
  p.trace.push_back(rho.trace().real());
  p.min_eigenvalue.push_back(min_hermitian_eigenvalue(rho));
  if (keep) p.states.push_back(rho);
}

}  // namespace

TransitionFrequencies TransitionFrequencies::from_energies(const RealVector& energies_eV) {
  const Eigen::Index n = energies_eV.size();
  RealMatrix omega(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      omega(r, s) = (energies_eV(r) - energies_eV(s)) / Constants::hbar_eVs;
    }
  }
  return TransitionFrequencies(std::move(omega));
}

TransitionFrequencies TransitionFrequencies::from_system(const SpectralSystem& sys) {
  return from_energies(sys.eigenvalues());
}

TransitionFrequencies TransitionFrequencies::from_matrix(RealMatrix omega) {
  if (omega.rows() != omega.cols()) throw ValidationError("omega", "must be square");
  if (!omega.allFinite()) throw ValidationError("omega", "contains non-finite entries");
  for (Eigen::Index r = 0; r < omega.rows(); ++r) {
    for (Eigen::Index s = 0; s < omega.cols(); ++s) {
      if (omega(r, s) != -omega(s, r)) throw ValidationError("omega", "must be antisymmetric");
    }
  }
  return TransitionFrequencies(std::move(omega));
}

double offdiag_frobenius(const Matrix& rho) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index s = 0; s < rho.cols(); ++s) {
      if (r != s) sum += std::norm(rho(r, s));
    }
  }
  return std::sqrt(sum);
}

DensityMatrix lvn_step_retarded(const DensityMatrix& rho, const TransitionFrequencies& omega,
                                double tau) {
  require_positive_tau(tau);
  check_dim(omega, rho);
  Matrix out(rho.dim(), rho.dim());
  for (Eigen::Index r = 0; r < rho.dim(); ++r) {
    for (Eigen::Index s = 0; s < rho.dim(); ++s) {
      out(r, s) = retarded_update(rho.rho()(r, s), omega(r, s) * tau);
    }
  }
  return DensityMatrix::unchecked(std::move(out), rho.basis());
}

DensityMatrix lvn_step_symmetric(const DensityMatrix& rho_prev, const DensityMatrix& rho_curr,
                                 const TransitionFrequencies& omega, double tau) {
  require_positive_tau(tau);
  check_dim(omega, rho_prev);
  check_dim(omega, rho_curr);
  Matrix out(rho_curr.dim(), rho_curr.dim());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index s = 0; s < out.cols(); ++s) {
      out(r, s) = symmetric_update(rho_prev.rho()(r, s), rho_curr.rho()(r, s), omega(r, s) * tau);
    }
  }
  return DensityMatrix::unchecked(std::move(out), rho_curr.basis());
}

cplx evolution_factor(double omega_rs, double tau, std::int64_t k) {
  if (k < 0) throw ValidationError("k", "must be >= 0");
  if (k == 0 || omega_rs == 0.0) return {1.0, 0.0};
  const double x = omega_rs * tau;
  const double kk = static_cast<double>(k);
  // gamma*tau = ln(1 + x^2)/2, nu*tau = atan(x)
  return std::polar(std::exp(-0.5 * std::log1p(x * x) * kk), -std::atan(x) * kk);
}

double decay_rate(double omega_rs, double tau) {
  require_positive_tau(tau);
  const double x = omega_rs * tau;
  return std::log1p(x * x) / (2.0 * tau);
}

double oscillation_frequency(double omega_rs, double tau) {
  require_positive_tau(tau);
  return std::atan(omega_rs * tau) / tau;
}

double first_order_decay(double omega_nm, double tau, double t) {
  if (!(t >= 0.0)) throw ValidationError("t", "must be >= 0");
  return std::exp(-std::abs(omega_nm * omega_nm * tau * t / 2.0));
}

DecoherenceRates decoherence_rates(const TransitionFrequencies& omega, double tau) {
  require_positive_tau(tau);
  const Eigen::Index n = omega.dim();
  DecoherenceRates rates{RealMatrix::Zero(n, n), RealMatrix::Zero(n, n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      rates.gamma(r, s) = decay_rate(omega(r, s), tau);
      rates.nu(r, s) = oscillation_frequency(omega(r, s), tau);
    }
  }
  return rates;
}

std::optional<double> coherence_half_time(double omega_rs, double tau) {
  const double gamma = decay_rate(omega_rs, tau);
  if (omega_rs == 0.0 || gamma == 0.0) return std::nullopt;
  return std::log(2.0) / gamma;
}

Matrix factor_matrix(const TransitionFrequencies& omega, double tau, std::int64_t k) {
  require_positive_tau(tau);
  const Eigen::Index n = omega.dim();
  Matrix f(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) f(r, s) = evolution_factor(omega(r, s), tau, k);
  }
  return f;
}

DensityMatrix density_at(const DensityMatrix& rho0_energy, const TransitionFrequencies& omega,
                         double tau, std::int64_t k) {
  check_dim(omega, rho0_energy);
  return DensityMatrix::unchecked(
      factor_matrix(omega, tau, k).cwiseProduct(rho0_energy.rho()), rho0_energy.basis());
}

ReductionProfile evolve_density(const DensityMatrix& rho0, const SpectralSystem& sys, double tau,
                                std::int64_t steps, const EvolveOptions& options) {
  require_positive_tau(tau);
  if (steps < 0) throw ValidationError("steps", "must be >= 0");
  if (options.stride < 1) throw ValidationError("stride", "must be >= 1");
  require_same_dim(sys.dim(), rho0.dim(), "density_matrix");

  const DensityMatrix energy = to_energy_basis(rho0, sys);
  const auto omega = TransitionFrequencies::from_system(sys);

  ReductionProfile p;
  p.tau = tau;
  for (std::int64_t k = 0;; k += options.stride) {
    if (k > steps) k = steps;
    record(p, k, tau, density_at(energy, omega, tau, k).rho(), options.keep_states);
    if (k == steps) break;
  }
  return p;
}

double semigroup_check(const TransitionFrequencies& omega, double tau, std::int64_t k,
                       std::int64_t m) {
  if (k < 0 || m < 0) throw ValidationError("k", "step counts must be >= 0");
  const Matrix composed = factor_matrix(omega, tau, k).cwiseProduct(factor_matrix(omega, tau, m));
  const Matrix direct = factor_matrix(omega, tau, k + m);
  if (direct.size() == 0) return 0.0;
  return (composed - direct).cwiseAbs().maxCoeff();
}

std::pair<cplx, cplx> symmetric_multipliers(double omega_tau) {
  // lambda = -i x +/- sqrt(1 - x^2)
  const cplx root = std::sqrt(cplx(1.0 - omega_tau * omega_tau, 0.0));
  const cplx shift(0.0, -omega_tau);
  return {shift + root, shift - root};
}

void MeasurementSetup::validate() const {
  if (object_amplitudes.size() == 0) throw ValidationError("amplitudes", "must be non-empty");
  if (!object_amplitudes.allFinite()) throw ValidationError("amplitudes", "non-finite entries");
  if (std::abs(object_amplitudes.squaredNorm() - 1.0) > 1e-12) {
    throw ValidationError("amplitudes", "sum of |c_r|^2 must equal 1");
  }
  if (classical_weights.size() == 0) throw ValidationError("weights", "must be non-empty");
  if ((classical_weights.array() < 0.0).any() || !classical_weights.allFinite()) {
    throw ValidationError("weights", "must be finite and >= 0");
  }
  if (std::abs(classical_weights.sum() - 1.0) > 1e-12) {
    throw ValidationError("weights", "must sum to 1");
  }
  if (pointer_labels.size() != 0 && pointer_labels.size() != object_amplitudes.size()) {
    throw ValidationError("pointer_labels", "need one label per amplitude");
  }
}

DensityMatrix build_measurement_state(const MeasurementSetup& setup) {
  setup.validate();
  const Eigen::Index nr = setup.object_amplitudes.size();
  const Eigen::Index nm = setup.classical_weights.size();
  const Vector& c = setup.object_amplitudes;
  Matrix rho = Matrix::Zero(nr * nm, nr * nm);
  for (Eigen::Index m = 0; m < nm; ++m) {
    const double weight = setup.classical_weights(m);
    for (Eigen::Index r1 = 0; r1 < nr; ++r1) {
      for (Eigen::Index r2 = 0; r2 < nr; ++r2) {
        rho(m * nr + r1, m * nr + r2) = weight * std::conj(c(r1)) * c(r2);
      }
    }
  }
  // Both normalizations are only checked to 1e-12; their product can drift past it.
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho), BasisTag::Energy);
}

ReductionProfile schrodinger_induced_density(const qevolve::SchrodingerTrajectory& traj,
                                             bool keep_states) {
  ReductionProfile p;
  p.tau = traj.tau;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Vector& psi = traj.states[k].amplitudes();
    record(p, traj.steps[k], traj.tau, psi * psi.adjoint(), keep_states);
  }
  return p;
}

ReductionProfile schrodinger_induced_density(const qevolve::SchrodingerTrajectory& traj,
                                             const SpectralSystem& sys, bool keep_states) {
  ReductionProfile p;
  p.tau = traj.tau;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    require_same_dim(sys.dim(), traj.states[k].dim(), "state");
    const Vector c = sys.to_energy(traj.states[k].amplitudes());
    record(p, traj.steps[k], traj.tau, c * c.adjoint(), keep_states);
  }
  return p;
}

}  // namespace chronon::decohere
