#pragma once

// Shared physical constants, chronon scheme description, spectral
// decomposition and validated quantum-state types.

#include <complex>
#include <string_view>

#include <Eigen/Dense>

#include "chronon/errors.hpp"

namespace chronon {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// CODATA 2018 values. Quantum modules work in eV and seconds, the classical
/// module in Gaussian cgs.
struct Constants {
  static constexpr double hbar_eVs = 6.582119569e-16;
  static constexpr double eV_erg = 1.602176634e-12;
  static constexpr double hbar_erg_s = hbar_eVs * eV_erg;
  static constexpr double c_cm_per_s = 2.99792458e10;
  // e[C] * c[cm/s] / 10
  static constexpr double e_esu = 1.602176634e-19 * 2.99792458e9;
  static constexpr double m_e_g = 9.1093837015e-28;
  static constexpr double alpha = 7.2973525693e-3;
  static constexpr double muon_electron_mass_ratio = 206.7682830;
};

enum class Variant { Retarded, Symmetric, Advanced };

std::string_view to_string(Variant v);
/// Accepts "retarded", "symmetric", "advanced" (case-sensitive).
Variant parse_variant(std::string_view name);

/// Discretization choice plus the chronon value.
class ChrononScheme {
 public:
  ChrononScheme(Variant variant, double tau);

  Variant variant() const noexcept { return variant_; }
  double tau() const noexcept { return tau_; }

 private:
  Variant variant_;
  double tau_;
};

/// Throws ValidationError("tau") unless tau is finite and positive.
void require_positive_tau(double tau);

/// (2/3) q^2 / (m c^3) in Gaussian units, i.e. the radiation time theta_0.
/// The particle chronon tau_0 = 2 theta_0 is returned when `full_chronon` is set.
double chronon_of(double charge_esu, double mass_g, bool full_chronon = false);

enum class BasisTag { PositionGrid, Energy, Custom };

std::string_view to_string(BasisTag tag);

/// Hermitian Hamiltonian (eV) together with its ascending spectrum and a
/// unitary eigenvector matrix. Only constructible through spectral_decompose.
class SpectralSystem {
 public:
  Eigen::Index dim() const noexcept { return hamiltonian_.rows(); }
  const Matrix& hamiltonian() const noexcept { return hamiltonian_; }
  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }

  /// U diag(W) U^dagger
  Matrix reconstruct() const;

  /// Coefficients c = U^dagger psi of a vector in the Hamiltonian's basis.
  Vector to_energy(const Vector& psi) const { return eigenvectors_.adjoint() * psi; }
  Vector from_energy(const Vector& c) const { return eigenvectors_ * c; }

 private:
  friend SpectralSystem spectral_decompose(const Matrix& hamiltonian);
  SpectralSystem(Matrix h, RealVector w, Matrix u)
      : hamiltonian_(std::move(h)), eigenvalues_(std::move(w)), eigenvectors_(std::move(u)) {}

  Matrix hamiltonian_;
  RealVector eigenvalues_;
  Matrix eigenvectors_;
};

/// Diagonalizes a Hermitian matrix. Eigenvalues ascend; each eigenvector is
/// rotated so its largest-magnitude component (first one on ties) is real
/// and positive.
SpectralSystem spectral_decompose(const Matrix& hamiltonian);

/// Convenience for diagonal Hamiltonians given by their energies.
SpectralSystem diagonal_system(const RealVector& energies);

class StateVector {
 public:
  explicit StateVector(Vector amplitudes, BasisTag tag = BasisTag::Custom);

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  BasisTag basis() const noexcept { return tag_; }
  Eigen::Index dim() const noexcept { return amplitudes_.size(); }
  double norm_sq() const { return amplitudes_.squaredNorm(); }

 private:
  Vector amplitudes_;
  BasisTag tag_;
};

/// Density operator. The public constructor validates Hermiticity (1e-12),
/// unit trace (1e-12) and positivity (min eigenvalue >= -1e-10).
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho, BasisTag tag = BasisTag::Custom);

  /// Skips validation. Used for states produced by evolution maps, which may
  /// legitimately lose trace or positivity (retarded Schrodinger, symmetric LvN).
  static DensityMatrix unchecked(Matrix rho, BasisTag tag);

  const Matrix& rho() const noexcept { return rho_; }
  BasisTag basis() const noexcept { return tag_; }
  Eigen::Index dim() const noexcept { return rho_.rows(); }
  cplx trace() const { return rho_.trace(); }
  double min_eigenvalue() const;

 private:
  struct NoCheck {};
  DensityMatrix(Matrix rho, BasisTag tag, NoCheck) : rho_(std::move(rho)), tag_(tag) {}

  Matrix rho_;
  BasisTag tag_;
};

/// U^dagger rho U
DensityMatrix to_energy_basis(const DensityMatrix& rho, const SpectralSystem& sys);
/// U rho U^dagger; the result keeps the tag it had before to_energy_basis only
/// if the caller says so, otherwise it is tagged Custom.
DensityMatrix from_energy_basis(const DensityMatrix& rho, const SpectralSystem& sys,
                                BasisTag tag = BasisTag::Custom);

/// Smallest eigenvalue of the Hermitian part of m.
double min_hermitian_eigenvalue(const Matrix& m);

/// max |m - m^dagger| entrywise
double hermiticity_defect(const Matrix& m);

void require_same_dim(Eigen::Index expected, Eigen::Index got, const char* what);

}  // namespace chronon
