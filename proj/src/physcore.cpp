#include "chronon/physcore.hpp"

#include <cmath>
#include <string>

namespace chronon {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Retarded:
      return "retarded";
    case Variant::Symmetric:
      return "symmetric";
    case Variant::Advanced:
      return "advanced";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "retarded") return Variant::Retarded;
  if (name == "symmetric") return Variant::Symmetric;
  if (name == "advanced") return Variant::Advanced;
  throw ValidationError("scheme", "unknown variant '" + std::string(name) +
                                      "' (expected retarded|symmetric|advanced)");
}

void require_positive_tau(double tau) {
  if (!(std::isfinite(tau) && tau > 0.0)) {
    throw ValidationError("tau", "must be finite and > 0, got " + std::to_string(tau));
  }
}

ChrononScheme::ChrononScheme(Variant variant, double tau) : variant_(variant), tau_(tau) {
  require_positive_tau(tau);
}

double chronon_of(double charge_esu, double mass_g, bool full_chronon) {
  if (!(mass_g > 0.0) || !std::isfinite(mass_g)) {
    throw DomainError("mass", "must be > 0");
  }
  if (charge_esu == 0.0 || !std::isfinite(charge_esu)) {
    throw DomainError("charge", "must be finite and non-zero");
  }
  const double c = Constants::c_cm_per_s;
  const double theta0 = (2.0 / 3.0) * charge_esu * charge_esu / (mass_g * c * c * c);
  return full_chronon ? 2.0 * theta0 : theta0;
}

std::string_view to_string(BasisTag tag) {
  switch (tag) {
    case BasisTag::PositionGrid:
      return "position";
    case BasisTag::Energy:
      return "energy";
    case BasisTag::Custom:
      return "custom";
  }
  return "custom";
}

void require_same_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw ValidationError(what, "dimension mismatch: expected " + std::to_string(expected) +
                                    ", got " + std::to_string(got));
  }
}

double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_hermitian_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix SpectralSystem::reconstruct() const {
  return eigenvectors_ * eigenvalues_.cast<cplx>().asDiagonal() * eigenvectors_.adjoint();
}

SpectralSystem spectral_decompose(const Matrix& hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw ValidationError("hamiltonian", "must be square");
  }
  if (hamiltonian.size() == 0) {
    throw ValidationError("hamiltonian", "must be non-empty");
  }
  if (!hamiltonian.allFinite()) {
    throw ValidationError("hamiltonian", "contains non-finite entries");
  }
  const double defect = hermiticity_defect(hamiltonian);
  if (defect > 1e-10) {
    throw ValidationError("hamiltonian", "not Hermitian (max |H - H^dagger| = " +
                                             std::to_string(defect) + ")");
  }
  Matrix h = 0.5 * (hamiltonian + hamiltonian.adjoint());

  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw ValidationError("hamiltonian", "eigendecomposition failed");
  }
  RealVector w = es.eigenvalues();
  Matrix u = es.eigenvectors();

  // Phase convention: largest-magnitude component real and positive.
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best * (1.0 + 1e-12)) {
        best = a;
        pivot = i;
      }
    }
    const cplx p = u(pivot, j);
    u.col(j) *= std::conj(p) / std::abs(p);
    u(pivot, j) = cplx(u(pivot, j).real(), 0.0);
  }
  return SpectralSystem(std::move(h), std::move(w), std::move(u));
}

SpectralSystem diagonal_system(const RealVector& energies) {
  return spectral_decompose(energies.cast<cplx>().asDiagonal());
}

StateVector::StateVector(Vector amplitudes, BasisTag tag)
    : amplitudes_(std::move(amplitudes)), tag_(tag) {
  if (!amplitudes_.allFinite()) {
    throw ValidationError("amplitudes", "contain NaN or Inf");
  }
}

DensityMatrix::DensityMatrix(Matrix rho, BasisTag tag) : rho_(std::move(rho)), tag_(tag) {
  if (rho_.rows() != rho_.cols() || rho_.size() == 0) {
    throw ValidationError("density_matrix", "must be square and non-empty");
  }
  if (!rho_.allFinite()) {
    throw ValidationError("density_matrix", "contains non-finite entries");
  }
  if (hermiticity_defect(rho_) > 1e-12) {
    throw ValidationError("density_matrix", "not Hermitian");
  }
  const cplx tr = rho_.trace();
  if (std::abs(tr.real() - 1.0) > 1e-12 || std::abs(tr.imag()) > 1e-12) {
    throw ValidationError("density_matrix", "trace must equal 1");
  }
  if (min_eigenvalue() < -1e-10) {
    throw ValidationError("density_matrix", "not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::unchecked(Matrix rho, BasisTag tag) {
  return DensityMatrix(std::move(rho), tag, NoCheck{});
}

double DensityMatrix::min_eigenvalue() const { return min_hermitian_eigenvalue(rho_); }

DensityMatrix to_energy_basis(const DensityMatrix& rho, const SpectralSystem& sys) {
  require_same_dim(sys.dim(), rho.dim(), "density_matrix");
  const Matrix& u = sys.eigenvectors();
  return DensityMatrix::unchecked(u.adjoint() * rho.rho() * u, BasisTag::Energy);
}

DensityMatrix from_energy_basis(const DensityMatrix& rho, const SpectralSystem& sys,
                                BasisTag tag) {
  require_same_dim(sys.dim(), rho.dim(), "density_matrix");
  const Matrix& u = sys.eigenvectors();
  return DensityMatrix::unchecked(u * rho.rho() * u.adjoint(), tag);
}

}  // namespace chronon
