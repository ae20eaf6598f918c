#pragma once

#include <complex>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace relaxometer {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Columns are states, rows are computational basis labels.
using Eigenvectors = std::variant<RealMatrix, ComplexMatrix>;

enum class SpectrumKind { Hermitian, Unitary };

/// Eigenvalues paired with an orthonormal set of eigenvectors.
///
/// For the hermitian kind `levels` holds energies E_k and U(t) = exp(-iHt).
/// For the unitary kind `levels` holds eigenangles theta_k in [0, 2pi) with
/// U psi_k = exp(i theta_k) psi_k and t counts map iterations. The vectors may
/// span a symmetry sector only, in which case there are fewer columns than rows.
struct SpectralDecomposition {
    SpectrumKind kind = SpectrumKind::Hermitian;
    RealVector levels;
    Eigenvectors vectors;

    Index basis_dimension() const;
    Index size() const;
    bool is_real() const { return std::holds_alternative<RealMatrix>(vectors); }

    /// omega_k with U^t psi_k = exp(i omega_k t) psi_k.
    double phase_rate(Index k) const { return kind == SpectrumKind::Hermitian ? -levels[k] : levels[k]; }

    /// Ascending copy of the phase rates (energies, or eigenangles).
    RealVector sorted_levels() const;
};

SpectralDecomposition eigh(const RealMatrix& h);
SpectralDecomposition eigh(const ComplexMatrix& h);

/// Eigen-decomposition of a unitary matrix. Diagonalizes the Hermitian part
/// and resolves clusters of (nearly) equal cos(theta) inside the cluster.
/// Throws NumericalConsistency when the input is not unitary.
SpectralDecomposition eig_unitary(const ComplexMatrix& u);

RealVector eigvalsh(const RealMatrix& h);
RealVector eigvalsh(const ComplexMatrix& h);

/// Re-expresses block eigenvectors in the full basis: vectors <- basis * vectors.
SpectralDecomposition embed(const SpectralDecomposition& block, const Eigen::SparseMatrix<double>& basis);
SpectralDecomposition embed(const SpectralDecomposition& block, const Eigen::SparseMatrix<cplx>& basis);

/// Largest |M_ij - conj(M_ji)|.
double hermiticity_defect(const RealMatrix& m);
double hermiticity_defect(const ComplexMatrix& m);

/// Largest entry of |U^dagger U - I|.
double unitarity_defect(const ComplexMatrix& u);

} // namespace relaxometer
