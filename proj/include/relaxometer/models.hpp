#pragma once

#include <vector>

#include "relaxometer/fraction.hpp"
#include "relaxometer/linalg.hpp"

namespace relaxometer {

/// Shifts of the position and momentum labels in the discrete Fourier
/// transform. (1/2, 1/2) is the anti-periodic choice.
struct FourierPhases {
    double alpha = 0.5;
    double beta = 0.5;
};

/// Classical Bernoulli scheme (p, 1 - p) of a generalized baker's map.
struct BernoulliScheme {
    Fraction left_fraction{1, 2};

    Index left_block(Index d) const { return static_cast<Index>(left_fraction.times(d)); }
    bool fits(Index d) const { return left_fraction.divides(d); }
    std::string name() const;
};

struct IsingParams {
    int sites = 2;
    double hx = 0.0;
    double hz = 0.0;

    Index dimension() const { return Index{1} << sites; }
};

namespace ising_presets {
// Banuls-Cirac-Hastings chaotic point.
inline constexpr IsingParams bch(int n) { return {n, -1.05, 0.5}; }
// Near-integrable point; the tiny longitudinal field lifts the spin-flip symmetry.
inline constexpr IsingParams integrable(int n) { return {n, -1.0, 0.001}; }
// Kim-Huse point ((sqrt5 + 5)/8, (sqrt5 + 1)/4).
IsingParams kim_huse(int n);
} // namespace ising_presets

/// (G_D)_{lm} = exp(-2 pi i (l + alpha)(m + beta) / D) / sqrt(D), l, m = 0..D-1.
ComplexMatrix dft_matrix(Index dimension, const FourierPhases& phases = {});

/// G_D^{-1} blockdiag(G_{pD}, G_{(1-p)D}); every block uses the same phases.
ComplexMatrix baker_unitary(Index dimension, const BernoulliScheme& scheme, const FourierPhases& phases = {});

/// P = -G_D^2. For alpha = beta = 1/2 this is the position reflection n -> D-1-n.
ComplexMatrix baker_parity(Index dimension, const FourierPhases& phases = {});

/// Mixed-field Ising chain with open boundaries in the sigma^z product basis.
/// Site 1 is the most significant bit; bit value 0 means sigma^z = +1.
/// Throws ResourceLimit when `sites` exceeds `max_sites`.
RealMatrix ising_hamiltonian(const IsingParams& params, int max_sites = 14);

/// Bit reversal |s_1 ... s_N> -> |s_N ... s_1> as an index permutation.
std::vector<Index> reflection_permutation(int sites);
Eigen::SparseMatrix<double> reflection_operator(int sites);

/// Eigenspace of a unitary involution S for one eigenvalue (+1 or -1).
template <class Scalar>
struct SymmetrySector {
    int sign = 1;
    /// Orthonormal symmetry-adapted vectors (columns) in the full basis.
    Eigen::SparseMatrix<Scalar> basis;
    /// The operator restricted to the sector: basis^dagger * op * basis.
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> block;

    Index dimension() const { return basis.cols(); }
};

template <class Scalar>
struct SectorPair {
    SymmetrySector<Scalar> plus;
    SymmetrySector<Scalar> minus;
};

/// Splits `op` into the +1 and -1 eigenspaces of the involution `symmetry`.
///
/// When `symmetry` is a (phased) permutation each index n is paired with its
/// image; symmetric combinations are ordered by min(n, image), then the
/// antisymmetric ones likewise. Otherwise the eigenspaces come from a dense
/// diagonalization of the symmetry. Throws NotASymmetry when
/// max|[op, S]| >= 1e-8 or S is not an involution.
SectorPair<double> symmetry_sectors(const RealMatrix& op, const Eigen::SparseMatrix<double>& symmetry);
SectorPair<cplx> symmetry_sectors(const ComplexMatrix& op, const Eigen::SparseMatrix<cplx>& symmetry);

/// Max-norm of op*S - S*op.
double commutator_norm(const RealMatrix& op, const Eigen::SparseMatrix<double>& symmetry);
double commutator_norm(const ComplexMatrix& op, const Eigen::SparseMatrix<cplx>& symmetry);

/// Diagonalizes a sector block and expresses its eigenvectors in the full basis.
SpectralDecomposition decompose_sector(const SymmetrySector<double>& sector, SpectrumKind kind);
SpectralDecomposition decompose_sector(const SymmetrySector<cplx>& sector, SpectrumKind kind);

/// Concatenates decompositions over the same basis (e.g. both parity sectors),
/// sorted by level.
SpectralDecomposition pool(const SpectralDecomposition& a, const SpectralDecomposition& b);

} // namespace relaxometer
