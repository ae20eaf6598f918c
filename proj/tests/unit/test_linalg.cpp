#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "relaxometer/error.hpp"
#include "relaxometer/linalg.hpp"
#include "relaxometer/rng.hpp"

using namespace relaxometer;

namespace {

template <class M>
double residual(const M& op, const SpectralDecomposition& d) {
    const auto& v = std::get<M>(d.vectors);
    if constexpr (std::is_same_v<M, RealMatrix>) {
        return (op * v - v * d.levels.asDiagonal()).cwiseAbs().maxCoeff();
    } else {
        ComplexVector ev(d.size());
        for (Index k = 0; k < d.size(); ++k) {
            ev[k] = d.kind == SpectrumKind::Unitary ? std::polar(1.0, d.levels[k]) : cplx(d.levels[k]);
        }
        return (op * v - v * ev.asDiagonal()).cwiseAbs().maxCoeff();
    }
}

ComplexMatrix haar(Index d, std::uint64_t seed) {
    Stream s = derive_substream(seed, 0);
    return sample_cue(d, s);
}

} // namespace

TEST(Eigh, RealSymmetricResidualAndOrthonormality) {
    Stream s = derive_substream(1, 0);
    const RealMatrix h = sample_goe(120, s);
    const auto d = eigh(h);
    EXPECT_TRUE(d.is_real());
    EXPECT_LT(residual(h, d), 1e-10);
    const auto& v = std::get<RealMatrix>(d.vectors);
    EXPECT_LT((v.transpose() * v - RealMatrix::Identity(120, 120)).cwiseAbs().maxCoeff(), 1e-12);
    for (Index k = 1; k < d.size(); ++k) EXPECT_LE(d.levels[k - 1], d.levels[k]);
}

TEST(Eigh, ComplexHermitian) {
    Stream s = derive_substream(2, 0);
    const ComplexMatrix h = sample_gue(90, s);
    const auto d = eigh(h);
    EXPECT_FALSE(d.is_real());
    EXPECT_LT(residual(h, d), 1e-10);
}

TEST(Eigh, RejectsNonHermitianInput) {
    RealMatrix m = RealMatrix::Identity(4, 4);
    m(0, 1) = 1.0;
    EXPECT_THROW(eigh(m), NumericalConsistency);
    EXPECT_THROW(eigh(RealMatrix(3, 2)), InvalidDimension);
}

TEST(EigUnitary, HaarMatrix) {
    const ComplexMatrix u = haar(80, 3);
    const auto d = eig_unitary(u);
    EXPECT_EQ(d.kind, SpectrumKind::Unitary);
    EXPECT_LT(residual(u, d), 1e-10);
    for (Index k = 0; k < d.size(); ++k) {
        EXPECT_GE(d.levels[k], 0.0);
        EXPECT_LT(d.levels[k], 2 * std::numbers::pi);
    }
}

TEST(EigUnitary, DiagonalPhases) {
    ComplexVector diag(4);
    diag << 1.0, cplx(0, 1), -1.0, cplx(0, -1);
    const auto d = eig_unitary(ComplexMatrix(diag.asDiagonal()));
    auto levels = d.sorted_levels();
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(levels[k], k * std::numbers::pi / 2, 1e-14);
}

TEST(EigUnitary, DegenerateClusterStillGivesOrthonormalEigenvectors) {
    // Q diag(1, 1, 1, i, -1) Q^dag: a threefold eigenvalue mixed by a random basis.
    const ComplexMatrix q = haar(5, 9);
    ComplexVector diag(5);
    diag << 1.0, 1.0, 1.0, cplx(0, 1), -1.0;
    const ComplexMatrix u = q * diag.asDiagonal() * q.adjoint();
    const auto d = eig_unitary(u);
    const auto& v = std::get<ComplexMatrix>(d.vectors);
    EXPECT_LT((v.adjoint() * v - ComplexMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(residual(u, d), 1e-10);
}

TEST(EigUnitary, RejectsNonUnitary) {
    ComplexMatrix m = ComplexMatrix::Identity(3, 3);
    m(0, 0) = 2.0;
    EXPECT_THROW(eig_unitary(m), NumericalConsistency);
}

TEST(Defects, MeasureDepartureFromStructure) {
    EXPECT_EQ(unitarity_defect(ComplexMatrix::Identity(6, 6)), 0.0);
    RealMatrix m = RealMatrix::Zero(3, 3);
    m(0, 2) = 0.5;
    EXPECT_DOUBLE_EQ(hermiticity_defect(m), 0.5);
}

TEST(Embed, LiftsSectorVectorsIntoFullBasis) {
    // Two-dimensional block living on basis states 1 and 3 of a 4-state space.
    Eigen::SparseMatrix<double> basis(4, 2);
    basis.insert(1, 0) = 1.0;
    basis.insert(3, 1) = 1.0;
    RealMatrix block(2, 2);
    block << 0, 1, 1, 0;
    const auto full = embed(eigh(block), basis);
    const auto& v = std::get<RealMatrix>(full.vectors);
    EXPECT_EQ(v.rows(), 4);
    EXPECT_EQ(v.cols(), 2);
    EXPECT_EQ(v.row(0).norm(), 0.0);
    EXPECT_NEAR(v.row(1).norm(), 1.0, 1e-15);
    EXPECT_NEAR(v.row(3).norm(), 1.0, 1e-15);
    EXPECT_EQ(full.basis_dimension(), 4);
}
