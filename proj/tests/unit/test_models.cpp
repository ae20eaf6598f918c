#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "relaxometer/error.hpp"
#include "relaxometer/models.hpp"

using namespace relaxometer;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<double> sorted(const RealVector& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

// Circular distance between two sorted eigenangle lists.
double angle_mismatch(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::remainder(a[i] - b[i], 2 * std::numbers::pi);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

} // namespace

TEST(Dft, UnitaryForSeveralPhaseChoices) {
    for (Index d : {1, 2, 5, 16, 33}) {
        for (const auto& ph : {FourierPhases{0.5, 0.5}, FourierPhases{0.0, 0.0}, FourierPhases{0.3, 0.1}}) {
            const ComplexMatrix g = dft_matrix(d, ph);
            EXPECT_LT(max_abs(g.adjoint() * g - ComplexMatrix::Identity(d, d)), 1e-12) << "D=" << d;
        }
    }
}

TEST(Dft, CornerEntryForTwoStates) {
    const ComplexMatrix g = dft_matrix(2, {0.5, 0.5});
    const cplx expected = std::polar(1.0 / std::sqrt(2.0), -std::numbers::pi / 4);
    EXPECT_LT(std::abs(g(0, 0) - expected), 1e-15);
}

TEST(Dft, MinusSquareIsAnInvolution) {
    const ComplexMatrix g = dft_matrix(4, {0.5, 0.5});
    const ComplexMatrix p = -g * g;
    EXPECT_LT(max_abs(p * p - ComplexMatrix::Identity(4, 4)), 1e-12);
}

TEST(Baker, TwoStateMatrixByHand) {
    // G_2^-1 diag(G_1, G_1) with G_1 = -i; every entry has modulus 1/sqrt 2.
    const double r = 1.0 / std::sqrt(2.0);
    const double q = std::numbers::pi / 4;
    ComplexMatrix expected(2, 2);
    expected << std::polar(r, -q), std::polar(r, q), std::polar(r, q), std::polar(r, -q);
    EXPECT_LT(max_abs(baker_unitary(2, BernoulliScheme{}, {0.5, 0.5}) - expected), 1e-15);
}

TEST(Baker, UnitaryForEveryScheme) {
    for (const auto& f : {Fraction(1, 2), Fraction(2, 3), Fraction(1, 3), Fraction(1, 4)}) {
        const ComplexMatrix b = baker_unitary(48, BernoulliScheme{f});
        EXPECT_LT(unitarity_defect(b), 1e-12) << f.str();
    }
}

TEST(Baker, RejectsIncompatibleDimension) {
    EXPECT_THROW(baker_unitary(10, BernoulliScheme{Fraction(1, 3)}), InvalidDimension);
    EXPECT_THROW(baker_unitary(10, BernoulliScheme{Fraction(1, 1)}), DomainError);
}

TEST(Baker, ParityIsAnInvolutionWithFullSpectrum) {
    const ComplexMatrix p = baker_parity(100);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(p);
    int plus = 0, minus = 0;
    for (const auto& ev : es.eigenvalues()) {
        if (std::abs(ev - 1.0) < 1e-10) ++plus;
        if (std::abs(ev + 1.0) < 1e-10) ++minus;
    }
    EXPECT_EQ(plus + minus, 100);
}

TEST(Baker, ParityCommutesWithSymmetricMap) {
    const Index d = 2000;
    const ComplexMatrix b = baker_unitary(d, BernoulliScheme{});
    const ComplexMatrix p = baker_parity(d);
    EXPECT_LT(max_abs(b * p - p * b), 1e-10);
}

TEST(Baker, SectorsPartitionTheSpectrum) {
    const Index d = 120;
    const ComplexMatrix b = baker_unitary(d, BernoulliScheme{});
    const Eigen::SparseMatrix<cplx> p = baker_parity(d).sparseView();
    const auto sec = symmetry_sectors(b, p);
    EXPECT_EQ(sec.plus.dimension() + sec.minus.dimension(), d);

    std::vector<double> pooled;
    for (const auto* s : {&sec.plus, &sec.minus}) {
        const auto part = decompose_sector(*s, SpectrumKind::Unitary);
        pooled.insert(pooled.end(), part.levels.data(), part.levels.data() + part.levels.size());
    }
    const auto full = eig_unitary(b);
    EXPECT_LT(angle_mismatch(pooled, std::vector<double>(full.levels.data(), full.levels.data() + d)), 1e-9);
}

TEST(Ising, TwoSitesWithoutFields) {
    const RealMatrix h = ising_hamiltonian({2, 0.0, 0.0});
    EXPECT_EQ(sorted(eigvalsh(h)), (std::vector<double>{-1, -1, 1, 1}));
}

TEST(Ising, RealSymmetric) {
    const RealMatrix h = ising_hamiltonian(ising_presets::kim_huse(7));
    EXPECT_TRUE(h == h.transpose());
}

TEST(Ising, CommutesWithReflection) {
    for (int n : {4, 7, 10}) {
        const RealMatrix h = ising_hamiltonian(ising_presets::bch(n));
        EXPECT_LT(commutator_norm(h, reflection_operator(n)), 1e-12) << "N=" << n;
    }
}

TEST(Ising, ResourceCap) {
    EXPECT_THROW(ising_hamiltonian({15, 1.0, 1.0}), ResourceLimit);
    EXPECT_THROW(ising_hamiltonian({9, 1.0, 1.0}, 8), ResourceLimit);
    EXPECT_THROW(ising_hamiltonian({1, 1.0, 1.0}), InvalidDimension);
}

TEST(Reflection, TwoSitesSwapsMixedStates) {
    const auto perm = reflection_permutation(2);
    EXPECT_EQ(perm, (std::vector<Index>{0, 2, 1, 3}));
}

TEST(Reflection, SectorDimensionsCountFixedPoints) {
    for (int n = 2; n <= 9; ++n) {
        const RealMatrix h = ising_hamiltonian(ising_presets::bch(n));
        const auto sec = symmetry_sectors(h, reflection_operator(n));
        const Index d = Index{1} << n;
        const Index fixed = Index{1} << ((n + 1) / 2);
        EXPECT_EQ(sec.plus.dimension(), (d + fixed) / 2) << "N=" << n;
        EXPECT_EQ(sec.minus.dimension(), (d - fixed) / 2) << "N=" << n;
    }
}

TEST(Reflection, ThreeSites) {
    const auto sec = symmetry_sectors(ising_hamiltonian(ising_presets::bch(3)), reflection_operator(3));
    EXPECT_EQ(sec.plus.dimension(), 6);
    EXPECT_EQ(sec.minus.dimension(), 2);
}

TEST(Sectors, PooledEigenvaluesMatchFullOperator) {
    const RealMatrix h = ising_hamiltonian(ising_presets::bch(8));
    const auto sec = symmetry_sectors(h, reflection_operator(8));
    std::vector<double> pooled;
    for (const auto* s : {&sec.plus, &sec.minus}) {
        const auto ev = eigvalsh(RealMatrix(s->block));
        pooled.insert(pooled.end(), ev.data(), ev.data() + ev.size());
    }
    std::sort(pooled.begin(), pooled.end());
    const auto full = sorted(eigvalsh(h));
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(pooled[i], full[i], 1e-9);
}

TEST(Sectors, EmbeddedVectorsAreEigenvectorsOfTheFullOperator) {
    const RealMatrix h = ising_hamiltonian(ising_presets::integrable(6));
    const auto sec = symmetry_sectors(h, reflection_operator(6));
    const auto dec = decompose_sector(sec.minus, SpectrumKind::Hermitian);
    const auto& v = std::get<RealMatrix>(dec.vectors);
    ASSERT_EQ(v.rows(), 64);
    const RealMatrix residual = h * v - v * dec.levels.asDiagonal();
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Sectors, RejectsNonSymmetry) {
    const RealMatrix h = ising_hamiltonian({5, 1.0, 0.3});
    // Flipping the last spin anticommutes with its longitudinal field and bond.
    Eigen::SparseMatrix<double> swap(32, 32);
    for (int i = 0; i < 32; ++i) swap.insert(i, i ^ 1) = 1.0;
    EXPECT_THROW(symmetry_sectors(h, swap), NotASymmetry);
}

TEST(Sectors, PoolCombinesDecompositions) {
    const RealMatrix h = ising_hamiltonian(ising_presets::bch(5));
    const auto sec = symmetry_sectors(h, reflection_operator(5));
    const auto pooled = pool(decompose_sector(sec.plus, SpectrumKind::Hermitian),
                             decompose_sector(sec.minus, SpectrumKind::Hermitian));
    EXPECT_EQ(pooled.size(), 32);
    EXPECT_EQ(pooled.basis_dimension(), 32);
}
