#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "relaxometer/error.hpp"
#include "relaxometer/linalg.hpp"
#include "relaxometer/rng.hpp"

using namespace relaxometer;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> normals(Stream s, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = s.normal();
    return v;
}

} // namespace

TEST(Substream, NeighbouringIndicesAreUncorrelated) {
    const auto a = normals(derive_substream(0, 0), 10000);
    const auto b = normals(derive_substream(0, 1), 10000);
    EXPECT_LT(std::abs(correlation(a, b)), 0.05);
}

TEST(Substream, IsAPureFunction) {
    Stream a = derive_substream(7, 3);
    Stream b = derive_substream(7, 3);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.bits(), b.bits());
}

TEST(Substream, SeedChangesFirstOutput) {
    EXPECT_NE(derive_substream(0, 0).bits(), derive_substream(1, 0).bits());
}

TEST(Substream, NoStateCollisionsAcrossManyIndices) {
    std::set<std::array<std::uint64_t, 4>> states;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        states.insert(derive_substream(99, i).engine().state());
    }
    EXPECT_EQ(states.size(), 20000u);
}

TEST(Substream, CellSeedDependsOnKey) {
    EXPECT_EQ(derive_cell_seed(5, "rmt/GOE/D=128"), derive_cell_seed(5, "rmt/GOE/D=128"));
    EXPECT_NE(derive_cell_seed(5, "rmt/GOE/D=128"), derive_cell_seed(5, "rmt/GOE/D=256"));
    EXPECT_NE(derive_cell_seed(5, "rmt/GOE/D=128"), derive_cell_seed(6, "rmt/GOE/D=128"));
}

TEST(Stream, UniformStaysInUnitInterval) {
    Stream s = derive_substream(3, 0);
    double lo = 1, hi = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    EXPECT_LT(lo, 1e-3);
    EXPECT_GT(hi, 1 - 1e-3);
}

TEST(Goe, SymmetricByConstruction) {
    Stream s = derive_substream(1, 0);
    const RealMatrix m = sample_goe(37, s);
    EXPECT_TRUE(m == m.transpose());
}

TEST(Goe, EntryVariances) {
    // D = 4: 6 off-diagonal and 4 diagonal deviates per draw.
    Stream s = derive_substream(11, 0);
    const int draws = 100000;
    double off_sum = 0, off_sq = 0, diag_sq = 0;
    for (int k = 0; k < draws; ++k) {
        const RealMatrix m = sample_goe(4, s);
        for (int i = 0; i < 4; ++i) {
            diag_sq += m(i, i) * m(i, i);
            for (int j = i + 1; j < 4; ++j) {
                off_sum += m(i, j);
                off_sq += m(i, j) * m(i, j);
            }
        }
    }
    const double n_off = 6.0 * draws;
    const double mean = off_sum / n_off;
    const double var = off_sq / n_off - mean * mean;
    EXPECT_LT(std::abs(mean), 3 * std::sqrt(0.5 / n_off));
    EXPECT_NEAR(var, 0.5, 0.025);
    EXPECT_NEAR(diag_sq / (4.0 * draws), 1.0, 0.05);
}

TEST(Goe, RejectsTinyDimension) {
    Stream s = derive_substream(1, 0);
    EXPECT_THROW(sample_goe(1, s), InvalidDimension);
}

TEST(Gue, HermitianWithRealSpectrum) {
    Stream s = derive_substream(2, 0);
    const ComplexMatrix m = sample_gue(40, s);
    EXPECT_TRUE(m == m.adjoint());
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m);
    EXPECT_LT(es.eigenvalues().imag().cwiseAbs().maxCoeff(), 1e-10 * m.norm());
}

TEST(Gue, OffDiagonalModulusVariance) {
    Stream s = derive_substream(12, 0);
    const int draws = 100000;
    double sum = 0;
    for (int k = 0; k < draws; ++k) {
        const ComplexMatrix m = sample_gue(2, s);
        sum += std::norm(m(0, 1));
    }
    EXPECT_NEAR(sum / draws, 0.5, 0.025);
}

TEST(Rp, GammaIsRequired) {
    Stream s = derive_substream(0, 0);
    EnsembleSpec spec{EnsembleKind::RP_GOE, 16, std::nullopt, 1, 0};
    EXPECT_THROW(sample_rp(spec, s), ConfigurationError);
}

TEST(Rp, LargeGammaIsDiagonal) {
    Stream s = derive_substream(0, 0);
    const auto m = std::get<RealMatrix>(sample_rp({EnsembleKind::RP_GOE, 64, 50.0, 1, 0}, s));
    const double diag_scale = m.diagonal().cwiseAbs().maxCoeff();
    RealMatrix off = m;
    off.diagonal().setZero();
    EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-10 * diag_scale);
}

TEST(Rp, OffDiagonalVarianceFollowsCoupling) {
    for (const auto& [gamma, d] : {std::pair{0.0, 64}, std::pair{1.0, 256}}) {
        Stream s = derive_substream(21, 0);
        double sq = 0;
        long n = 0;
        for (int k = 0; k < (d == 64 ? 40 : 4); ++k) {
            const auto m = std::get<RealMatrix>(sample_rp({EnsembleKind::RP_GOE, d, gamma, 1, 0}, s));
            for (int i = 0; i < d; ++i) {
                for (int j = i + 1; j < d; ++j) {
                    sq += m(i, j) * m(i, j);
                    ++n;
                }
            }
        }
        const double expected = 0.5 * std::pow(d, -gamma);
        EXPECT_NEAR(sq / static_cast<double>(n) / expected, 1.0, 0.1) << "gamma " << gamma;
    }
}

TEST(Rp, ComplexVariantIsHermitian) {
    Stream s = derive_substream(4, 0);
    const auto m = std::get<ComplexMatrix>(sample_rp({EnsembleKind::RP_GUE, 32, 1.5, 1, 0}, s));
    EXPECT_TRUE(m == m.adjoint());
}

TEST(Cue, IsUnitary) {
    Stream s = derive_substream(8, 0);
    const ComplexMatrix u = sample_cue(50, s);
    EXPECT_LT(unitarity_defect(u), 1e-12);
}

TEST(EnsembleSpec, Validation) {
    EXPECT_THROW((EnsembleSpec{EnsembleKind::GOE, 1, std::nullopt, 1, 0}.validate()), InvalidDimension);
    EXPECT_THROW((EnsembleSpec{EnsembleKind::GOE, 8, std::nullopt, 0, 0}.validate()), ConfigurationError);
    EXPECT_THROW((EnsembleSpec{EnsembleKind::RP_GUE, 8, std::nullopt, 1, 0}.validate()), ConfigurationError);
    EXPECT_NO_THROW((EnsembleSpec{EnsembleKind::RP_GUE, 8, 2.0, 1, 0}.validate()));
    EXPECT_EQ(parse_ensemble_kind("RP-GUE"), EnsembleKind::RP_GUE);
    EXPECT_THROW(parse_ensemble_kind("GSE"), ConfigurationError);
}
