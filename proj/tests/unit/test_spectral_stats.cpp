#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "relaxometer/error.hpp"
#include "relaxometer/models.hpp"
#include "relaxometer/rng.hpp"
#include "relaxometer/scaling.hpp"
#include "relaxometer/spectral_stats.hpp"

using namespace relaxometer;

namespace {

// Independent Monte Carlo references (relaxometer_oracles).
constexpr double kPoissonRatio = 0.387000, kPoissonRatioSe = 0.000885;
constexpr double kGoeRatio = 0.531648, kGoeRatioSe = 0.001004;

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

// 64 GOE spectra at D = 1000, shared by the spacing and gap-ratio tests.
const std::vector<RealVector>& goe_spectra() {
    static const std::vector<RealVector> spectra = [] {
        std::vector<RealVector> out;
        for (std::uint64_t r = 0; r < 64; ++r) {
            Stream s = derive_substream(31, r);
            out.push_back(eigvalsh(sample_goe(1000, s)));
        }
        return out;
    }();
    return spectra;
}

} // namespace

TEST(Eigenangles, IdentityAndQuarterTurns) {
    const auto id = eigenangles(ComplexMatrix::Identity(5, 5));
    for (double t : id.values) EXPECT_NEAR(t, 0.0, 1e-14);

    ComplexVector diag(4);
    diag << 1.0, cplx(0, 1), -1.0, cplx(0, -1);
    const auto q = eigenangles(ComplexMatrix(diag.asDiagonal()));
    const double pi = std::numbers::pi;
    EXPECT_NEAR(q.values[0], 0.0, 1e-14);
    EXPECT_NEAR(q.values[1], pi / 2, 1e-14);
    EXPECT_NEAR(q.values[2], pi, 1e-14);
    EXPECT_NEAR(q.values[3], 3 * pi / 2, 1e-14);
}

TEST(Eigenangles, RejectsNonUnitary) {
    EXPECT_THROW(eigenangles(ComplexMatrix::Identity(3, 3) * 1.01), NumericalConsistency);
}

TEST(Eigenangles, BakerAnglesLookUniform) {
    const auto a = eigenangles(baker_unitary(2000, BernoulliScheme{}));
    ASSERT_EQ(a.size(), 2000u);
    const auto chi = chi_square_uniformity(a.values, 0.0, 2 * std::numbers::pi, 20);
    EXPECT_GT(chi.p_value, 1e-3);
    EXPECT_EQ(chi.dof, 19);
}

TEST(Unfold, EquallySpacedLevelsGiveUnitSpacings) {
    const auto s = unfold(LevelSequence::energies(RealVector::LinSpaced(200, -3.0, 5.0)));
    for (double x : s) EXPECT_NEAR(x, 1.0, 1e-8);
}

TEST(Unfold, CircularUsesTheWrap) {
    RealVector t(60);
    for (int k = 0; k < 60; ++k) t[k] = 2 * std::numbers::pi * k / 60.0;
    const auto s = unfold(LevelSequence::angles(t), default_unfolding(LevelKind::Eigenangle));
    EXPECT_EQ(s.size(), 60u);
    for (double x : s) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(Unfold, NeedsFiftyLevels) {
    EXPECT_THROW(unfold(LevelSequence::energies(RealVector::LinSpaced(49, 0.0, 1.0))), InsufficientData);
    UnfoldOptions circ{UnfoldMethod::CircularUniform};
    EXPECT_THROW(unfold(LevelSequence::energies(RealVector::LinSpaced(60, 0.0, 1.0)), circ), ConfigurationError);
}

TEST(Unfold, GoeSpacingsFollowWignerSurmise) {
    std::vector<double> pooled;
    for (const auto& ev : goe_spectra()) {
        const auto sp = unfold(LevelSequence::energies(ev));
        pooled.insert(pooled.end(), sp.begin(), sp.end());
    }
    const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
    EXPECT_NEAR(mean, 1.0, 1e-2);
    EXPECT_LT(ks_distance(pooled, wigner_cdf_goe), 0.03);
    EXPECT_GT(ks_distance(pooled, poisson_cdf), 0.15);
}

TEST(GapRatio, PoissonLevelsMatchReference) {
    Stream s = derive_substream(41, 0);
    std::vector<double> r;
    for (int b = 0; b < 100; ++b) {
        RealVector lv(1002);
        for (auto& x : lv) x = s.uniform();
        const auto part = gap_ratios(LevelSequence::energies(lv));
        r.insert(r.end(), part.begin(), part.end());
    }
    const auto sum = summarize(r);
    EXPECT_LT(std::abs(sum.mean - kPoissonRatio), 3 * combined(*sum.standard_error, kPoissonRatioSe));
}

TEST(GapRatio, GoeLevelsMatchReference) {
    std::vector<double> r;
    for (const auto& ev : goe_spectra()) {
        const auto part = gap_ratios(LevelSequence::energies(ev));
        r.insert(r.end(), part.begin(), part.end());
    }
    const auto sum = summarize(r);
    EXPECT_LT(std::abs(sum.mean - kGoeRatio), 3 * combined(*sum.standard_error, kGoeRatioSe));
}

TEST(GapRatio, CircularSequenceWrapsAround) {
    RealVector t(3);
    t << 0.0, 1.0, 3.0;
    EXPECT_EQ(gap_ratios(LevelSequence::angles(t)).size(), 3u);
    EXPECT_EQ(gap_ratios(LevelSequence::energies(t)).size(), 1u);
    EXPECT_DOUBLE_EQ(mean_gap_ratio(LevelSequence::energies(t)), 0.5);
}

TEST(Wigner, DensityAndCdf) {
    EXPECT_EQ(wigner_surmise_goe(0.0), 0.0);
    EXPECT_THROW(wigner_surmise_goe(-1.0), DomainError);
    EXPECT_NEAR(wigner_cdf_goe(50.0), 1.0, 1e-15);
    // Unit mean spacing.
    double m = 0;
    for (int i = 0; i < 100000; ++i) {
        const double s = (i + 0.5) * 1e-4;
        m += s * wigner_surmise_goe(s) * 1e-4;
    }
    EXPECT_NEAR(m, 1.0, 1e-6);
}

TEST(Ks, ExactSmallSample) {
    // Sample {0.5} against U(0,1): the empirical jump at 0.5 gives 1/2.
    EXPECT_DOUBLE_EQ(ks_distance({0.5}, [](double x) { return x; }), 0.5);
}

TEST(Histogram, DensityIntegratesToOne) {
    Stream s = derive_substream(6, 0);
    std::vector<double> v(5000);
    for (auto& x : v) x = s.normal();
    const auto h = histogram(v);
    double area = 0;
    for (std::size_t i = 0; i < h.density.size(); ++i) area += h.density[i] * (h.edges[i + 1] - h.edges[i]);
    EXPECT_NEAR(area, 1.0, 1e-12);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}), 5000);
    EXPECT_EQ(histogram(v, 7).counts.size(), 7u);
}
