#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "relaxometer/linalg.hpp"

namespace relaxometer {

enum class LevelKind { Energy, Eigenangle };

/// Sorted spectrum. Eigenangles live in [0, 2pi) and are adjacent across the wrap.
struct LevelSequence {
    LevelKind kind = LevelKind::Energy;
    std::vector<double> values;

    static LevelSequence energies(const RealVector& levels);
    static LevelSequence angles(const RealVector& thetas);
    std::size_t size() const { return values.size(); }
};

/// Eigenangles of a unitary; throws NumericalConsistency when max|U^dag U - 1| > 1e-10.
LevelSequence eigenangles(const ComplexMatrix& u);

enum class UnfoldMethod { Polynomial, CircularUniform };

struct UnfoldOptions {
    UnfoldMethod method = UnfoldMethod::Polynomial;
    int degree = 10;
    /// Fraction of spacings dropped at each spectral edge (polynomial method only).
    double edge_trim = 0.05;
};

/// Nearest-neighbour spacings of the unfolded spectrum, rescaled to mean 1.
/// Needs at least 50 levels.
std::vector<double> unfold(const LevelSequence& levels, const UnfoldOptions& options = {});

/// Default method for the sequence kind: polynomial for energies,
/// circular-uniform for eigenangles.
UnfoldOptions default_unfolding(LevelKind kind);

double wigner_surmise_goe(double s);
double wigner_cdf_goe(double s);
double poisson_cdf(double s);

/// Mean of min(s_n, s_n+1) / max(s_n, s_n+1); needs at least 3 levels.
double mean_gap_ratio(const LevelSequence& levels);

/// Per-position ratios, for pooling across realizations.
std::vector<double> gap_ratios(const LevelSequence& levels);

/// sup_s |F_empirical(s) - cdf(s)|.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

/// Pearson chi-square test of uniformity on [lo, hi) with equal-width bins.
ChiSquareResult chi_square_uniformity(const std::vector<double>& values, double lo, double hi, int bins);

struct Histogram {
    std::vector<double> edges;
    std::vector<std::int64_t> counts;
    /// counts normalized to unit area.
    std::vector<double> density;
};

/// Freedman-Diaconis bin width unless `bins` is given.
Histogram histogram(const std::vector<double>& values, std::optional<int> bins = std::nullopt);

} // namespace relaxometer
