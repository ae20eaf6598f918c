#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relaxometer/fraction.hpp"
#include "relaxometer/localization.hpp"
#include "relaxometer/rng.hpp"

namespace relaxometer {

struct ObservableSet {
    bool c_avg = true;
    bool sigma2 = true;
    bool ipr = false;
};

/// Sample statistics of one observable across realizations.
struct SampleSummary {
    double mean = 0.0;
    double variance = 0.0;
    /// Absent for a single realization.
    std::optional<double> standard_error;
    std::int64_t count = 0;
};

/// Sums in index order so the result does not depend on scheduling.
SampleSummary summarize(const std::vector<double>& samples);

struct FluctuationResult {
    EnsembleSpec spec;
    Fraction fraction;
    /// Per-realization values, indexed by realization; empty when not requested.
    std::vector<double> c_avg_samples;
    std::vector<double> sigma2_samples;
    std::vector<double> ipr_samples;
    std::optional<SampleSummary> c_avg;
    std::optional<SampleSummary> sigma2;
    std::optional<SampleSummary> ipr;
    std::int64_t degenerate_level_flags = 0;
    std::int64_t degenerate_gap_flags = 0;
};

/// Realization r draws from derive_substream(spec.master_seed, r), so any
/// realization can be recomputed on its own. `threads` = 0 uses every core.
FluctuationResult ensemble_average(const EnsembleSpec& spec, Fraction f, ObservableSet observables = {},
                                   unsigned threads = 1, IprConvention ipr_convention = IprConvention::Bare);

enum class FitMode { DeviationFromUnity, PlainPower };

struct ScalingPoint {
    double dimension = 0.0;
    double value = 0.0;
    std::optional<double> standard_error;
};

/// deviation-from-unity: 1 - value = a D^-b. plain-power: value = a D^-b.
struct ScalingFit {
    FitMode mode = FitMode::PlainPower;
    double a = 0.0;
    double b = 0.0;
    double a_se = 0.0;
    double b_se = 0.0;
    double d_min = 0.0;
    double residual_sum = 0.0;
    std::vector<ScalingPoint> points;
    std::vector<std::string> warnings;
};

/// Least squares on logs over the points with D > d_min (at least 3 needed).
/// Points with value >= 1 in deviation mode are dropped with a warning.
/// With `weighted`, each log-point is weighted by its propagated standard error.
ScalingFit power_law_fit(const std::vector<ScalingPoint>& points, FitMode mode, double d_min = 200.0,
                         bool weighted = false);

struct SweepCell {
    double gamma = 0.0;
    Index dimension = 0;
    double mean = 0.0;
    std::optional<double> standard_error;
    std::int64_t realizations = 0;
    std::uint64_t seed = 0;
};

/// <c_avg> on a (gamma, D) grid.
struct SweepTable {
    std::vector<SweepCell> cells;

    std::vector<Index> dimensions() const;
    std::vector<double> gammas() const;
    /// (gamma, mean) sorted by gamma for one size.
    std::vector<std::pair<double, double>> curve(Index dimension) const;
};

struct CrossingResult {
    bool found = false;
    /// Mean of the pairwise crossings.
    double gamma_star = 0.0;
    double low = 0.0;
    double high = 0.0;
    /// One entry per adjacent size pair that crosses.
    std::vector<double> pairwise;
};

/// Linear interpolation of the difference of adjacent-size curves; the last
/// sign change along gamma is taken for each pair.
CrossingResult crossing_detect(const SweepTable& table);

struct CollapsePoint {
    double gamma = 0.0;
    Index dimension = 0;
    double x = 0.0;
    double y = 0.0;
};

struct CollapseResult {
    std::vector<CollapsePoint> points;
    /// Mean squared vertical distance to the master curve interpolated from the
    /// other sizes; absent with a single size.
    std::optional<double> quality;
};

CollapseResult data_collapse(const SweepTable& table, double gamma0 = 2.0);

/// B(p + k, q) / B(p, q).
double beta_moment(double p, double q, int k);

enum class Field { Real, Complex };

struct MomentRow {
    std::string name;
    double empirical = 0.0;
    double standard_error = 0.0;
    double analytic = 0.0;
};

/// E|z1|^4, E|z1|^2|z2|^2 and the normalization sum D E|z1|^4 + D(D-1) E|z1 z2|^2
/// over random unit vectors, against the Beta-moment values.
std::vector<MomentRow> sphere_moment_check(Index dimension, Field field, std::int64_t samples, Stream& rng);

/// D (fD) ((1-f)D) / (D(D+1)) / (D f(1-f)) in exact arithmetic; equals D/(D+1).
Fraction gue_cavg_identity(Index dimension, Fraction f);

} // namespace relaxometer
