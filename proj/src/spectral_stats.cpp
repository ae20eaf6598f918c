#include "relaxometer/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "relaxometer/error.hpp"

namespace relaxometer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMinUnfoldLevels = 50;

std::vector<double> sorted_copy(const RealVector& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

void rescale_to_unit_mean(std::vector<double>& s) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    if (!(mean > 0.0)) {
        throw NumericalConsistency("unfolded spacings have non-positive mean");
    }
    for (double& x : s) {
        x /= mean;
    }
}

std::vector<double> raw_spacings(const LevelSequence& levels) {
    const auto& v = levels.values;
    std::vector<double> s;
    s.reserve(v.size());
    for (std::size_t i = 1; i < v.size(); ++i) {
        s.push_back(v[i] - v[i - 1]);
    }
    if (levels.kind == LevelKind::Eigenangle) {
        s.push_back(v.front() + kTwoPi - v.back());
    }
    return s;
}

std::vector<double> polynomial_unfold(const std::vector<double>& e, int degree, double trim) {
    const auto n = static_cast<Index>(e.size());
    if (degree < 1 || degree >= n) {
        throw ConfigurationError("unfolding degree must lie in [1, number of levels)");
    }
    if (!(trim >= 0.0 && trim < 0.5)) {
        throw ConfigurationError("edge trim must lie in [0, 0.5)");
    }
    const double mid = 0.5 * (e.front() + e.back());
    const double half = 0.5 * (e.back() - e.front());
    if (!(half > 0.0)) {
        throw NumericalConsistency("cannot unfold a spectrum of zero width");
    }

    // Chebyshev basis on the rescaled energies keeps the fit well conditioned.
    RealMatrix basis(n, degree + 1);
    RealVector staircase(n);
    for (Index i = 0; i < n; ++i) {
        const double x = (e[static_cast<std::size_t>(i)] - mid) / half;
        basis(i, 0) = 1.0;
        basis(i, 1) = x;
        for (int k = 2; k <= degree; ++k) {
            basis(i, k) = 2.0 * x * basis(i, k - 1) - basis(i, k - 2);
        }
        staircase[i] = static_cast<double>(i) + 0.5;
    }
    const RealVector coeffs = basis.colPivHouseholderQr().solve(staircase);
    const RealVector smooth = basis * coeffs;

    const auto m = static_cast<std::size_t>(n - 1);
    const auto cut = static_cast<std::size_t>(std::floor(trim * static_cast<double>(m)));
    std::vector<double> s;
    s.reserve(m - 2 * cut);
    for (std::size_t i = cut; i < m - cut; ++i) {
        s.push_back(smooth[static_cast<Index>(i + 1)] - smooth[static_cast<Index>(i)]);
    }
    return s;
}

} // namespace

LevelSequence LevelSequence::energies(const RealVector& levels) { return {LevelKind::Energy, sorted_copy(levels)}; }

LevelSequence LevelSequence::angles(const RealVector& thetas) {
    LevelSequence seq{LevelKind::Eigenangle, {}};
    seq.values.reserve(static_cast<std::size_t>(thetas.size()));
    for (Index i = 0; i < thetas.size(); ++i) {
        double t = std::fmod(thetas[i], kTwoPi);
        if (t < 0.0) {
            t += kTwoPi;
        }
        seq.values.push_back(t >= kTwoPi ? 0.0 : t);
    }
    std::sort(seq.values.begin(), seq.values.end());
    return seq;
}

LevelSequence eigenangles(const ComplexMatrix& u) {
    const double defect = unitarity_defect(u);
    if (defect > 1e-10) {
        throw NumericalConsistency("matrix is not unitary (defect " + std::to_string(defect) + ")");
    }
    return LevelSequence::angles(eig_unitary(u).levels);
}

UnfoldOptions default_unfolding(LevelKind kind) {
    UnfoldOptions o;
    if (kind == LevelKind::Eigenangle) {
        o.method = UnfoldMethod::CircularUniform;
    }
    return o;
}

std::vector<double> unfold(const LevelSequence& levels, const UnfoldOptions& options) {
    if (levels.size() < kMinUnfoldLevels) {
        throw InsufficientData("unfolding needs at least 50 levels, got " + std::to_string(levels.size()));
    }
    std::vector<double> s;
    if (options.method == UnfoldMethod::CircularUniform) {
        if (levels.kind != LevelKind::Eigenangle) {
            throw ConfigurationError("circular-uniform unfolding applies to eigenangles only");
        }
        s = raw_spacings(levels);
        const double scale = static_cast<double>(levels.size()) / kTwoPi;
        for (double& x : s) {
            x *= scale;
        }
    } else {
        s = polynomial_unfold(levels.values, options.degree, options.edge_trim);
    }
    rescale_to_unit_mean(s);
    return s;
}

double wigner_surmise_goe(double s) {
    if (s < 0.0) {
        throw DomainError("spacing must be non-negative");
    }
    const double pi = std::numbers::pi;
    return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
}

double wigner_cdf_goe(double s) { return s <= 0.0 ? 0.0 : -std::expm1(-0.25 * std::numbers::pi * s * s); }

double poisson_cdf(double s) { return s <= 0.0 ? 0.0 : -std::expm1(-s); }

std::vector<double> gap_ratios(const LevelSequence& levels) {
    if (levels.size() < 3) {
        throw InsufficientData("gap ratio needs at least 3 levels");
    }
    const auto s = raw_spacings(levels);
    const bool circular = levels.kind == LevelKind::Eigenangle;
    const std::size_t count = circular ? s.size() : s.size() - 1;
    std::vector<double> r;
    r.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double a = s[n];
        const double b = s[(n + 1) % s.size()];
        const double hi = std::max(a, b);
        if (hi > 0.0) {
            r.push_back(std::min(a, b) / hi);
        }
    }
    return r;
}

double mean_gap_ratio(const LevelSequence& levels) {
    const auto r = gap_ratios(levels);
    if (r.empty()) {
        throw InsufficientData("all level gaps vanish");
    }
    return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw InsufficientData("KS distance of an empty sample");
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

ChiSquareResult chi_square_uniformity(const std::vector<double>& values, double lo, double hi, int bins) {
    if (bins < 2 || !(hi > lo)) {
        throw ConfigurationError("chi-square test needs at least 2 bins on a non-empty range");
    }
    if (values.empty()) {
        throw InsufficientData("chi-square test of an empty sample");
    }
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        auto b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        if (b < 0 || b >= bins) {
            throw DomainError("value outside the tested range");
        }
        ++counts[static_cast<std::size_t>(b)];
    }
    const double expected = static_cast<double>(values.size()) / bins;
    double chi2 = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    boost::math::chi_squared dist(bins - 1);
    return {chi2, bins - 1, boost::math::cdf(boost::math::complement(dist, chi2))};
}

Histogram histogram(const std::vector<double>& values, std::optional<int> bins) {
    if (values.size() < 2) {
        throw InsufficientData("histogram needs at least 2 values");
    }
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    const double lo = v.front();
    const double hi = v.back();
    int nbins = 1;
    if (bins) {
        if (*bins < 1) {
            throw ConfigurationError("histogram bin count must be positive");
        }
        nbins = *bins;
    } else {
        auto quantile = [&](double q) {
            const double pos = q * static_cast<double>(v.size() - 1);
            const auto i = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(i);
            return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
        };
        const double iqr = quantile(0.75) - quantile(0.25);
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
        if (width > 0.0 && hi > lo) {
            nbins = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
        }
    }
    Histogram h;
    const double span = hi > lo ? hi - lo : 1.0;
    const double w = span / nbins;
    h.edges.resize(static_cast<std::size_t>(nbins) + 1);
    for (int i = 0; i <= nbins; ++i) {
        h.edges[static_cast<std::size_t>(i)] = lo + w * i;
    }
    h.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (double x : v) {
        auto b = static_cast<int>((x - lo) / w);
        ++h.counts[static_cast<std::size_t>(std::clamp(b, 0, nbins - 1))];
    }
    const double norm = static_cast<double>(v.size()) * w;
    h.density.reserve(h.counts.size());
    for (auto c : h.counts) {
        h.density.push_back(static_cast<double>(c) / norm);
    }
    return h;
}

} // namespace relaxometer
