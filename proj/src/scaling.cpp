#include "relaxometer/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "relaxometer/error.hpp"
#include "relaxometer/parallel.hpp"
#include "relaxometer/relaxation.hpp"

namespace relaxometer {

namespace {

struct Realization {
    double c_avg = 0.0;
    double sigma2 = 0.0;
    double ipr = 0.0;
    bool degenerate_levels = false;
    bool degenerate_gaps = false;
};

std::optional<double> interpolate(const std::vector<std::pair<double, double>>& curve, double x) {
    if (curve.empty() || x < curve.front().first || x > curve.back().first) {
        return std::nullopt;
    }
    auto hi = std::lower_bound(curve.begin(), curve.end(), x, [](const auto& p, double v) { return p.first < v; });
    if (hi->first == x || hi == curve.begin()) {
        return hi->second;
    }
    auto lo = hi - 1;
    const double t = (x - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

SampleSummary summarize(const std::vector<double>& samples) {
    SampleSummary s;
    s.count = static_cast<std::int64_t>(samples.size());
    if (samples.empty()) {
        return s;
    }
    double sum = 0.0;
    for (double v : samples) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : samples) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.variance = ss / static_cast<double>(s.count - 1);
        s.standard_error = std::sqrt(s.variance / static_cast<double>(s.count));
    }
    return s;
}

FluctuationResult ensemble_average(const EnsembleSpec& spec, Fraction f, ObservableSet observables, unsigned threads,
                                   IprConvention ipr_convention) {
    spec.validate();
    const auto part = PartitionSpec::leading(spec.dimension, f);
    const auto n = spec.realizations;
    std::vector<Realization> out(static_cast<std::size_t>(n));

    parallel_for(n, threads, [&](std::int64_t r) {
        Stream rng = derive_substream(spec.master_seed, static_cast<std::uint64_t>(r));
        const auto h = sample_ensemble(spec, rng);
        const auto decomp = std::visit([](const auto& m) { return eigh(m); }, h);
        Realization& slot = out[static_cast<std::size_t>(r)];
        if (observables.c_avg || observables.sigma2) {
            const auto fl = fluctuations(decomp, part, observables.sigma2);
            slot.c_avg = fl.c_avg;
            slot.sigma2 = fl.sigma2;
            slot.degenerate_levels = fl.degenerate_levels;
            slot.degenerate_gaps = fl.degenerate_gaps;
        }
        if (observables.ipr) {
            slot.ipr = eigenstate_ipr(decomp.vectors, ipr_convention).mean;
        }
    });

    FluctuationResult result;
    result.spec = spec;
    result.fraction = f;
    for (const auto& r : out) {
        if (observables.c_avg) result.c_avg_samples.push_back(r.c_avg);
        if (observables.sigma2) result.sigma2_samples.push_back(r.sigma2);
        if (observables.ipr) result.ipr_samples.push_back(r.ipr);
        result.degenerate_level_flags += r.degenerate_levels ? 1 : 0;
        result.degenerate_gap_flags += r.degenerate_gaps ? 1 : 0;
    }
    if (observables.c_avg) result.c_avg = summarize(result.c_avg_samples);
    if (observables.sigma2) result.sigma2 = summarize(result.sigma2_samples);
    if (observables.ipr) result.ipr = summarize(result.ipr_samples);
    return result;
}

ScalingFit power_law_fit(const std::vector<ScalingPoint>& points, FitMode mode, double d_min, bool weighted) {
    ScalingFit fit;
    fit.mode = mode;
    fit.d_min = d_min;
    std::vector<double> xs, ys, ws;
    for (const auto& p : points) {
        if (!(p.dimension > d_min)) {
            continue;
        }
        const double arg = mode == FitMode::DeviationFromUnity ? 1.0 - p.value : p.value;
        if (!(arg > 0.0)) {
            fit.warnings.push_back("D=" + std::to_string(p.dimension) + ": value " + std::to_string(p.value) +
                                   (mode == FitMode::DeviationFromUnity ? " >= 1" : " <= 0") + ", point excluded");
            continue;
        }
        double w = 1.0;
        if (weighted) {
            if (!p.standard_error || !(*p.standard_error > 0.0)) {
                throw InsufficientData("weighted fit needs a positive standard error for every point");
            }
            const double sigma = *p.standard_error / arg;
            w = 1.0 / (sigma * sigma);
        }
        xs.push_back(std::log(p.dimension));
        ys.push_back(std::log(arg));
        ws.push_back(w);
        fit.points.push_back(p);
    }
    if (xs.size() < 3) {
        std::ostringstream msg;
        msg << "power-law fit needs at least 3 usable points above D_min = " << d_min << ", got " << xs.size();
        throw InsufficientData(msg.str());
    }
    const auto n = xs.size();
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw InsufficientData("power-law fit needs at least two distinct sizes");
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - intercept - slope * xs[i];
        rss += ws[i] * r * r;
    }
    // Unweighted: scale by the residual variance. Weighted: absolute errors.
    const double scale = weighted ? 1.0 : rss / static_cast<double>(n - 2);
    const double slope_var = scale / sxx;
    const double intercept_var = scale * (1.0 / sw + mx * mx / sxx);
    fit.b = -slope;
    fit.a = std::exp(intercept);
    fit.b_se = std::sqrt(slope_var);
    fit.a_se = fit.a * std::sqrt(intercept_var);
    fit.residual_sum = rss;
    return fit;
}

std::vector<Index> SweepTable::dimensions() const {
    std::set<Index> s;
    for (const auto& c : cells) s.insert(c.dimension);
    return {s.begin(), s.end()};
}

std::vector<double> SweepTable::gammas() const {
    std::set<double> s;
    for (const auto& c : cells) s.insert(c.gamma);
    return {s.begin(), s.end()};
}

std::vector<std::pair<double, double>> SweepTable::curve(Index dimension) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& c : cells) {
        if (c.dimension == dimension) {
            out.emplace_back(c.gamma, c.mean);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

CrossingResult crossing_detect(const SweepTable& table) {
    const auto dims = table.dimensions();
    if (dims.size() < 2) {
        throw InsufficientData("crossing detection needs at least two sizes");
    }
    CrossingResult res;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        std::map<double, double> lower;
        for (const auto& [g, v] : table.curve(dims[i])) lower[g] = v;
        std::vector<std::pair<double, double>> diff;
        for (const auto& [g, v] : table.curve(dims[i + 1])) {
            if (auto it = lower.find(g); it != lower.end()) {
                diff.emplace_back(g, v - it->second);
            }
        }
        std::optional<double> root;
        for (std::size_t j = 0; j < diff.size(); ++j) {
            const auto [g0, d0] = diff[j];
            if (d0 == 0.0) {
                root = g0;
                continue;
            }
            if (j + 1 < diff.size()) {
                const auto [g1, d1] = diff[j + 1];
                if (d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0)) {
                    root = g0 + d0 * (g1 - g0) / (d0 - d1);
                }
            }
        }
        if (root) {
            res.pairwise.push_back(*root);
        }
    }
    if (!res.pairwise.empty()) {
        res.found = true;
        res.gamma_star = std::accumulate(res.pairwise.begin(), res.pairwise.end(), 0.0) /
                         static_cast<double>(res.pairwise.size());
        const auto [lo, hi] = std::minmax_element(res.pairwise.begin(), res.pairwise.end());
        res.low = *lo;
        res.high = *hi;
    }
    return res;
}

CollapseResult data_collapse(const SweepTable& table, double gamma0) {
    CollapseResult res;
    std::map<Index, std::vector<std::pair<double, double>>> curves;
    for (const auto& c : table.cells) {
        const double x = (c.gamma - gamma0) * std::log(static_cast<double>(c.dimension));
        res.points.push_back({c.gamma, c.dimension, x, c.mean});
        curves[c.dimension].emplace_back(x, c.mean);
    }
    for (auto& [d, curve] : curves) {
        std::sort(curve.begin(), curve.end());
    }
    if (curves.size() < 2) {
        return res;
    }
    double acc = 0.0;
    std::int64_t counted = 0;
    for (const auto& p : res.points) {
        double master = 0.0;
        int contributors = 0;
        for (const auto& [d, curve] : curves) {
            if (d == p.dimension) {
                continue;
            }
            if (auto y = interpolate(curve, p.x)) {
                master += *y;
                ++contributors;
            }
        }
        if (contributors > 0) {
            const double dy = p.y - master / contributors;
            acc += dy * dy;
            ++counted;
        }
    }
    if (counted > 0) {
        res.quality = acc / static_cast<double>(counted);
    }
    return res;
}

double beta_moment(double p, double q, int k) {
    if (!(p > 0.0) || !(q > 0.0) || k < 0) {
        throw DomainError("beta moment needs p, q > 0 and k >= 0");
    }
    if (k == 0) {
        return 1.0;
    }
    return std::exp(std::lgamma(p + k) + std::lgamma(p + q) - std::lgamma(p) - std::lgamma(p + q + k));
}

std::vector<MomentRow> sphere_moment_check(Index dimension, Field field, std::int64_t samples, Stream& rng) {
    if (dimension < 2) {
        throw InvalidDimension("sphere moments need D >= 2");
    }
    if (samples < 1000) {
        throw InsufficientData("sphere moment check needs at least 1000 samples");
    }
    const double d = static_cast<double>(dimension);
    std::vector<double> z4(static_cast<std::size_t>(samples));
    std::vector<double> z22(z4.size());
    std::vector<double> norm(z4.size());
    std::vector<double> amp2(static_cast<std::size_t>(dimension));
    for (std::int64_t s = 0; s < samples; ++s) {
        double total = 0.0;
        for (auto& a : amp2) {
            const double re = rng.normal();
            const double im = field == Field::Complex ? rng.normal() : 0.0;
            a = re * re + im * im;
            total += a;
        }
        const double w1 = amp2[0] / total;
        const double w2 = amp2[1] / total;
        const auto i = static_cast<std::size_t>(s);
        z4[i] = w1 * w1;
        z22[i] = w1 * w2;
        norm[i] = d * z4[i] + d * (d - 1.0) * z22[i];
    }
    const bool real = field == Field::Real;
    const double e4 = real ? beta_moment(0.5, 0.5 * (d - 1.0), 2) : beta_moment(1.0, d - 1.0, 2);
    const double e22 = real ? 1.0 / (d * (d + 2.0)) : 1.0 / (d * (d + 1.0));
    std::vector<MomentRow> rows;
    const auto add = [&](std::string name, const std::vector<double>& v, double analytic) {
        const auto s = summarize(v);
        rows.push_back({std::move(name), s.mean, s.standard_error.value_or(0.0), analytic});
    };
    add("E|z1|^4", z4, e4);
    add("E|z1|^2|z2|^2", z22, e22);
    add("normalization", norm, 1.0);
    return rows;
}

Fraction gue_cavg_identity(Index dimension, Fraction f) {
    if (dimension < 2) {
        throw InvalidDimension("identity needs D >= 2");
    }
    if (!f.divides(dimension) || f.num() >= f.den()) {
        throw PartitionError("f*D must be an integer with 0 < f < 1");
    }
    const __int128 d = dimension;
    const __int128 na = f.times(dimension);
    const __int128 nb = dimension - f.times(dimension);
    const __int128 p = f.num();
    const __int128 q = f.den();
    // [D * nA * nB / (D (D+1))] / [D p (q-p) / q^2]
    __int128 num = d * na * nb * q * q;
    __int128 den = d * (d + 1) * d * p * (q - p);
    const __int128 g = gcd128(num, den);
    num /= g;
    den /= g;
    return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

} // namespace relaxometer
