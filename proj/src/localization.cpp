#include "relaxometer/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "relaxometer/error.hpp"
#include "relaxometer/relaxation.hpp"

namespace relaxometer {

namespace {

// |<phi_i|psi_k>|^2 as a (basis state) x (vector) matrix.
RealMatrix weights(const Eigenvectors& vectors, const std::optional<ComplexMatrix>& basis) {
    return std::visit(
        [&](const auto& v) -> RealMatrix {
            if (!basis) {
                return v.cwiseAbs2();
            }
            if (basis->rows() != v.rows()) {
                throw InvalidDimension("basis and vectors live in different spaces");
            }
            return (basis->adjoint() * v.template cast<cplx>()).cwiseAbs2();
        },
        vectors);
}

IprResult finish(RealVector sums, IprConvention convention, Index dimension) {
    IprResult r;
    r.convention = convention;
    if (convention == IprConvention::DScaled) {
        sums *= static_cast<double>(dimension);
    }
    r.values.assign(sums.data(), sums.data() + sums.size());
    r.mean = sums.mean();
    return r;
}

Index rows_of(const Eigenvectors& v) {
    return std::visit([](const auto& m) { return m.rows(); }, v);
}

} // namespace

IprResult eigenstate_ipr(const Eigenvectors& vectors, IprConvention convention,
                         const std::optional<ComplexMatrix>& basis) {
    const RealMatrix w = weights(vectors, basis);
    return finish(w.cwiseAbs2().colwise().sum().transpose(), convention, rows_of(vectors));
}

double mean_eigenstate_ipr(const SpectralDecomposition& decomp, double bulk_fraction, IprConvention convention) {
    if (!(bulk_fraction > 0.0 && bulk_fraction <= 1.0)) {
        throw ConfigurationError("bulk fraction must lie in (0, 1]");
    }
    const auto ipr = eigenstate_ipr(decomp.vectors, convention);
    const auto n = ipr.values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return decomp.levels[static_cast<Index>(a)] < decomp.levels[static_cast<Index>(b)]; });
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(bulk_fraction * static_cast<double>(n))));
    const auto start = (n - keep) / 2;
    double acc = 0.0;
    for (std::size_t i = start; i < start + keep; ++i) {
        acc += ipr.values[order[i]];
    }
    return acc / static_cast<double>(keep);
}

IprResult basis_state_ipr(const Eigenvectors& vectors, IprConvention convention,
                          const std::optional<ComplexMatrix>& basis) {
    const RealMatrix w = weights(vectors, basis);
    return finish(w.cwiseAbs2().rowwise().sum(), convention, rows_of(vectors));
}

FractalDimension fractal_dimension(const std::vector<std::pair<double, double>>& ipr_means, double confidence) {
    std::set<double> sizes;
    for (const auto& [d, ipr] : ipr_means) {
        if (!(d > 0.0) || !(ipr > 0.0)) {
            throw DomainError("sizes and IPR values must be positive");
        }
        sizes.insert(d);
    }
    if (sizes.size() < 3) {
        throw InsufficientData("fractal dimension needs at least 3 distinct sizes");
    }
    const auto n = static_cast<double>(ipr_means.size());
    double sx = 0, sy = 0;
    for (const auto& [d, ipr] : ipr_means) {
        sx += std::log(d);
        sy += std::log(ipr);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [d, ipr] : ipr_means) {
        sxx += (std::log(d) - mx) * (std::log(d) - mx);
        sxy += (std::log(d) - mx) * (std::log(ipr) - my);
    }
    const double slope = sxy / sxx;
    double rss = 0;
    for (const auto& [d, ipr] : ipr_means) {
        const double r = std::log(ipr) - my - slope * (std::log(d) - mx);
        rss += r * r;
    }
    FractalDimension out;
    out.value = -slope;
    out.standard_error = n > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    boost::math::students_t t(n - 2.0);
    const double half = boost::math::quantile(boost::math::complement(t, 0.5 * (1.0 - confidence))) * out.standard_error;
    out.ci_low = out.value - half;
    out.ci_high = out.value + half;
    return out;
}

IdentityCheck cavg_ipr_identity_check(const Eigenvectors& vectors) {
    const Index d = rows_of(vectors);
    const Index n = std::visit([](const auto& m) { return m.cols(); }, vectors);
    SpectralDecomposition decomp{SpectrumKind::Hermitian, RealVector::LinSpaced(n, 0.0, 1.0), vectors};
    const auto part = PartitionSpec::from_indices(d, {0});

    const RealVector w = std::visit([](const auto& m) -> RealVector { return m.row(0).cwiseAbs2().transpose(); }, vectors);
    IdentityCheck out;
    out.lhs = c_avg(decomp, part).value;
    out.rhs = (w.sum() - w.squaredNorm()) / (1.0 - 1.0 / static_cast<double>(d));
    out.difference = std::abs(out.lhs - out.rhs);
    return out;
}

} // namespace relaxometer
