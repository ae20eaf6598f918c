#include "relaxometer/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "relaxometer/error.hpp"

namespace relaxometer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kImaginaryTolerance = 1e-10;
constexpr Index kTimeChunk = 1024;

template <class Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Dense<Scalar> gather_rows(const Dense<Scalar>& vectors, const std::vector<Index>& rows) {
    Dense<Scalar> out(static_cast<Index>(rows.size()), vectors.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = vectors.row(rows[i]);
    }
    return out;
}

bool is_contiguous_prefix(const std::vector<Index>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] != static_cast<Index>(i)) {
            return false;
        }
    }
    return true;
}

template <class Scalar>
Dense<Scalar> rows_in(const Dense<Scalar>& vectors, const std::vector<Index>& rows) {
    if (is_contiguous_prefix(rows)) {
        return vectors.topRows(static_cast<Index>(rows.size()));
    }
    return gather_rows(vectors, rows);
}

void check_compatible(const SpectralDecomposition& decomp, const PartitionSpec& part) {
    if (decomp.basis_dimension() != part.dimension()) {
        throw InvalidDimension("partition dimension " + std::to_string(part.dimension()) +
                               " does not match the decomposition basis " + std::to_string(decomp.basis_dimension()));
    }
    if (decomp.size() == 0) {
        throw InvalidDimension("empty decomposition");
    }
}

double normalization(const SpectralDecomposition& decomp, const PartitionSpec& part) {
    const double f = part.fraction().value();
    return static_cast<double>(decomp.size()) * f * (1.0 - f);
}

template <class Scalar>
Fluctuations fluctuations_impl(const Dense<Scalar>& vectors, const SpectralDecomposition& decomp,
                               const PartitionSpec& part, bool with_sigma2) {
    const Dense<Scalar> psi_a = rows_in(vectors, part.indices_a());
    const Index n = vectors.cols();
    const double norm = normalization(decomp, part);

    Fluctuations out;
    const Eigen::VectorXd w = psi_a.cwiseAbs2().colwise().sum().transpose();
    double acc = 0.0;
    for (Index k = 0; k < n; ++k) {
        acc += w[k] * (1.0 - w[k]);
    }
    out.c_avg = acc / norm;
    out.degenerate_levels = has_degenerate_levels(decomp.levels, decomp.kind == SpectrumKind::Unitary);

    if (with_sigma2) {
        // Only the strict lower triangle of <psi_k1|P_A|psi_k2> is needed.
        Dense<Scalar> overlap = Dense<Scalar>::Zero(n, n);
        overlap.template selfadjointView<Eigen::Lower>().rankUpdate(psi_a.adjoint());
        double quartic = 0.0;
        for (Index c = 0; c < n; ++c) {
            for (Index r = c + 1; r < n; ++r) {
                const double m2 = std::norm(overlap(r, c));
                quartic += m2 * m2;
            }
        }
        out.sigma2 = 2.0 * quartic / (norm * norm);
        out.degenerate_gaps = has_degenerate_gaps(decomp.levels);
    }
    return out;
}

// W_{k1 k2} = <psi_k1|P_A|psi_k2> <psi_k2|P_B|psi_k1>, so that
// D_s f(1-f) c(t) = sum_{k1,k2} exp(i(w1 - w2)t) W_{k1 k2}.
class CorrelationEvaluator {
  public:
    CorrelationEvaluator(const SpectralDecomposition& decomp, const PartitionSpec& part)
        : norm_(normalization(decomp, part)), rates_(decomp.size()) {
        for (Index k = 0; k < decomp.size(); ++k) {
            rates_[k] = decomp.phase_rate(k);
        }
        std::visit(
            [&](const auto& v) {
                using M = std::decay_t<decltype(v)>;
                const M psi_a = rows_in(v, part.indices_a());
                const M psi_b = rows_in(v, part.indices_b());
                const M a = psi_a.adjoint() * psi_a;
                const M b = psi_b.adjoint() * psi_b;
                weights_ = a.cwiseProduct(b.transpose()).template cast<cplx>();
            },
            decomp.vectors);
    }

    void evaluate(std::span<const double> times, std::vector<double>& out) {
        const Index n = rates_.size();
        for (std::size_t offset = 0; offset < times.size(); offset += kTimeChunk) {
            const Index m = static_cast<Index>(std::min<std::size_t>(kTimeChunk, times.size() - offset));
            ComplexMatrix phase(n, m);
            for (Index j = 0; j < m; ++j) {
                const double t = times[offset + static_cast<std::size_t>(j)];
                for (Index k = 0; k < n; ++k) {
                    phase(k, j) = std::polar(1.0, std::fmod(rates_[k] * t, kTwoPi));
                }
            }
            ComplexMatrix y = weights_ * phase.conjugate();
            for (Index j = 0; j < m; ++j) {
                if (times[offset + static_cast<std::size_t>(j)] == 0.0) {
                    // P_A P_B = 0 exactly; the expansion would only return rounding noise.
                    out.push_back(0.0);
                    continue;
                }
                const cplx c = (phase.col(j).array() * y.col(j).array()).sum() / norm_;
                if (std::abs(c.imag()) > kImaginaryTolerance * std::max(1.0, std::abs(c.real()))) {
                    throw NumericalConsistency("correlation has imaginary residue " + std::to_string(c.imag()));
                }
                out.push_back(c.real());
            }
        }
    }

  private:
    double norm_;
    RealVector rates_;
    ComplexMatrix weights_;
};

} // namespace

PartitionSpec::PartitionSpec(Index dimension, Fraction f, std::vector<Index> indices)
    : dimension_(dimension), fraction_(f), indices_a_(std::move(indices)) {}

PartitionSpec PartitionSpec::leading(Index dimension, Fraction f) {
    if (dimension < 2) {
        throw PartitionError("partition needs dimension >= 2");
    }
    if (!(f.num() > 0 && f.num() < f.den())) {
        throw PartitionError("partition fraction " + f.str() + " must lie strictly between 0 and 1");
    }
    if (!f.divides(dimension)) {
        throw PartitionError("f*D = " + f.str() + "*" + std::to_string(dimension) + " is not an integer");
    }
    std::vector<Index> idx(static_cast<std::size_t>(f.times(dimension)));
    std::iota(idx.begin(), idx.end(), Index{0});
    return {dimension, f, std::move(idx)};
}

PartitionSpec PartitionSpec::from_indices(Index dimension, std::vector<Index> indices_a) {
    const auto size = static_cast<Index>(indices_a.size());
    if (size == 0 || size >= dimension) {
        throw PartitionError("subspace A must be a non-empty proper subset");
    }
    std::vector<bool> seen(static_cast<std::size_t>(dimension), false);
    for (Index i : indices_a) {
        if (i < 0 || i >= dimension) {
            throw PartitionError("partition index " + std::to_string(i) + " out of range");
        }
        if (seen[static_cast<std::size_t>(i)]) {
            throw PartitionError("duplicate partition index " + std::to_string(i));
        }
        seen[static_cast<std::size_t>(i)] = true;
    }
    return {dimension, Fraction(size, dimension), std::move(indices_a)};
}

std::vector<bool> PartitionSpec::mask_a() const {
    std::vector<bool> mask(static_cast<std::size_t>(dimension_), false);
    for (Index i : indices_a_) {
        mask[static_cast<std::size_t>(i)] = true;
    }
    return mask;
}

std::vector<Index> PartitionSpec::indices_b() const {
    const auto mask = mask_a();
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(dimension_) - indices_a_.size());
    for (Index i = 0; i < dimension_; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) {
            out.push_back(i);
        }
    }
    return out;
}

PartitionSpec PartitionSpec::complement() const { return from_indices(dimension_, indices_b()); }

bool has_degenerate_levels(const RealVector& levels, bool circular, double rel_tol) {
    if (levels.size() < 2) {
        return false;
    }
    std::vector<double> sorted(levels.data(), levels.data() + levels.size());
    std::sort(sorted.begin(), sorted.end());
    const double width = circular ? kTwoPi : sorted.back() - sorted.front();
    const double tol = rel_tol * width;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] - sorted[i - 1] < tol) {
            return true;
        }
    }
    return circular && sorted.front() + kTwoPi - sorted.back() < tol;
}

bool has_degenerate_gaps(const RealVector& levels, double rel_tol) {
    const Index n = levels.size();
    if (n < 3) {
        return false;
    }
    std::vector<double> sorted(levels.data(), levels.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double width = sorted.back() - sorted.front();
    std::vector<double> gaps;
    gaps.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            gaps.push_back(sorted[static_cast<std::size_t>(j)] - sorted[static_cast<std::size_t>(i)]);
        }
    }
    std::sort(gaps.begin(), gaps.end());
    const double tol = rel_tol * width;
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        if (gaps[i] - gaps[i - 1] < tol) {
            return true;
        }
    }
    return false;
}

Fluctuations fluctuations(const SpectralDecomposition& decomp, const PartitionSpec& part, bool with_sigma2) {
    check_compatible(decomp, part);
    return std::visit([&](const auto& v) { return fluctuations_impl(v, decomp, part, with_sigma2); }, decomp.vectors);
}

FlaggedValue c_avg(const SpectralDecomposition& decomp, const PartitionSpec& part) {
    const auto fl = fluctuations(decomp, part, false);
    return {fl.c_avg, fl.degenerate_levels};
}

FlaggedValue sigma2(const SpectralDecomposition& decomp, const PartitionSpec& part) {
    const auto fl = fluctuations(decomp, part, true);
    return {fl.sigma2, fl.degenerate_gaps || fl.degenerate_levels};
}

std::vector<double> correlation_series(const SpectralDecomposition& decomp, const PartitionSpec& part,
                                       std::span<const double> times) {
    check_compatible(decomp, part);
    if (times.empty()) {
        throw InsufficientData("correlation_series needs at least one time");
    }
    if (decomp.kind == SpectrumKind::Unitary) {
        for (double t : times) {
            if (t != std::round(t)) {
                throw DomainError("unitary dynamics is only defined at integer times");
            }
        }
    }
    CorrelationEvaluator eval(decomp, part);
    std::vector<double> out;
    out.reserve(times.size());
    eval.evaluate(times, out);
    return out;
}

OracleEstimate time_average_oracle(const SpectralDecomposition& decomp, const PartitionSpec& part, double horizon,
                                   std::int64_t samples) {
    check_compatible(decomp, part);
    if (!(horizon > 0.0) || samples < 1) {
        throw DomainError("oracle needs a positive horizon and at least one sample");
    }
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    const bool unitary = decomp.kind == SpectrumKind::Unitary;
    const auto steps = static_cast<std::int64_t>(std::floor(horizon));
    const bool every_step = unitary && samples >= steps;
    const std::int64_t total = every_step ? steps : samples;

    CorrelationEvaluator eval(decomp, part);
    std::vector<double> times;
    std::vector<double> values;
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t count = 0;
    for (std::int64_t start = 0; start < total; start += 16 * kTimeChunk) {
        const std::int64_t stop = std::min(total, start + 16 * kTimeChunk);
        times.clear();
        for (std::int64_t j = start + 1; j <= stop; ++j) {
            const double u = std::fmod(static_cast<double>(j) * golden, 1.0);
            if (every_step) {
                times.push_back(static_cast<double>(j));
            } else if (unitary) {
                times.push_back(1.0 + std::floor(u * static_cast<double>(steps)));
            } else {
                times.push_back(u * horizon);
            }
        }
        values.clear();
        eval.evaluate(times, values);
        for (double v : values) {
            ++count;
            const double delta = v - mean;
            mean += delta / static_cast<double>(count);
            m2 += delta * (v - mean);
        }
    }
    return {mean, m2 / static_cast<double>(count), count};
}

RmtPrediction goe_prediction(Index dimension) {
    if (dimension < 2) {
        throw InvalidDimension("GOE prediction needs D >= 2");
    }
    const double d = static_cast<double>(dimension);
    return {d / (d + 2.0), 3.0 / (d * d)};
}

RmtPrediction gue_prediction(Index dimension) {
    if (dimension < 2) {
        throw InvalidDimension("GUE prediction needs D >= 2");
    }
    const double d = static_cast<double>(dimension);
    return {d / (d + 1.0), 2.0 / (d * d)};
}

} // namespace relaxometer
