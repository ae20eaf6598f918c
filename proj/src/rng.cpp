#include "relaxometer/rng.hpp"

#include <cmath>

#include "relaxometer/error.hpp"

namespace relaxometer {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

void require_dimension(Index d) {
    if (d < 2) {
        throw InvalidDimension("ensemble dimension must be at least 2, got " + std::to_string(d));
    }
}

} // namespace

Stream derive_substream(std::uint64_t master_seed, std::uint64_t realization_index) {
    // For a fixed seed s1 is a bijection of the index, so distinct indices
    // never share a state. The first output reads s1 only, hence the seed term.
    const std::uint64_t s0 = mix64(master_seed ^ 0x6A09E667F3BCC908ULL);
    const std::uint64_t s1 = mix64(realization_index + kGolden + mix64(master_seed));
    const std::uint64_t s2 = mix64(s0 ^ ((s1 << 32) | (s1 >> 32)) ^ 0xBB67AE8584CAA73BULL);
    std::uint64_t s3 = mix64(master_seed + mix64(realization_index ^ 0x3C6EF372FE94F82BULL));
    if ((s0 | s1 | s2 | s3) == 0) {
        s3 = kGolden;
    }
    return Stream({s0, s1, s2, s3});
}

std::uint64_t derive_cell_seed(std::uint64_t master_seed, std::string_view cell_key) {
    // FNV-1a over the key, then mixed with the master seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : cell_key) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return mix64(master_seed ^ mix64(h));
}

std::string to_string(EnsembleKind kind) {
    switch (kind) {
    case EnsembleKind::GOE:
        return "GOE";
    case EnsembleKind::GUE:
        return "GUE";
    case EnsembleKind::RP_GOE:
        return "RP-GOE";
    case EnsembleKind::RP_GUE:
        return "RP-GUE";
    }
    return "?";
}

EnsembleKind parse_ensemble_kind(std::string_view text) {
    if (text == "GOE") return EnsembleKind::GOE;
    if (text == "GUE") return EnsembleKind::GUE;
    if (text == "RP-GOE") return EnsembleKind::RP_GOE;
    if (text == "RP-GUE") return EnsembleKind::RP_GUE;
    throw ConfigurationError("unknown ensemble kind '" + std::string(text) + "' (expected GOE, GUE, RP-GOE, RP-GUE)");
}

void EnsembleSpec::validate() const {
    require_dimension(dimension);
    if (realizations < 1) {
        throw ConfigurationError("realizations must be at least 1");
    }
    if (is_rp(kind)) {
        if (!gamma) {
            throw ConfigurationError(to_string(kind) + " requires gamma");
        }
        if (!(*gamma >= 0.0) || !std::isfinite(*gamma)) {
            throw ConfigurationError("gamma must be a finite non-negative number");
        }
    } else if (gamma) {
        throw ConfigurationError("gamma is only meaningful for Rosenzweig-Porter ensembles");
    }
}

RealMatrix sample_goe(Index dimension, Stream& rng) {
    require_dimension(dimension);
    const double off = std::sqrt(0.5);
    RealMatrix m(dimension, dimension);
    for (Index i = 0; i < dimension; ++i) {
        m(i, i) = rng.normal();
        for (Index j = i + 1; j < dimension; ++j) {
            const double x = rng.normal(off);
            m(i, j) = x;
            m(j, i) = x;
        }
    }
    return m;
}

ComplexMatrix sample_gue(Index dimension, Stream& rng) {
    require_dimension(dimension);
    ComplexMatrix m(dimension, dimension);
    for (Index i = 0; i < dimension; ++i) {
        m(i, i) = cplx(rng.normal(), 0.0);
        for (Index j = i + 1; j < dimension; ++j) {
            const double re = rng.normal(0.5);
            const double im = rng.normal(0.5);
            m(i, j) = cplx(re, im);
            m(j, i) = cplx(re, -im);
        }
    }
    return m;
}

std::variant<RealMatrix, ComplexMatrix> sample_rp(const EnsembleSpec& spec, Stream& rng) {
    if (!is_rp(spec.kind)) {
        throw ConfigurationError("sample_rp called with a non-RP ensemble");
    }
    spec.validate();
    const Index d = spec.dimension;
    RealVector diag(d);
    for (Index i = 0; i < d; ++i) {
        diag[i] = rng.normal();
    }
    const double coupling = std::pow(static_cast<double>(d), -0.5 * *spec.gamma);
    if (spec.kind == EnsembleKind::RP_GOE) {
        RealMatrix h = coupling * sample_goe(d, rng);
        h.diagonal() += diag;
        return h;
    }
    ComplexMatrix h = coupling * sample_gue(d, rng);
    h.diagonal() += diag.cast<cplx>();
    return h;
}

ComplexMatrix sample_cue(Index dimension, Stream& rng) {
    require_dimension(dimension);
    ComplexMatrix z(dimension, dimension);
    for (Index j = 0; j < dimension; ++j) {
        for (Index i = 0; i < dimension; ++i) {
            const double re = rng.normal();
            z(i, j) = cplx(re, rng.normal());
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const auto& r = qr.matrixQR();
    for (Index j = 0; j < dimension; ++j) {
        const double mag = std::abs(r(j, j));
        q.col(j) *= mag > 0.0 ? r(j, j) / mag : cplx(1.0);
    }
    return q;
}

std::variant<RealMatrix, ComplexMatrix> sample_ensemble(const EnsembleSpec& spec, Stream& rng) {
    switch (spec.kind) {
    case EnsembleKind::GOE:
        return sample_goe(spec.dimension, rng);
    case EnsembleKind::GUE:
        return sample_gue(spec.dimension, rng);
    default:
        return sample_rp(spec, rng);
    }
}

} // namespace relaxometer
