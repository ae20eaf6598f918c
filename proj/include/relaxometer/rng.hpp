#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "relaxometer/linalg.hpp"

namespace relaxometer {

/// xoshiro256** engine. Satisfies UniformRandomBitGenerator so it plugs into
/// the <random> distributions.
class Xoshiro256 {
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(const std::array<std::uint64_t, 4>& state) : s_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const auto result = rotl(s_[1] * 5, 7) * 9;
        const auto t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    const std::array<std::uint64_t, 4>& state() const { return s_; }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_;
};

/// One random stream: an engine plus the normal-deviate cache that belongs to it.
class Stream {
  public:
    explicit Stream(const std::array<std::uint64_t, 4>& state) : engine_(state) {}

    double normal() { return normal_(engine_); }
    double normal(double stddev) { return stddev * normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::uint64_t bits() { return engine_(); }

    Xoshiro256& engine() { return engine_; }

  private:
    Xoshiro256 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-keyed stream: a pure function of (master_seed, realization_index).
/// Distinct indices give distinct engine states.
Stream derive_substream(std::uint64_t master_seed, std::uint64_t realization_index);

/// Stable 64-bit key for a named cell, mixed into a master seed.
std::uint64_t derive_cell_seed(std::uint64_t master_seed, std::string_view cell_key);

enum class EnsembleKind { GOE, GUE, RP_GOE, RP_GUE };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(std::string_view text);
inline bool is_rp(EnsembleKind k) { return k == EnsembleKind::RP_GOE || k == EnsembleKind::RP_GUE; }
inline bool is_complex(EnsembleKind k) { return k == EnsembleKind::GUE || k == EnsembleKind::RP_GUE; }

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::GOE;
    Index dimension = 2;
    std::optional<double> gamma;
    std::int64_t realizations = 1;
    std::uint64_t master_seed = 0;

    /// Throws InvalidDimension / ConfigurationError when the invariants fail.
    void validate() const;
};

/// Diagonal ~ N(0, 1), off-diagonal ~ N(0, 1/2), symmetric.
RealMatrix sample_goe(Index dimension, Stream& rng);

/// Real diagonal ~ N(0, 1); off-diagonal real and imaginary parts each
/// ~ N(0, 1/4) so that E|M_ij|^2 = 1/2; Hermitian.
ComplexMatrix sample_gue(Index dimension, Stream& rng);

/// A + D^(-gamma/2) B with A diagonal N(0, 1) and B from sample_goe/sample_gue.
/// The variant holds a RealMatrix for RP-GOE and a ComplexMatrix for RP-GUE.
std::variant<RealMatrix, ComplexMatrix> sample_rp(const EnsembleSpec& spec, Stream& rng);

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// diag(R) divided out.
ComplexMatrix sample_cue(Index dimension, Stream& rng);

/// Any kind: dispatches to the samplers above.
std::variant<RealMatrix, ComplexMatrix> sample_ensemble(const EnsembleSpec& spec, Stream& rng);

} // namespace relaxometer
