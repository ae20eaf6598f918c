#pragma once

#include <span>
#include <vector>

#include "relaxometer/fraction.hpp"
#include "relaxometer/linalg.hpp"

namespace relaxometer {

/// Subspace A of a complementary projector pair P_A + P_B = 1, diagonal in
/// the computational basis.
class PartitionSpec {
  public:
    /// First f*D basis states. Throws PartitionError unless 0 < f < 1 and f*D is an integer.
    static PartitionSpec leading(Index dimension, Fraction f);
    /// Arbitrary distinct indices; f = |A| / D.
    static PartitionSpec from_indices(Index dimension, std::vector<Index> indices_a);

    Index dimension() const { return dimension_; }
    const Fraction& fraction() const { return fraction_; }
    const std::vector<Index>& indices_a() const { return indices_a_; }
    std::vector<Index> indices_b() const;
    std::vector<bool> mask_a() const;

    /// The partition with A and B exchanged.
    PartitionSpec complement() const;

  private:
    PartitionSpec(Index dimension, Fraction f, std::vector<Index> indices);
    Index dimension_ = 0;
    Fraction fraction_;
    std::vector<Index> indices_a_;
};

/// Shorthand for PartitionSpec::leading.
inline PartitionSpec projector(Index dimension, Fraction f) { return PartitionSpec::leading(dimension, f); }

struct FlaggedValue {
    double value = 0.0;
    /// Levels (for c_avg) or level gaps (for sigma2) closer than 1e-10 of the spectral width.
    bool degenerate = false;
};

/// c(t) = Tr(U^t P_A U^-t P_B) / (D_s f (1-f)) where D_s is the number of
/// states in the decomposition. Evaluated as a quadratic form in the
/// eigenbasis; throws NumericalConsistency if the imaginary residue exceeds 1e-10.
std::vector<double> correlation_series(const SpectralDecomposition& decomp, const PartitionSpec& part,
                                       std::span<const double> times);

/// Infinite-time average: (1/(D_s f(1-f))) sum_k w_k (1 - w_k), w_k = <psi_k|P_A|psi_k>.
FlaggedValue c_avg(const SpectralDecomposition& decomp, const PartitionSpec& part);

/// Time variance: (2/(D_s^2 f^2 (1-f)^2)) sum_{k1<k2} |<psi_k1|P_A|psi_k2>|^4.
FlaggedValue sigma2(const SpectralDecomposition& decomp, const PartitionSpec& part);

struct Fluctuations {
    double c_avg = 0.0;
    double sigma2 = 0.0;
    bool degenerate_levels = false;
    bool degenerate_gaps = false;
};

/// Both quantities from one pass over <psi_k1|P_A|psi_k2>.
Fluctuations fluctuations(const SpectralDecomposition& decomp, const PartitionSpec& part, bool with_sigma2 = true);

struct OracleEstimate {
    double mean = 0.0;
    double variance = 0.0;
    std::int64_t samples = 0;
};

/// Brute-force mean and variance of c(t) over sampled times in (0, T].
/// Unitary kind: integer steps; every step 1..T when samples >= T, otherwise
/// a Kronecker (golden-ratio) subsequence of steps. Hermitian kind: Kronecker
/// low-discrepancy times on [0, T].
OracleEstimate time_average_oracle(const SpectralDecomposition& decomp, const PartitionSpec& part, double horizon,
                                   std::int64_t samples);

struct RmtPrediction {
    double c_avg = 0.0;
    double sigma2 = 0.0;
};

/// (D/(D+2), 3/D^2).
RmtPrediction goe_prediction(Index dimension);
/// (D/(D+1), 2/D^2).
RmtPrediction gue_prediction(Index dimension);

/// True if two levels are closer than tol * (spectral width).
bool has_degenerate_levels(const RealVector& levels, bool circular, double rel_tol = 1e-10);
/// True if two distinct level gaps coincide within tol * (spectral width).
bool has_degenerate_gaps(const RealVector& levels, double rel_tol = 1e-10);

} // namespace relaxometer
