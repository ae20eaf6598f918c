#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "relaxometer/linalg.hpp"

namespace relaxometer {

/// Bare: sum_i |<phi_i|psi>|^4, in [1/D, 1]. DScaled: D times the bare value.
enum class IprConvention { Bare, DScaled };

struct IprResult {
    std::vector<double> values;
    double mean = 0.0;
    IprConvention convention = IprConvention::Bare;
};

/// IPR of each column of `vectors`, measured in the columns of `basis`
/// (computational basis when absent).
IprResult eigenstate_ipr(const Eigenvectors& vectors, IprConvention convention = IprConvention::Bare,
                         const std::optional<ComplexMatrix>& basis = std::nullopt);

/// Eigenstate IPR averaged over the central `bulk_fraction` of states ordered by level.
double mean_eigenstate_ipr(const SpectralDecomposition& decomp, double bulk_fraction = 1.0,
                           IprConvention convention = IprConvention::Bare);

/// sum_k |<phi_i|psi_k>|^4 for every basis state phi_i.
IprResult basis_state_ipr(const Eigenvectors& vectors, IprConvention convention = IprConvention::Bare,
                          const std::optional<ComplexMatrix>& basis = std::nullopt);

struct FractalDimension {
    double value = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// f_d from IPR ~ D^-f_d by least squares on logs, with a Student-t
/// confidence interval. Needs at least 3 distinct sizes.
FractalDimension fractal_dimension(const std::vector<std::pair<double, double>>& ipr_means,
                                   double confidence = 0.95);

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double difference = 0.0;
};

/// c_avg for the single-state subspace A = {phi_0} (f = 1/D) against
/// (sum_k w_k - sum_k w_k^2) / (1 - 1/D), w_k = |<phi_0|psi_k>|^2.
IdentityCheck cavg_ipr_identity_check(const Eigenvectors& vectors);

} // namespace relaxometer
