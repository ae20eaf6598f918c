#include "relaxometer/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "relaxometer/error.hpp"

namespace relaxometer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Cos-values closer than this are treated as one cluster and resolved with U itself.
constexpr double kClusterGap = 1e-6;
constexpr double kResidualTolerance = 1e-8;

void check_square(Index rows, Index cols, const char* what) {
    if (rows != cols || rows == 0) {
        throw InvalidDimension(std::string(what) + ": expected a non-empty square matrix");
    }
}

void require_hermitian(double defect, double scale) {
    if (defect > 1e-10 * std::max(1.0, scale)) {
        throw NumericalConsistency("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
    }
}

} // namespace

Index SpectralDecomposition::basis_dimension() const {
    return std::visit([](const auto& v) { return v.rows(); }, vectors);
}

Index SpectralDecomposition::size() const {
    return std::visit([](const auto& v) { return v.cols(); }, vectors);
}

RealVector SpectralDecomposition::sorted_levels() const {
    RealVector out = levels;
    std::sort(out.data(), out.data() + out.size());
    return out;
}

double hermiticity_defect(const RealMatrix& m) {
    check_square(m.rows(), m.cols(), "hermiticity_defect");
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
    check_square(m.rows(), m.cols(), "hermiticity_defect");
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const ComplexMatrix& u) {
    check_square(u.rows(), u.cols(), "unitarity_defect");
    ComplexMatrix g = u.adjoint() * u;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

SpectralDecomposition eigh(const RealMatrix& h) {
    check_square(h.rows(), h.cols(), "eigh");
    const double scale = h.cwiseAbs().maxCoeff();
    require_hermitian(hermiticity_defect(h), scale);
    RealMatrix a = h;
    RealVector w(h.rows());
    const auto n = static_cast<lapack_int>(h.rows());
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data()) != 0) {
        throw NumericalConsistency("dsyevd failed to converge");
    }
    return {SpectrumKind::Hermitian, std::move(w), std::move(a)};
}

SpectralDecomposition eigh(const ComplexMatrix& h) {
    check_square(h.rows(), h.cols(), "eigh");
    const double scale = h.cwiseAbs().maxCoeff();
    require_hermitian(hermiticity_defect(h), scale);
    ComplexMatrix a = h;
    RealVector w(h.rows());
    const auto n = static_cast<lapack_int>(h.rows());
    if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data()) != 0) {
        throw NumericalConsistency("zheevd failed to converge");
    }
    return {SpectrumKind::Hermitian, std::move(w), std::move(a)};
}

RealVector eigvalsh(const RealMatrix& h) {
    check_square(h.rows(), h.cols(), "eigvalsh");
    require_hermitian(hermiticity_defect(h), h.cwiseAbs().maxCoeff());
    RealMatrix a = h;
    RealVector w(h.rows());
    const auto n = static_cast<lapack_int>(h.rows());
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data()) != 0) {
        throw NumericalConsistency("dsyevd failed to converge");
    }
    return w;
}

RealVector eigvalsh(const ComplexMatrix& h) {
    check_square(h.rows(), h.cols(), "eigvalsh");
    require_hermitian(hermiticity_defect(h), h.cwiseAbs().maxCoeff());
    ComplexMatrix a = h;
    RealVector w(h.rows());
    const auto n = static_cast<lapack_int>(h.rows());
    if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data()) != 0) {
        throw NumericalConsistency("zheevd failed to converge");
    }
    return w;
}

SpectralDecomposition eig_unitary(const ComplexMatrix& u) {
    check_square(u.rows(), u.cols(), "eig_unitary");
    const Index d = u.rows();

    ComplexMatrix q = 0.5 * (u + u.adjoint());
    RealVector c(d);
    const auto n = static_cast<lapack_int>(d);
    if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, q.data(), n, c.data()) != 0) {
        throw NumericalConsistency("zheevd failed to converge");
    }
    ComplexMatrix uq = u * q;

    // cos(theta) is two-to-one; a pair theta, -theta (or a genuine near
    // degeneracy) lands in one cluster and is split by U restricted to it.
    Index start = 0;
    while (start < d) {
        Index stop = start + 1;
        while (stop < d && c[stop] - c[stop - 1] < kClusterGap) {
            ++stop;
        }
        const Index m = stop - start;
        if (m > 1) {
            ComplexMatrix s = q.middleCols(start, m).adjoint() * uq.middleCols(start, m);
            Eigen::ComplexSchur<ComplexMatrix> schur(s);
            if (schur.info() != Eigen::Success) {
                throw NumericalConsistency("cluster Schur decomposition failed");
            }
            const ComplexMatrix& z = schur.matrixU();
            q.middleCols(start, m) = (q.middleCols(start, m) * z).eval();
            uq.middleCols(start, m) = (uq.middleCols(start, m) * z).eval();
        }
        start = stop;
    }

    RealVector theta(d);
    double worst_residual = 0.0;
    double worst_modulus = 0.0;
    for (Index k = 0; k < d; ++k) {
        const cplx lambda = q.col(k).dot(uq.col(k));
        worst_modulus = std::max(worst_modulus, std::abs(std::abs(lambda) - 1.0));
        worst_residual = std::max(worst_residual, (uq.col(k) - lambda * q.col(k)).norm());
        double angle = std::arg(lambda);
        if (angle < 0.0) {
            angle += kTwoPi;
        }
        if (angle >= kTwoPi) {
            angle -= kTwoPi;
        }
        theta[k] = angle;
    }
    if (worst_residual > kResidualTolerance || worst_modulus > kResidualTolerance) {
        throw NumericalConsistency("matrix is not unitary: eigen-residual " + std::to_string(worst_residual) +
                                   ", modulus defect " + std::to_string(worst_modulus));
    }

    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return theta[a] < theta[b]; });
    RealVector levels(d);
    ComplexMatrix vectors(d, d);
    for (Index k = 0; k < d; ++k) {
        levels[k] = theta[order[static_cast<std::size_t>(k)]];
        vectors.col(k) = q.col(order[static_cast<std::size_t>(k)]);
    }
    return {SpectrumKind::Unitary, std::move(levels), std::move(vectors)};
}

SpectralDecomposition embed(const SpectralDecomposition& block, const Eigen::SparseMatrix<double>& basis) {
    if (basis.cols() != block.basis_dimension()) {
        throw InvalidDimension("embed: basis columns do not match block dimension");
    }
    SpectralDecomposition out{block.kind, block.levels, {}};
    std::visit(
        [&](const auto& v) {
            using M = std::decay_t<decltype(v)>;
            M full = basis * v;
            out.vectors = std::move(full);
        },
        block.vectors);
    return out;
}

SpectralDecomposition embed(const SpectralDecomposition& block, const Eigen::SparseMatrix<cplx>& basis) {
    if (basis.cols() != block.basis_dimension()) {
        throw InvalidDimension("embed: basis columns do not match block dimension");
    }
    SpectralDecomposition out{block.kind, block.levels, {}};
    std::visit(
        [&](const auto& v) {
            ComplexMatrix full = basis * v.template cast<cplx>();
            out.vectors = std::move(full);
        },
        block.vectors);
    return out;
}

} // namespace relaxometer
