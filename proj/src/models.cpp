#include "relaxometer/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

#include "relaxometer/error.hpp"

namespace relaxometer {

namespace {

constexpr double kCommutatorTolerance = 1e-8;
// Entries of a numerically built permutation (e.g. -G^2) below this are zero.
constexpr double kPruneTolerance = 1e-10;

template <class Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Scalar snap_sign(Scalar a) {
    if (std::abs(a - Scalar(1)) < 1e-8) return Scalar(1);
    if (std::abs(a + Scalar(1)) < 1e-8) return Scalar(-1);
    return a;
}

template <class Scalar>
double commutator_norm_impl(const Dense<Scalar>& op, const Eigen::SparseMatrix<Scalar>& s) {
    if (op.rows() != op.cols() || s.rows() != op.rows() || s.cols() != op.cols()) {
        throw InvalidDimension("commutator: operator and symmetry dimensions differ");
    }
    Dense<Scalar> lhs = op * s;
    Dense<Scalar> rhs = s * op;
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

// Returns image[n] and the phase a[n] with S e_n = a[n] e_image[n], or
// std::nullopt when S is not a (phased) permutation.
template <class Scalar>
std::optional<std::pair<std::vector<Index>, std::vector<Scalar>>>
as_permutation(const Eigen::SparseMatrix<Scalar>& s) {
    const Index d = s.cols();
    std::vector<Index> image(static_cast<std::size_t>(d), -1);
    std::vector<Scalar> phase(static_cast<std::size_t>(d));
    for (Index col = 0; col < d; ++col) {
        int big = 0;
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(s, col); it; ++it) {
            const double mag = std::abs(it.value());
            if (mag <= kPruneTolerance) {
                continue;
            }
            if (std::abs(mag - 1.0) > 1e-8 || ++big > 1) {
                return std::nullopt;
            }
            image[static_cast<std::size_t>(col)] = it.row();
            phase[static_cast<std::size_t>(col)] = snap_sign(it.value() / mag);
        }
        if (big != 1) {
            return std::nullopt;
        }
    }
    return std::make_pair(std::move(image), std::move(phase));
}

template <class Scalar>
SectorPair<Scalar> sectors_from_permutation(Index d, const std::vector<Index>& image, const std::vector<Scalar>& phase) {
    using Triplet = Eigen::Triplet<Scalar>;
    std::vector<Triplet> plus, minus;
    Index n_plus = 0, n_minus = 0;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (Index n = 0; n < d; ++n) {
        const auto m = image[static_cast<std::size_t>(n)];
        const Scalar a = phase[static_cast<std::size_t>(n)];
        if (image[static_cast<std::size_t>(m)] != n ||
            std::abs(a * phase[static_cast<std::size_t>(m)] - Scalar(1)) > 1e-8) {
            throw NotASymmetry("symmetry operator is not an involution");
        }
        if (m == n) {
            if (std::abs(a - Scalar(1)) < 1e-8) {
                plus.emplace_back(n, n_plus++, Scalar(1));
            } else if (std::abs(a + Scalar(1)) < 1e-8) {
                minus.emplace_back(n, n_minus++, Scalar(1));
            } else {
                throw NotASymmetry("fixed point of the symmetry has eigenvalue other than +-1");
            }
        } else if (n < m) {
            plus.emplace_back(n, n_plus, Scalar(inv_sqrt2));
            plus.emplace_back(m, n_plus++, a * inv_sqrt2);
            minus.emplace_back(n, n_minus, Scalar(inv_sqrt2));
            minus.emplace_back(m, n_minus++, -a * inv_sqrt2);
        }
    }
    SectorPair<Scalar> out;
    out.plus.sign = 1;
    out.minus.sign = -1;
    out.plus.basis.resize(d, n_plus);
    out.plus.basis.setFromTriplets(plus.begin(), plus.end());
    out.minus.basis.resize(d, n_minus);
    out.minus.basis.setFromTriplets(minus.begin(), minus.end());
    return out;
}

template <class Scalar>
SectorPair<Scalar> sectors_from_dense(const Eigen::SparseMatrix<Scalar>& s) {
    const Dense<Scalar> dense = Dense<Scalar>(s);
    if (hermiticity_defect(dense) > 1e-8) {
        throw NotASymmetry("symmetry operator is not an involution (not Hermitian)");
    }
    const auto decomp = eigh(dense);
    const auto& vecs = std::get<Dense<Scalar>>(decomp.vectors);
    std::vector<Index> plus_cols, minus_cols;
    for (Index k = 0; k < decomp.levels.size(); ++k) {
        const double ev = decomp.levels[k];
        if (std::abs(ev - 1.0) < 1e-8) {
            plus_cols.push_back(k);
        } else if (std::abs(ev + 1.0) < 1e-8) {
            minus_cols.push_back(k);
        } else {
            throw NotASymmetry("symmetry operator has an eigenvalue other than +-1");
        }
    }
    auto build = [&](const std::vector<Index>& cols, int sign) {
        SymmetrySector<Scalar> sec;
        sec.sign = sign;
        Dense<Scalar> b(dense.rows(), static_cast<Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            b.col(static_cast<Index>(j)) = vecs.col(cols[j]);
        }
        sec.basis = b.sparseView();
        return sec;
    };
    return {build(plus_cols, 1), build(minus_cols, -1)};
}

template <class Scalar>
SectorPair<Scalar> symmetry_sectors_impl(const Dense<Scalar>& op, const Eigen::SparseMatrix<Scalar>& symmetry) {
    // Symmetries built numerically (e.g. -G^2) carry rounding noise in every entry.
    Eigen::SparseMatrix<Scalar> pruned = symmetry.pruned(Scalar(1), kPruneTolerance);
    const double defect = commutator_norm_impl(op, pruned);
    if (!(defect < kCommutatorTolerance)) {
        throw NotASymmetry("operator does not commute with the symmetry (max |[H,S]| = " + std::to_string(defect) + ")");
    }
    SectorPair<Scalar> out;
    if (auto perm = as_permutation(pruned)) {
        out = sectors_from_permutation<Scalar>(op.rows(), perm->first, perm->second);
    } else {
        out = sectors_from_dense(pruned);
    }
    for (auto* sec : {&out.plus, &out.minus}) {
        Dense<Scalar> hv = op * sec->basis;
        sec->block = sec->basis.adjoint() * hv;
    }
    return out;
}

template <class Scalar>
SpectralDecomposition decompose_sector_impl(const SymmetrySector<Scalar>& sector, SpectrumKind kind) {
    if (sector.dimension() == 0) {
        throw InvalidDimension("empty symmetry sector");
    }
    SpectralDecomposition block;
    if (kind == SpectrumKind::Unitary) {
        if constexpr (std::is_same_v<Scalar, cplx>) {
            block = eig_unitary(sector.block);
        } else {
            block = eig_unitary(sector.block.template cast<cplx>());
        }
    } else {
        // Restore exact Hermiticity lost to rounding in basis^dagger * op * basis.
        Dense<Scalar> h = 0.5 * (sector.block + sector.block.adjoint());
        block = eigh(h);
    }
    return embed(block, sector.basis);
}

} // namespace

std::string BernoulliScheme::name() const {
    const auto right = left_fraction.complement();
    return "(" + left_fraction.str() + "," + right.str() + ")";
}

IsingParams ising_presets::kim_huse(int n) {
    const double s5 = std::sqrt(5.0);
    return {n, (s5 + 5.0) / 8.0, (s5 + 1.0) / 4.0};
}

ComplexMatrix dft_matrix(Index dimension, const FourierPhases& phases) {
    if (dimension < 1) {
        throw InvalidDimension("dft_matrix: dimension must be positive");
    }
    const double d = static_cast<double>(dimension);
    const double norm = 1.0 / std::sqrt(d);
    ComplexMatrix g(dimension, dimension);
    for (Index m = 0; m < dimension; ++m) {
        for (Index l = 0; l < dimension; ++l) {
            // Reduce the phase modulo 1 before scaling to keep the argument small.
            const double x = (static_cast<double>(l) + phases.alpha) * (static_cast<double>(m) + phases.beta) / d;
            const double frac = x - std::floor(x);
            g(l, m) = std::polar(norm, -2.0 * std::numbers::pi * frac);
        }
    }
    return g;
}

ComplexMatrix baker_unitary(Index dimension, const BernoulliScheme& scheme, const FourierPhases& phases) {
    const auto& p = scheme.left_fraction;
    if (!(p.num() > 0 && p.num() < p.den())) {
        throw DomainError("Bernoulli fraction must lie strictly between 0 and 1");
    }
    if (dimension < 2 || !scheme.fits(dimension)) {
        throw InvalidDimension("baker_unitary: D=" + std::to_string(dimension) + " is not compatible with scheme " +
                               scheme.name());
    }
    const Index left = scheme.left_block(dimension);
    const Index right = dimension - left;
    const ComplexMatrix g_inv = dft_matrix(dimension, phases).adjoint();
    ComplexMatrix b(dimension, dimension);
    b.leftCols(left).noalias() = g_inv.leftCols(left) * dft_matrix(left, phases);
    b.rightCols(right).noalias() = g_inv.rightCols(right) * dft_matrix(right, phases);
    return b;
}

ComplexMatrix baker_parity(Index dimension, const FourierPhases& phases) {
    if (dimension < 2) {
        throw InvalidDimension("baker_parity: dimension must be at least 2");
    }
    const ComplexMatrix g = dft_matrix(dimension, phases);
    return -(g * g);
}

RealMatrix ising_hamiltonian(const IsingParams& params, int max_sites) {
    const int n = params.sites;
    if (n < 2) {
        throw InvalidDimension("Ising chain needs at least 2 sites");
    }
    if (n > max_sites) {
        throw ResourceLimit("Ising chain with N=" + std::to_string(n) + " exceeds the dense cap N<=" +
                            std::to_string(max_sites));
    }
    const Index d = params.dimension();
    RealMatrix h = RealMatrix::Zero(d, d);
    auto spin = [n](Index state, int site) {
        // site is 1-based; site 1 is the most significant bit.
        return ((state >> (n - site)) & 1) ? -1.0 : 1.0;
    };
    for (Index s = 0; s < d; ++s) {
        double diag = 0.0;
        for (int i = 1; i < n; ++i) {
            diag -= spin(s, i) * spin(s, i + 1);
        }
        for (int i = 1; i <= n; ++i) {
            diag -= params.hz * spin(s, i);
            const Index flipped = s ^ (Index{1} << (n - i));
            h(flipped, s) -= params.hx;
        }
        h(s, s) = diag;
    }
    return h;
}

std::vector<Index> reflection_permutation(int sites) {
    if (sites < 2) {
        throw InvalidDimension("reflection needs at least 2 sites");
    }
    const Index d = Index{1} << sites;
    std::vector<Index> image(static_cast<std::size_t>(d));
    for (Index s = 0; s < d; ++s) {
        Index r = 0;
        for (int b = 0; b < sites; ++b) {
            if ((s >> b) & 1) {
                r |= Index{1} << (sites - 1 - b);
            }
        }
        image[static_cast<std::size_t>(s)] = r;
    }
    return image;
}

Eigen::SparseMatrix<double> reflection_operator(int sites) {
    const auto image = reflection_permutation(sites);
    const auto d = static_cast<Index>(image.size());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(image.size());
    for (Index s = 0; s < d; ++s) {
        t.emplace_back(image[static_cast<std::size_t>(s)], s, 1.0);
    }
    Eigen::SparseMatrix<double> r(d, d);
    r.setFromTriplets(t.begin(), t.end());
    return r;
}

SectorPair<double> symmetry_sectors(const RealMatrix& op, const Eigen::SparseMatrix<double>& symmetry) {
    return symmetry_sectors_impl<double>(op, symmetry);
}

SectorPair<cplx> symmetry_sectors(const ComplexMatrix& op, const Eigen::SparseMatrix<cplx>& symmetry) {
    return symmetry_sectors_impl<cplx>(op, symmetry);
}

double commutator_norm(const RealMatrix& op, const Eigen::SparseMatrix<double>& symmetry) {
    return commutator_norm_impl<double>(op, symmetry);
}

double commutator_norm(const ComplexMatrix& op, const Eigen::SparseMatrix<cplx>& symmetry) {
    return commutator_norm_impl<cplx>(op, symmetry);
}

SpectralDecomposition decompose_sector(const SymmetrySector<double>& sector, SpectrumKind kind) {
    return decompose_sector_impl(sector, kind);
}

SpectralDecomposition decompose_sector(const SymmetrySector<cplx>& sector, SpectrumKind kind) {
    return decompose_sector_impl(sector, kind);
}

SpectralDecomposition pool(const SpectralDecomposition& a, const SpectralDecomposition& b) {
    if (a.kind != b.kind || a.basis_dimension() != b.basis_dimension()) {
        throw InvalidDimension("pool: decompositions differ in kind or basis dimension");
    }
    const Index na = a.size();
    const Index nb = b.size();
    RealVector levels(na + nb);
    levels << a.levels, b.levels;
    std::vector<Index> order(static_cast<std::size_t>(na + nb));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return levels[x] < levels[y]; });

    auto gather = [&](const auto& va, const auto& vb) {
        using M = std::decay_t<decltype(va)>;
        M out(va.rows(), na + nb);
        for (Index k = 0; k < na + nb; ++k) {
            const Index src = order[static_cast<std::size_t>(k)];
            out.col(k) = src < na ? va.col(src) : vb.col(src - na);
        }
        return out;
    };
    SpectralDecomposition out;
    out.kind = a.kind;
    out.levels.resize(na + nb);
    for (Index k = 0; k < na + nb; ++k) {
        out.levels[k] = levels[order[static_cast<std::size_t>(k)]];
    }
    if (a.is_real() && b.is_real()) {
        out.vectors = gather(std::get<RealMatrix>(a.vectors), std::get<RealMatrix>(b.vectors));
    } else {
        auto to_complex = [](const Eigenvectors& v) {
            return std::visit([](const auto& m) -> ComplexMatrix { return m.template cast<cplx>(); }, v);
        };
        out.vectors = gather(to_complex(a.vectors), to_complex(b.vectors));
    }
    return out;
}

} // namespace relaxometer
