#pragma once

// Reference matrices built from std::mt19937_64 so the oracle program and
// the tests see the same inputs without going through the library's RNG.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

// Real symmetric, diagonal variance 1, off-diagonal variance 1/2.
inline Eigen::MatrixXd goe(int d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd a(d, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) a(i, j) = n(gen);
    }
    return 0.5 * (a + a.transpose());
}

// Haar unitary: QR of a complex Ginibre matrix with the phases of diag(R) removed.
inline Eigen::MatrixXcd haar_unitary(int d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd z(d, d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) z(i, j) = cplx(n(gen), n(gen));
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
    return q;
}

} // namespace oracle
