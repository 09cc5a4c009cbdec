#pragma once

// Independent reference implementations used to cross-check library results.
// Everything here deliberately takes a different computational route from the
// code under test so that a shared bug cannot hide.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracles {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// exp(H) for skew-Hermitian H via spectral decomposition of the Hermitian
// matrix A = -iH: exp(H) = V diag(exp(i lambda_k)) V^dagger.  The library
// computes the same exponential through Pade approximation with scaling and
// squaring, so agreement between the two is strong evidence for both.
inline Matrix exp_skew_hermitian(const Matrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("exp_skew_hermitian: square matrix required");
    const Matrix a = Complex(0.0, -1.0) * h;
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("exp_skew_hermitian: generator is not skew-Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("exp_skew_hermitian: eigensolver failed");
    Vector phases(a.rows());
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
        const double lam = es.eigenvalues()(k);
        phases(k) = Complex(std::cos(lam), std::sin(lam));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Survival function of the chi-square distribution with one degree of
// freedom: P(X > stat) = erfc(sqrt(stat / 2)).  Enough for two-outcome
// frequency audits; keeps the dependency surface at zero.
inline double chi_square_pvalue_1dof(double stat) {
    if (stat < 0.0) throw std::invalid_argument("chi_square_pvalue_1dof: negative statistic");
    return std::erfc(std::sqrt(stat / 2.0));
}

// Pearson statistic for a two-outcome sample against expected probability p.
inline double two_outcome_chi_square(long long count_a, long long count_b, double p_a) {
    const double n = static_cast<double>(count_a + count_b);
    const double ea = n * p_a;
    const double eb = n * (1.0 - p_a);
    const double da = static_cast<double>(count_a) - ea;
    const double db = static_cast<double>(count_b) - eb;
    return da * da / ea + db * db / eb;
}

// Reference two-level rotation: exp(i theta X) on span{e0, e1}.
inline Matrix two_level_rotation(double theta) {
    Matrix u(2, 2);
    u(0, 0) = Complex(std::cos(theta), 0.0);
    u(0, 1) = Complex(0.0, std::sin(theta));
    u(1, 0) = Complex(0.0, std::sin(theta));
    u(1, 1) = Complex(std::cos(theta), 0.0);
    return u;
}

// Discrete phase average computed the slow way: enumerate every assignment of
// K-th roots of unity to the amplitudes, build each outer product explicitly,
// and average.  Mirrors nothing in the library; pure brute force.
inline Matrix slow_phase_average(std::span<const Complex> alpha, int k_roots) {
    const int n = static_cast<int>(alpha.size());
    if (n == 0 || k_roots < 2) throw std::invalid_argument("slow_phase_average: bad arguments");
    std::vector<Complex> roots(static_cast<std::size_t>(k_roots));
    for (int r = 0; r < k_roots; ++r) {
        const double ang = 2.0 * M_PI * r / k_roots;
        roots[static_cast<std::size_t>(r)] = Complex(std::cos(ang), std::sin(ang));
    }
    Matrix acc = Matrix::Zero(n, n);
    std::vector<int> choice(static_cast<std::size_t>(n), 0);
    long long total = 1;
    for (int i = 0; i < n; ++i) total *= k_roots;
    for (long long t = 0; t < total; ++t) {
        long long rem = t;
        for (int i = 0; i < n; ++i) {
            choice[static_cast<std::size_t>(i)] = static_cast<int>(rem % k_roots);
            rem /= k_roots;
        }
        Vector v(n);
        for (int i = 0; i < n; ++i)
            v(i) = roots[static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])] * alpha[static_cast<std::size_t>(i)];
        acc += v * v.adjoint();
    }
    return acc / static_cast<double>(total);
}

// Deterministic pseudo-random complex vectors for oracle-side use only.
// Uses std::mt19937_64 directly so the library RNG is not in the loop.
inline Vector random_unit_vector(int dim, unsigned long long seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(dim);
    do {
        for (int i = 0; i < dim; ++i) v(i) = Complex(normal(gen), normal(gen));
    } while (v.norm() < 1e-9);
    return v / v.norm();
}

}  // namespace oracles
