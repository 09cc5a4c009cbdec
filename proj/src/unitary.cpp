#include "superlab/unitary.hpp"

#include "superlab/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace superlab {

UnitaryOperator::UnitaryOperator(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
        throw std::invalid_argument("UnitaryOperator: entries must be square and nonempty");
    }
    const Matrix gram = entries_.adjoint() * entries_;
    const double dev = (gram - Matrix::Identity(entries_.rows(), entries_.cols()))
                           .cwiseAbs()
                           .maxCoeff();
    if (dev > norm_tol) {
        throw std::invalid_argument("UnitaryOperator: U†U deviates from identity by " +
                                    std::to_string(dev));
    }
}

UnitaryOperator UnitaryOperator::identity(int dim) {
    return UnitaryOperator(Matrix::Identity(dim, dim));
}

UnitaryOperator UnitaryOperator::adjoint() const {
    return UnitaryOperator(entries_.adjoint());
}

UnitaryOperator operator*(const UnitaryOperator& a, const UnitaryOperator& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("UnitaryOperator: dimension mismatch in composition");
    }
    return UnitaryOperator(a.entries_ * b.entries_);
}

StateVector apply(const UnitaryOperator& U, const StateVector& psi) {
    if (U.dim() != psi.dim()) {
        throw std::invalid_argument("apply: unitary and state dimensions differ");
    }
    Vector out = U.entries() * psi.amplitudes();
    return StateVector(psi.layout(), std::move(out), StateVector::unnormalized);
}

namespace {

Vector random_complex_vector(int dim, Rng& rng) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.complex_gaussian();
    return v;
}

// Orthonormalizes `candidate` against the first `count` columns of `basis`
// (two Gram-Schmidt passes). Returns false if the remainder is negligible.
bool orthonormalize_against(const Matrix& basis, int count, Vector& candidate) {
    for (int pass = 0; pass < 2; ++pass) {
        for (int c = 0; c < count; ++c) {
            candidate -= basis.col(c).dot(candidate) * basis.col(c);
        }
    }
    const double n = candidate.norm();
    if (n < 1e-6) return false;
    candidate /= n;
    return true;
}

// Extends the first `given` columns of m (assumed orthonormal) to a full
// orthonormal basis with seeded random directions.
void complete_basis(Matrix& m, int given, Rng& rng) {
    const int dim = static_cast<int>(m.rows());
    int have = given;
    while (have < dim) {
        Vector cand = random_complex_vector(dim, rng);
        if (!orthonormalize_against(m, have, cand)) continue;
        m.col(have) = cand;
        ++have;
    }
}

}  // namespace

UnitaryOperator complete_to_unitary(const PartialIsometrySpec& spec, std::uint64_t seed) {
    if (spec.pairs.empty()) {
        throw std::invalid_argument("complete_to_unitary: no pairs given");
    }
    const int dim = spec.pairs.front().first.dim();
    const int n = static_cast<int>(spec.pairs.size());
    if (n > dim) {
        throw std::invalid_argument("complete_to_unitary: more pairs than dimensions");
    }
    for (const auto& [in, out] : spec.pairs) {
        if (in.dim() != dim || out.dim() != dim) {
            throw std::invalid_argument("complete_to_unitary: pair dimension mismatch");
        }
    }

    auto check_orthonormal = [&](bool inputs) {
        for (int i = 0; i < n; ++i) {
            const StateVector& a = inputs ? spec.pairs[i].first : spec.pairs[i].second;
            for (int j = i; j < n; ++j) {
                const StateVector& b = inputs ? spec.pairs[j].first : spec.pairs[j].second;
                const double overlap = std::abs(inner_product(a, b));
                const double expected = (i == j) ? 1.0 : 0.0;
                if (std::abs(overlap - expected) > norm_tol) {
                    throw std::invalid_argument(
                        std::string("complete_to_unitary: ") +
                        (inputs ? "input" : "output") + " pair (" + std::to_string(i) +
                        ", " + std::to_string(j) + ") not orthonormal, overlap magnitude " +
                        std::to_string(overlap));
                }
            }
        }
    };
    check_orthonormal(true);
    check_orthonormal(false);

    Matrix in_basis(dim, dim);
    Matrix out_basis(dim, dim);
    for (int i = 0; i < n; ++i) {
        in_basis.col(i) = spec.pairs[i].first.amplitudes();
        out_basis.col(i) = spec.pairs[i].second.amplitudes();
    }
    Rng rng_in = Rng::for_stream(seed, 0);
    Rng rng_out = Rng::for_stream(seed, 1);
    complete_basis(in_basis, n, rng_in);
    complete_basis(out_basis, n, rng_out);

    return UnitaryOperator(out_basis * in_basis.adjoint());
}

UnitaryOperator haar_random(int dim, std::uint64_t seed) {
    if (dim < 1) {
        throw std::invalid_argument("haar_random: dim must be positive");
    }
    Rng rng(seed);
    Matrix z(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) z(i, j) = rng.complex_gaussian();
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fixing the phases of R's diagonal makes the distribution Haar.
    for (int i = 0; i < dim; ++i) {
        const Complex d = r(i, i);
        const double mag = std::abs(d);
        q.col(i) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
    }
    return UnitaryOperator(std::move(q));
}

int generator_param_count(int dim) { return dim * dim; }

UnitaryOperator from_generator(std::span<const double> params) {
    const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(params.size()))));
    if (dim < 1 || dim * dim != static_cast<int>(params.size())) {
        throw std::invalid_argument("from_generator: parameter count must be a perfect square");
    }
    Matrix h = Matrix::Zero(dim, dim);
    int p = 0;
    for (int k = 0; k < dim; ++k) h(k, k) = Complex(0.0, params[p++]);
    for (int j = 0; j < dim; ++j) {
        for (int k = j + 1; k < dim; ++k) {
            const double re = params[p++];
            const double im = params[p++];
            h(j, k) = Complex(re, im);
            h(k, j) = Complex(-re, im);  // H† = −H
        }
    }
    return UnitaryOperator(h.exp());
}

}  // namespace superlab
