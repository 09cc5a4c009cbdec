#pragma once

#include "superlab/statespace.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace superlab {

// Square complex matrix with U†U = I within norm_tol. Immutable;
// construction validates unitarity.
class UnitaryOperator {
public:
    explicit UnitaryOperator(Matrix entries);
    static UnitaryOperator identity(int dim);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    UnitaryOperator adjoint() const;

    friend UnitaryOperator operator*(const UnitaryOperator& a, const UnitaryOperator& b);

private:
    Matrix entries_;
};

// A transformation given only on a subspace: input_k → output_k.
// Inputs must be pairwise orthonormal, as must outputs, or no unitary
// extension exists.
struct PartialIsometrySpec {
    std::vector<std::pair<StateVector, StateVector>> pairs;
};

// Extends the partial assignment to a full unitary. The given pairs are honored
// exactly (no global phase taken); the orthogonal complement is filled by
// seeded orthonormal completion, so the result is deterministic given seed.
// Throws if inputs or outputs are not pairwise orthonormal, naming the
// offending pair and its overlap magnitude.
UnitaryOperator complete_to_unitary(const PartialIsometrySpec& spec,
                                    std::uint64_t seed = 0);

// U·ψ; layout is preserved.
StateVector apply(const UnitaryOperator& U, const StateVector& psi);

// Haar-distributed unitary: QR of a complex Gaussian matrix with the
// diagonal phases of R fixed. Deterministic given seed.
UnitaryOperator haar_random(int dim, std::uint64_t seed);

// Number of real parameters from_generator expects for a given dimension.
int generator_param_count(int dim);

// exp(H) for the skew-Hermitian H encoded by dim² real parameters:
// dim diagonal phases followed by (re, im) pairs for the upper triangle.
// Smooth parameterization of the full unitary group.
UnitaryOperator from_generator(std::span<const double> params);

}  // namespace superlab
