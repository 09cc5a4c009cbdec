#pragma once

#include <Eigen/Dense>

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace superlab {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Tolerance for normalization, unitarity and orthogonality checks.
inline constexpr double norm_tol = 1e-10;
// Tolerance for algebraic identities computed without sampling.
inline constexpr double algebra_tol = 1e-12;

struct Register {
    std::string name;
    int dim = 0;
};

// Ordered register descriptors of a composite basis. Composite indexing is
// big-endian: the first-listed register varies slowest.
class RegisterLayout {
public:
    explicit RegisterLayout(std::vector<Register> registers);
    static RegisterLayout single(int dim, std::string name = "sys");

    int total_dim() const { return total_dim_; }
    int register_count() const { return static_cast<int>(registers_.size()); }
    const Register& at(int i) const { return registers_.at(i); }
    const std::vector<Register>& registers() const { return registers_; }

    // Index of the named register; throws if unknown.
    int index_of(std::string_view name) const;
    // Product of the local dimensions of all later registers.
    int stride(int register_index) const;
    int flat_index(std::span<const int> values) const;
    std::vector<int> unpack(int flat) const;

    bool operator==(const RegisterLayout& other) const;

private:
    std::vector<Register> registers_;
    int total_dim_ = 1;
};

RegisterLayout concat(const RegisterLayout& a, const RegisterLayout& b);

// Complex amplitude vector over a labeled composite basis. Immutable.
// Construction checks normalization unless the unnormalized tag is given
// (intermediate sums, scaled states).
class StateVector {
public:
    struct unnormalized_t {};
    static constexpr unnormalized_t unnormalized{};

    StateVector(RegisterLayout layout, Vector amplitudes);
    StateVector(RegisterLayout layout, Vector amplitudes, unnormalized_t);

    static StateVector basis(RegisterLayout layout, std::span<const int> values);
    static StateVector basis(RegisterLayout layout, std::initializer_list<int> values);
    static StateVector basis(int dim, int index);
    static StateVector from_amplitudes(std::initializer_list<Complex> amps);

    int dim() const { return static_cast<int>(amplitudes_.size()); }
    const Vector& amplitudes() const { return amplitudes_; }
    const RegisterLayout& layout() const { return layout_; }
    Complex amplitude(int flat) const { return amplitudes_(flat); }
    double norm() const { return amplitudes_.norm(); }
    bool is_normalized() const;

private:
    RegisterLayout layout_;
    Vector amplitudes_;
};

// a ⊗ b with big-endian composite indexing; layouts are concatenated.
StateVector tensor_product(const StateVector& a, const StateVector& b);

// ⟨a|b⟩, conjugate-linear in the first argument.
Complex inner_product(const StateVector& a, const StateVector& b);

// |⟨a|b⟩| < tol.
bool is_orthogonal(const StateVector& a, const StateVector& b, double tol = norm_tol);

// ca·a + cb·b, renormalized unless renormalize is false.
StateVector linear_combination(Complex ca, const StateVector& a,
                               Complex cb, const StateVector& b,
                               bool renormalize = true);

// Hermitian, trace-1, positive-semidefinite matrix. Immutable;
// construction validates all three within norm_tol.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix entries);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }

private:
    Matrix entries_;
};

// ψψ† of a normalized state.
DensityMatrix pure_density(const StateVector& psi);

// Average of the pure densities of Σ_j e^{iφ_j} α_j |j⟩ over all phase
// assignments φ_j ∈ {2πk/K : k = 0..K-1}. Discrete uniform phase sums
// cancel the off-diagonals for K ≥ 2, leaving the mixture Σ_j |α_j|² |j⟩⟨j|.
// This routine uses the per-pair factorization of the phase average;
// phase_average_brute_force enumerates all K^N assignments.
DensityMatrix phase_average(std::span<const Complex> alpha, int K);
DensityMatrix phase_average(std::initializer_list<Complex> alpha, int K);
DensityMatrix phase_average_brute_force(std::span<const Complex> alpha, int K);
DensityMatrix phase_average_brute_force(std::initializer_list<Complex> alpha, int K);

}  // namespace superlab
