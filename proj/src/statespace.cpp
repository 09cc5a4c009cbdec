#include "superlab/statespace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace superlab {

RegisterLayout::RegisterLayout(std::vector<Register> registers)
    : registers_(std::move(registers)) {
    if (registers_.empty()) {
        throw std::invalid_argument("RegisterLayout: at least one register required");
    }
    std::unordered_set<std::string> names;
    for (const auto& reg : registers_) {
        if (reg.dim < 1) {
            throw std::invalid_argument("RegisterLayout: register '" + reg.name +
                                        "' has local dimension < 1");
        }
        if (!names.insert(reg.name).second) {
            throw std::invalid_argument("RegisterLayout: duplicate register name '" +
                                        reg.name + "'");
        }
        total_dim_ *= reg.dim;
    }
}

RegisterLayout RegisterLayout::single(int dim, std::string name) {
    return RegisterLayout({{std::move(name), dim}});
}

int RegisterLayout::index_of(std::string_view name) const {
    for (int i = 0; i < register_count(); ++i) {
        if (registers_[i].name == name) return i;
    }
    throw std::invalid_argument("RegisterLayout: unknown register '" +
                                std::string(name) + "'");
}

int RegisterLayout::stride(int register_index) const {
    int s = 1;
    for (int i = register_index + 1; i < register_count(); ++i) {
        s *= registers_[i].dim;
    }
    return s;
}

int RegisterLayout::flat_index(std::span<const int> values) const {
    if (static_cast<int>(values.size()) != register_count()) {
        throw std::invalid_argument("RegisterLayout: value count does not match register count");
    }
    int flat = 0;
    for (int i = 0; i < register_count(); ++i) {
        if (values[i] < 0 || values[i] >= registers_[i].dim) {
            throw std::invalid_argument("RegisterLayout: basis value out of range for register '" +
                                        registers_[i].name + "'");
        }
        flat = flat * registers_[i].dim + values[i];
    }
    return flat;
}

std::vector<int> RegisterLayout::unpack(int flat) const {
    if (flat < 0 || flat >= total_dim_) {
        throw std::invalid_argument("RegisterLayout: flat index out of range");
    }
    std::vector<int> values(registers_.size());
    for (int i = register_count() - 1; i >= 0; --i) {
        values[i] = flat % registers_[i].dim;
        flat /= registers_[i].dim;
    }
    return values;
}

bool RegisterLayout::operator==(const RegisterLayout& other) const {
    if (register_count() != other.register_count()) return false;
    for (int i = 0; i < register_count(); ++i) {
        if (registers_[i].name != other.registers_[i].name ||
            registers_[i].dim != other.registers_[i].dim) {
            return false;
        }
    }
    return true;
}

RegisterLayout concat(const RegisterLayout& a, const RegisterLayout& b) {
    std::vector<Register> regs = a.registers();
    regs.insert(regs.end(), b.registers().begin(), b.registers().end());
    return RegisterLayout(std::move(regs));
}

namespace {

void check_dims(const RegisterLayout& layout, const Vector& amps) {
    if (layout.total_dim() != static_cast<int>(amps.size())) {
        throw std::invalid_argument("StateVector: amplitude count does not match layout dimension");
    }
}

}  // namespace

StateVector::StateVector(RegisterLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    check_dims(layout_, amplitudes_);
    const double n = amplitudes_.norm();
    if (std::abs(n - 1.0) > norm_tol) {
        throw std::invalid_argument("StateVector: not normalized (norm " +
                                    std::to_string(n) + "); use the unnormalized tag for intermediates");
    }
}

StateVector::StateVector(RegisterLayout layout, Vector amplitudes, unnormalized_t)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    check_dims(layout_, amplitudes_);
}

StateVector StateVector::basis(RegisterLayout layout, std::span<const int> values) {
    Vector amps = Vector::Zero(layout.total_dim());
    amps(layout.flat_index(values)) = Complex(1.0, 0.0);
    return StateVector(std::move(layout), std::move(amps));
}

StateVector StateVector::basis(RegisterLayout layout, std::initializer_list<int> values) {
    return basis(std::move(layout), std::span<const int>(values.begin(), values.size()));
}

StateVector StateVector::basis(int dim, int index) {
    RegisterLayout layout = RegisterLayout::single(dim);
    Vector amps = Vector::Zero(dim);
    if (index < 0 || index >= dim) {
        throw std::invalid_argument("StateVector::basis: index out of range");
    }
    amps(index) = Complex(1.0, 0.0);
    return StateVector(std::move(layout), std::move(amps));
}

StateVector StateVector::from_amplitudes(std::initializer_list<Complex> amps) {
    Vector v(static_cast<int>(amps.size()));
    int i = 0;
    for (const auto& a : amps) v(i++) = a;
    return StateVector(RegisterLayout::single(static_cast<int>(amps.size())), std::move(v));
}

bool StateVector::is_normalized() const {
    return std::abs(amplitudes_.norm() - 1.0) <= norm_tol;
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
    const int da = a.dim();
    const int db = b.dim();
    Vector out(da * db);
    for (int ia = 0; ia < da; ++ia) {
        for (int ib = 0; ib < db; ++ib) {
            out(ia * db + ib) = a.amplitude(ia) * b.amplitude(ib);
        }
    }
    return StateVector(concat(a.layout(), b.layout()), std::move(out),
                       StateVector::unnormalized);
}

Complex inner_product(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("inner_product: dimension mismatch");
    }
    return a.amplitudes().dot(b.amplitudes());  // conjugates the first argument
}

bool is_orthogonal(const StateVector& a, const StateVector& b, double tol) {
    return std::abs(inner_product(a, b)) < tol;
}

StateVector linear_combination(Complex ca, const StateVector& a,
                               Complex cb, const StateVector& b,
                               bool renormalize) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("linear_combination: dimension mismatch");
    }
    Vector amps = ca * a.amplitudes() + cb * b.amplitudes();
    if (renormalize) {
        const double n = amps.norm();
        if (n == 0.0) {
            throw std::invalid_argument("linear_combination: zero vector cannot be normalized");
        }
        amps /= n;
        return StateVector(a.layout(), std::move(amps));
    }
    return StateVector(a.layout(), std::move(amps), StateVector::unnormalized);
}

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
        throw std::invalid_argument("DensityMatrix: entries must be square and nonempty");
    }
    const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > norm_tol) {
        throw std::invalid_argument("DensityMatrix: not Hermitian (max deviation " +
                                    std::to_string(herm) + ")");
    }
    const double tr_err = std::abs(entries_.trace() - Complex(1.0, 0.0));
    if (tr_err > norm_tol) {
        throw std::invalid_argument("DensityMatrix: trace differs from 1 by " +
                                    std::to_string(tr_err));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        (entries_ + entries_.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -norm_tol) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
    }
}

DensityMatrix pure_density(const StateVector& psi) {
    if (!psi.is_normalized()) {
        throw std::invalid_argument("pure_density: state is not normalized");
    }
    Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
    return DensityMatrix(std::move(m));
}

namespace {

void check_phase_average_inputs(std::span<const Complex> alpha, int K) {
    if (K < 2) {
        throw std::invalid_argument(
            "phase_average: K must be at least 2 (off-diagonals do not cancel)");
    }
    if (alpha.empty()) {
        throw std::invalid_argument("phase_average: empty coefficient list");
    }
    double total = 0.0;
    for (const auto& a : alpha) total += std::norm(a);
    if (std::abs(total - 1.0) > norm_tol) {
        throw std::invalid_argument("phase_average: coefficients are not normalized");
    }
}

}  // namespace

DensityMatrix phase_average(std::span<const Complex> alpha, int K) {
    check_phase_average_inputs(alpha, K);
    const int n = static_cast<int>(alpha.size());

    // Independent phases factorize the average: off-diagonal (j, j') picks up
    // E[e^{iφ}]·E[e^{-iφ}] = |μ|² with μ the mean of the K-th roots of unity.
    Complex mu(0.0, 0.0);
    for (int k = 0; k < K; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / K;
        mu += Complex(std::cos(angle), std::sin(angle));
    }
    mu /= static_cast<double>(K);
    const double off_factor = std::norm(mu);

    Matrix m(n, n);
    for (int j = 0; j < n; ++j) {
        for (int jp = 0; jp < n; ++jp) {
            if (j == jp) {
                m(j, jp) = Complex(std::norm(alpha[j]), 0.0);
            } else {
                m(j, jp) = alpha[j] * std::conj(alpha[jp]) * off_factor;
            }
        }
    }
    return DensityMatrix(std::move(m));
}

DensityMatrix phase_average(std::initializer_list<Complex> alpha, int K) {
    return phase_average(std::span<const Complex>(alpha.begin(), alpha.size()), K);
}

DensityMatrix phase_average_brute_force(std::span<const Complex> alpha, int K) {
    check_phase_average_inputs(alpha, K);
    const int n = static_cast<int>(alpha.size());

    double tuple_count = 1.0;
    for (int j = 0; j < n; ++j) tuple_count *= K;
    if (tuple_count > 1e6) {
        throw std::invalid_argument("phase_average_brute_force: K^N too large to enumerate");
    }
    const long total = static_cast<long>(tuple_count);

    std::vector<Complex> roots(K);
    for (int k = 0; k < K; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / K;
        roots[k] = Complex(std::cos(angle), std::sin(angle));
    }

    Matrix sum = Matrix::Zero(n, n);
    std::vector<int> digits(n, 0);
    Vector phased(n);
    for (long t = 0; t < total; ++t) {
        for (int j = 0; j < n; ++j) phased(j) = roots[digits[j]] * alpha[j];
        sum += phased * phased.adjoint();
        for (int j = n - 1; j >= 0; --j) {  // odometer over phase tuples
            if (++digits[j] < K) break;
            digits[j] = 0;
        }
    }
    sum /= static_cast<double>(total);
    return DensityMatrix(std::move(sum));
}

DensityMatrix phase_average_brute_force(std::initializer_list<Complex> alpha, int K) {
    return phase_average_brute_force(std::span<const Complex>(alpha.begin(), alpha.size()), K);
}

}  // namespace superlab
