#include "superlab/theorems.hpp"

#include "superlab/dynamics.hpp"
#include "superlab/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace superlab {

namespace {

constexpr double penalty_weight = 1e3;

Matrix stack_columns(const std::vector<StateVector>& vectors, int dim) {
    Matrix m(dim, static_cast<int>(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        m.col(static_cast<Eigen::Index>(k)) = vectors[k].amplitudes();
    }
    return m;
}

void require_orthonormal(const std::vector<StateVector>& vectors,
                         const std::string& what, double tol) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const double n = vectors[i].norm();
        if (std::abs(n - 1.0) > tol) {
            throw std::invalid_argument(what + "[" + std::to_string(i) +
                                        "] has norm " + std::to_string(n));
        }
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            const double overlap =
                std::abs(inner_product(vectors[i], vectors[j]));
            if (overlap > tol) {
                throw std::invalid_argument(
                    what + "[" + std::to_string(i) + "] and " + what + "[" +
                    std::to_string(j) + "] overlap with magnitude " +
                    std::to_string(overlap));
            }
        }
    }
}

void require_same_dim(const std::vector<StateVector>& vectors, int dim,
                      const std::string& what) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].dim() != dim) {
            throw std::invalid_argument(
                what + "[" + std::to_string(i) + "] has dimension " +
                std::to_string(vectors[i].dim()) + ", expected " +
                std::to_string(dim));
        }
    }
}

// yes-state index -> owning branch, -1 when unowned.
std::vector<int> ownership(const BeliefPartition& partition) {
    std::vector<int> owner(partition.yes_states.size(), -1);
    for (std::size_t i = 0; i < partition.per_branch_yes.size(); ++i) {
        for (int j : partition.per_branch_yes[i]) {
            owner[static_cast<std::size_t>(j)] = static_cast<int>(i);
        }
    }
    return owner;
}

}  // namespace

void validate_partition(const BeliefPartition& partition, double tol) {
    require_orthonormal(partition.no_states, "no_states", tol);
    require_orthonormal(partition.yes_states, "yes_states", tol);
    if (!partition.no_states.empty() && !partition.yes_states.empty()) {
        const int dim = partition.no_states.front().dim();
        require_same_dim(partition.yes_states, dim, "yes_states");
    }
    for (std::size_t i = 0; i < partition.no_states.size(); ++i) {
        for (std::size_t j = 0; j < partition.yes_states.size(); ++j) {
            const double overlap = std::abs(
                inner_product(partition.no_states[i], partition.yes_states[j]));
            if (overlap > tol) {
                throw std::invalid_argument(
                    "no_states[" + std::to_string(i) + "] and yes_states[" +
                    std::to_string(j) + "] overlap with magnitude " +
                    std::to_string(overlap));
            }
        }
    }
    if (partition.has_grouping()) {
        std::vector<char> claimed(partition.yes_states.size(), 0);
        for (const std::vector<int>& group : partition.per_branch_yes) {
            for (int j : group) {
                if (j < 0 || j >= static_cast<int>(partition.yes_states.size())) {
                    throw std::invalid_argument(
                        "per_branch_yes index " + std::to_string(j) +
                        " out of range");
                }
                if (claimed[static_cast<std::size_t>(j)]) {
                    throw std::invalid_argument(
                        "yes_states[" + std::to_string(j) +
                        "] grouped under two branches");
                }
                claimed[static_cast<std::size_t>(j)] = 1;
            }
        }
    }
}

TestDecomposition decompose(const UnitaryOperator& U,
                            const std::vector<StateVector>& branches,
                            const Eigen::VectorXcd& alpha,
                            const BeliefPartition& partition) {
    if (branches.empty()) {
        throw std::invalid_argument("decompose: no branches");
    }
    const int d = U.dim();
    require_same_dim(branches, d, "branches");
    require_orthonormal(branches, "branches", norm_tol);
    validate_partition(partition);
    require_same_dim(partition.no_states, d, "no_states");
    require_same_dim(partition.yes_states, d, "yes_states");
    const int B = static_cast<int>(branches.size());
    if (alpha.size() != B) {
        throw std::invalid_argument("decompose: alpha size " +
                                    std::to_string(alpha.size()) +
                                    " does not match branch count " +
                                    std::to_string(B));
    }
    if (std::abs(alpha.squaredNorm() - 1.0) > norm_tol) {
        throw std::invalid_argument("decompose: branch weights are not normalized");
    }

    const Matrix no_basis = stack_columns(partition.no_states, d);
    const Matrix yes_basis = stack_columns(partition.yes_states, d);

    Matrix images(d, B);
    Vector superposition = Vector::Zero(d);
    for (int i = 0; i < B; ++i) {
        images.col(i) = U.entries() * branches[static_cast<std::size_t>(i)].amplitudes();
        superposition += alpha(i) * branches[static_cast<std::size_t>(i)].amplitudes();
    }
    const Vector superposition_image = U.entries() * superposition;

    TestDecomposition dec;
    dec.alpha = alpha;
    dec.per_branch_yes = partition.per_branch_yes;
    // (i, j) = ⟨partition_j | image_i⟩; transpose, not adjoint.
    dec.beta = (no_basis.adjoint() * images).transpose();
    dec.gamma = (yes_basis.adjoint() * images).transpose();
    dec.zeta = no_basis.adjoint() * superposition_image;
    dec.eta = yes_basis.adjoint() * superposition_image;

    dec.branch_residuals.resize(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        dec.branch_residuals[static_cast<std::size_t>(i)] =
            images.col(i).squaredNorm() - dec.beta.row(i).squaredNorm() -
            dec.gamma.row(i).squaredNorm();
    }
    dec.superposition_residual = superposition_image.squaredNorm() -
                                 dec.zeta.squaredNorm() - dec.eta.squaredNorm();
    return dec;
}

LinearityReport check_linearity_relation(const TestDecomposition& d) {
    LinearityReport rep;
    const int B = static_cast<int>(d.alpha.size());

    // Route one: eta/zeta read off the superposition image. Route two:
    // the same coefficients assembled from per-branch rows by linearity.
    const Vector eta_pred = d.gamma.transpose() * d.alpha;
    const Vector zeta_pred = d.beta.transpose() * d.alpha;
    double flat = 0.0;
    if (d.eta.size() > 0) {
        flat = (d.eta - eta_pred).cwiseAbs().maxCoeff();
    }
    if (d.zeta.size() > 0) {
        flat = std::max(flat, (d.zeta - zeta_pred).cwiseAbs().maxCoeff());
    }
    rep.flat_residual = flat;
    rep.flat_ok = flat < norm_tol;

    if (d.per_branch_yes.empty()) {
        rep.grouped_ok = true;
        rep.mass_inequality_ok = true;
        return rep;
    }

    rep.eta_mass.assign(static_cast<std::size_t>(B), 0.0);
    rep.gamma_mass.assign(static_cast<std::size_t>(B), 0.0);
    double grouped = 0.0;
    double leakage = 0.0;
    for (int i = 0; i < B && i < static_cast<int>(d.per_branch_yes.size()); ++i) {
        for (int j : d.per_branch_yes[static_cast<std::size_t>(i)]) {
            grouped = std::max(grouped,
                               std::abs(d.eta(j) - d.alpha(i) * d.gamma(i, j)));
            rep.eta_mass[static_cast<std::size_t>(i)] += std::norm(d.eta(j));
            rep.gamma_mass[static_cast<std::size_t>(i)] += std::norm(d.gamma(i, j));
            for (int other = 0; other < B; ++other) {
                if (other == i) continue;
                leakage = std::max(leakage, std::norm(d.gamma(other, j)));
            }
        }
    }
    rep.grouped_residual = grouped;
    rep.cross_branch_leakage = leakage;
    rep.grouped_ok = grouped < norm_tol;
    rep.mass_inequality_ok = true;
    for (int i = 0; i < B; ++i) {
        if (rep.eta_mass[static_cast<std::size_t>(i)] >
            rep.gamma_mass[static_cast<std::size_t>(i)] + algebra_tol) {
            rep.mass_inequality_ok = false;
        }
    }
    return rep;
}

double definitive_violation(const UnitaryOperator& U,
                            const std::vector<StateVector>& branches,
                            const Eigen::VectorXcd& alpha,
                            const BeliefPartition& partition) {
    const TestDecomposition d = decompose(U, branches, alpha, partition);
    return d.eta.squaredNorm() - d.gamma.squaredNorm();
}

std::optional<UnitaryOperator> confine_branches_to_no_subspace(
    const UnitaryOperator& U, const std::vector<StateVector>& branches,
    const BeliefPartition& partition, std::uint64_t seed) {
    // B orthonormal images need at least B no-directions.
    if (partition.no_states.size() < branches.size()) return std::nullopt;
    const int d = U.dim();
    const Matrix no_basis = stack_columns(partition.no_states, d);

    std::vector<Vector> images;
    images.reserve(branches.size());
    for (const StateVector& b : branches) {
        Vector img = U.entries() * b.amplitudes();
        Vector proj = no_basis * (no_basis.adjoint() * img);
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& prev : images) {
                proj -= prev.dot(proj) * prev;
            }
        }
        const double n = proj.norm();
        if (n < 1e-8) return std::nullopt;
        images.push_back(proj / n);
    }

    PartialIsometrySpec spec;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        spec.pairs.emplace_back(
            branches[i], StateVector(branches[i].layout(), images[i]));
    }
    return complete_to_unitary(spec, seed);
}

std::optional<UnitaryOperator> strip_cross_branch_yes(
    const UnitaryOperator& U, const std::vector<StateVector>& branches,
    const BeliefPartition& partition, std::uint64_t seed) {
    if (!partition.has_grouping() ||
        partition.per_branch_yes.size() != branches.size()) {
        return std::nullopt;
    }
    const int d = U.dim();
    const int B = static_cast<int>(branches.size());
    const Matrix yes_basis = stack_columns(partition.yes_states, d);
    const std::vector<int> owner = ownership(partition);

    // Split each image into its own-yes part and the rest. Own-yes parts
    // of different branches are orthogonal by construction, so candidate
    // orthogonality is decided entirely by the rest parts.
    std::vector<Vector> rest(static_cast<std::size_t>(B));
    std::vector<Vector> own(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        const Vector img =
            U.entries() * branches[static_cast<std::size_t>(i)].amplitudes();
        const Vector ycoef = yes_basis.adjoint() * img;
        Vector own_part = Vector::Zero(d);
        Vector all_yes = Vector::Zero(d);
        for (Eigen::Index j = 0; j < ycoef.size(); ++j) {
            all_yes += ycoef(j) * yes_basis.col(j);
            if (owner[static_cast<std::size_t>(j)] == i) {
                own_part += ycoef(j) * yes_basis.col(j);
            }
        }
        rest[static_cast<std::size_t>(i)] = img - all_yes;
        own[static_cast<std::size_t>(i)] = own_part;
    }

    std::vector<Vector> rest_dirs;  // orthonormal directions already claimed
    PartialIsometrySpec spec;
    for (int i = 0; i < B; ++i) {
        Vector r = rest[static_cast<std::size_t>(i)];
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& dir : rest_dirs) {
                r -= dir.dot(r) * dir;
            }
        }
        Vector candidate = r + own[static_cast<std::size_t>(i)];
        const double n = candidate.norm();
        if (n < 1e-8) return std::nullopt;
        candidate /= n;
        if (r.norm() > 1e-12) {
            rest_dirs.push_back(r / r.norm());
        }
        spec.pairs.emplace_back(
            branches[static_cast<std::size_t>(i)],
            StateVector(branches[static_cast<std::size_t>(i)].layout(), candidate));
    }
    return complete_to_unitary(spec, seed);
}

Lemma1Report check_lemma1(
    const std::vector<std::pair<StateVector, StateVector>>& pairs,
    const std::vector<UnitaryOperator>& unitaries, double tol) {
    Lemma1Report rep;
    rep.pairs.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (a.dim() != b.dim()) {
            throw std::invalid_argument("check_lemma1: pair dimension mismatch");
        }
        Lemma1Report::PairResult pr;
        pr.base_overlap = std::abs(inner_product(a, b));
        for (const UnitaryOperator& U : unitaries) {
            if (U.dim() != a.dim()) {
                throw std::invalid_argument(
                    "check_lemma1: unitary dimension mismatch");
            }
            const Vector ua = U.entries() * a.amplitudes();
            const Vector ub = U.entries() * b.amplitudes();
            const double image_overlap = std::abs(ua.dot(ub));
            pr.max_deviation =
                std::max(pr.max_deviation, std::abs(image_overlap - pr.base_overlap));
        }
        rep.max_deviation = std::max(rep.max_deviation, pr.max_deviation);
        rep.pairs.push_back(pr);
    }
    rep.pass = rep.max_deviation <= tol;
    return rep;
}

MixtureReport mixture_indistinguishability(
    std::span<const Complex> alpha, const std::vector<StateVector>& branches,
    const std::vector<UnitaryOperator>& protocol_unitaries,
    std::string_view register_name, int K, double tol) {
    if (branches.empty()) {
        throw std::invalid_argument("mixture_indistinguishability: no branches");
    }
    if (alpha.size() != branches.size()) {
        throw std::invalid_argument(
            "mixture_indistinguishability: weight count does not match branches");
    }
    const int d = branches.front().dim();
    require_same_dim(branches, d, "branches");
    require_orthonormal(branches, "branches", norm_tol);
    for (const UnitaryOperator& U : protocol_unitaries) {
        if (U.dim() != d) {
            throw std::invalid_argument(
                "mixture_indistinguishability: unitary dimension mismatch");
        }
    }
    const RegisterLayout& layout = branches.front().layout();
    const int reg = layout.index_of(register_name);
    const int reg_dim = layout.at(reg).dim;
    const int reg_stride = layout.stride(reg);

    // Route one: the phase-averaged preparation, evolved as a density
    // matrix through the whole protocol.
    const DensityMatrix averaged = phase_average(alpha, K);
    const Matrix branch_basis = stack_columns(branches, d);
    Matrix rho = branch_basis * averaged.entries() * branch_basis.adjoint();
    for (const UnitaryOperator& U : protocol_unitaries) {
        rho = U.entries() * rho * U.entries().adjoint();
    }
    MixtureReport rep;
    rep.distribution_phase_averaged.assign(static_cast<std::size_t>(reg_dim), 0.0);
    for (int flat = 0; flat < d; ++flat) {
        rep.distribution_phase_averaged[static_cast<std::size_t>(
            (flat / reg_stride) % reg_dim)] += rho(flat, flat).real();
    }

    // Route two: each branch evolved pure, statistics mixed classically.
    rep.distribution_mixture.assign(static_cast<std::size_t>(reg_dim), 0.0);
    for (std::size_t j = 0; j < branches.size(); ++j) {
        Vector v = branches[j].amplitudes();
        for (const UnitaryOperator& U : protocol_unitaries) {
            v = U.entries() * v;
        }
        const StateVector evolved(layout, std::move(v), StateVector::unnormalized);
        const std::vector<double> dist = born_distribution(evolved, register_name);
        const double weight = std::norm(alpha[j]);
        for (int value = 0; value < reg_dim; ++value) {
            rep.distribution_mixture[static_cast<std::size_t>(value)] +=
                weight * dist[static_cast<std::size_t>(value)];
        }
    }

    for (int value = 0; value < reg_dim; ++value) {
        rep.max_discrepancy = std::max(
            rep.max_discrepancy,
            std::abs(rep.distribution_phase_averaged[static_cast<std::size_t>(value)] -
                     rep.distribution_mixture[static_cast<std::size_t>(value)]));
    }
    rep.pass = rep.max_discrepancy <= tol;
    return rep;
}

Eigen::VectorXcd random_alpha(int count, Rng& rng) {
    if (count < 1) {
        throw std::invalid_argument("random_alpha: count must be positive");
    }
    Eigen::VectorXcd a(count);
    double n2 = 0.0;
    do {
        for (int i = 0; i < count; ++i) {
            a(i) = rng.complex_gaussian();
        }
        n2 = a.squaredNorm();
    } while (n2 < 1e-12);
    return a / std::sqrt(n2);
}

TheoremInstance random_structured_instance(int dim, Rng& rng) {
    if (dim < 2) {
        throw std::invalid_argument("random_structured_instance: dim must be >= 2");
    }
    const int max_branches = std::min(dim, 4);
    const int B =
        (max_branches == 2)
            ? 2
            : 2 + static_cast<int>(rng.raw() %
                                   static_cast<std::uint64_t>(max_branches - 1));

    std::vector<int> perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = dim - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }

    // Branch i owns basis slot perm[i] as its private Yes state and, when
    // the dimension allows, slot perm[B+i] as a private No state. Images
    // confined to private slots are orthonormal automatically and never
    // touch another branch's Yes states.
    BeliefPartition partition;
    std::vector<std::vector<int>> slots(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        partition.yes_states.push_back(StateVector::basis(dim, perm[static_cast<std::size_t>(i)]));
        partition.per_branch_yes.push_back({i});
        slots[static_cast<std::size_t>(i)].push_back(perm[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < B && B + i < dim; ++i) {
        partition.no_states.push_back(
            StateVector::basis(dim, perm[static_cast<std::size_t>(B + i)]));
        slots[static_cast<std::size_t>(i)].push_back(perm[static_cast<std::size_t>(B + i)]);
    }

    const UnitaryOperator haar = haar_random(dim, rng.raw());
    const RegisterLayout layout = RegisterLayout::single(dim);
    std::vector<StateVector> branches;
    branches.reserve(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        branches.emplace_back(layout, haar.entries().col(i));
    }

    PartialIsometrySpec spec;
    for (int i = 0; i < B; ++i) {
        Vector img = Vector::Zero(dim);
        double n2 = 0.0;
        do {
            for (int slot : slots[static_cast<std::size_t>(i)]) {
                img(slot) = rng.complex_gaussian();
            }
            n2 = img.squaredNorm();
        } while (n2 < 1e-12);
        img /= std::sqrt(n2);
        spec.pairs.emplace_back(branches[static_cast<std::size_t>(i)],
                                StateVector(layout, img));
    }

    UnitaryOperator U = complete_to_unitary(spec, rng.raw());
    Eigen::VectorXcd alpha = random_alpha(B, rng);
    return TheoremInstance{std::move(U), std::move(branches), std::move(alpha),
                           std::move(partition)};
}

namespace {

// Basis-aligned search structure. Branches are the first B basis states
// and the partition is a subset of the same basis; this loses no
// generality because a change of either basis is absorbed into U.
struct SearchStructure {
    int branch_count = 0;
    std::vector<int> no_slots;
    std::vector<int> yes_slots;
    std::vector<std::vector<int>> per_branch_yes;  // indices into yes_slots
};

SearchStructure draw_structure(TestKind kind, int dim, Rng& rng) {
    SearchStructure st;
    const int max_branches = std::min(dim, 4);
    st.branch_count =
        (max_branches == 2)
            ? 2
            : 2 + static_cast<int>(rng.raw() %
                                   static_cast<std::uint64_t>(max_branches - 1));
    int n_yes = 0;
    if (kind == TestKind::BranchDiscriminating) {
        n_yes = st.branch_count;
        st.per_branch_yes.resize(static_cast<std::size_t>(st.branch_count));
        for (int i = 0; i < st.branch_count; ++i) {
            st.per_branch_yes[static_cast<std::size_t>(i)] = {i};
        }
    } else {
        const int max_yes = std::max(1, dim - st.branch_count);
        n_yes = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(max_yes));
    }
    for (int j = 0; j < dim - n_yes; ++j) st.no_slots.push_back(j);
    for (int j = dim - n_yes; j < dim; ++j) st.yes_slots.push_back(j);
    return st;
}

struct Candidate {
    UnitaryOperator U;
    Eigen::VectorXcd alpha;
};

Candidate realize(const SearchStructure& st, int dim,
                  const std::vector<double>& params) {
    const int g = generator_param_count(dim);
    UnitaryOperator U =
        from_generator(std::span<const double>(params.data(), static_cast<std::size_t>(g)));
    Eigen::VectorXcd alpha(st.branch_count);
    for (int i = 0; i < st.branch_count; ++i) {
        alpha(i) = Complex(params[static_cast<std::size_t>(g + 2 * i)],
                           params[static_cast<std::size_t>(g + 2 * i + 1)]);
    }
    const double n2 = alpha.squaredNorm();
    if (n2 < 1e-12) {
        alpha.setConstant(Complex(1.0 / std::sqrt(static_cast<double>(st.branch_count)), 0.0));
    } else {
        alpha /= std::sqrt(n2);
    }
    return Candidate{std::move(U), std::move(alpha)};
}

double penalized_score(TestKind kind, int dim, const SearchStructure& st,
                       const std::vector<double>& params) {
    const Candidate c = realize(st, dim, params);
    const Matrix& m = c.U.entries();
    const int B = st.branch_count;

    Vector superposition_image = Vector::Zero(dim);
    for (int i = 0; i < B; ++i) {
        superposition_image += c.alpha(i) * m.col(i);
    }

    if (kind != TestKind::BranchDiscriminating) {
        double yes_superposition = 0.0;
        double yes_branches = 0.0;
        for (int slot : st.yes_slots) {
            yes_superposition += std::norm(superposition_image(slot));
            for (int i = 0; i < B; ++i) yes_branches += std::norm(m(slot, i));
        }
        double escape = 0.0;  // branch mass outside the No subspace
        for (int i = 0; i < B; ++i) {
            double no_mass = 0.0;
            for (int slot : st.no_slots) no_mass += std::norm(m(slot, i));
            escape += 1.0 - no_mass;
        }
        return yes_superposition - yes_branches - penalty_weight * escape;
    }

    double best = -std::numeric_limits<double>::infinity();
    double leakage = 0.0;
    for (int i = 0; i < B; ++i) {
        double eta_mass = 0.0;
        double gamma_mass = 0.0;
        for (int j : st.per_branch_yes[static_cast<std::size_t>(i)]) {
            const int slot = st.yes_slots[static_cast<std::size_t>(j)];
            eta_mass += std::norm(superposition_image(slot));
            gamma_mass += std::norm(m(slot, i));
        }
        best = std::max(best, eta_mass - gamma_mass);
        for (std::size_t j = 0; j < st.yes_slots.size(); ++j) {
            bool owned = false;
            for (int k : st.per_branch_yes[static_cast<std::size_t>(i)]) {
                if (k == static_cast<int>(j)) owned = true;
            }
            if (!owned) {
                leakage += std::norm(m(st.yes_slots[j], i));
            }
        }
    }
    return best - penalty_weight * leakage;
}

BeliefPartition partition_from(const SearchStructure& st, int dim) {
    BeliefPartition partition;
    for (int slot : st.no_slots) {
        partition.no_states.push_back(StateVector::basis(dim, slot));
    }
    for (int slot : st.yes_slots) {
        partition.yes_states.push_back(StateVector::basis(dim, slot));
    }
    partition.per_branch_yes = st.per_branch_yes;
    return partition;
}

}  // namespace

SearchReport violation_search(TestKind kind, int dim, int restarts,
                              std::uint64_t seed) {
    if (dim < 2) {
        throw std::invalid_argument("violation_search: dim must be >= 2");
    }
    if (restarts < 1) {
        throw std::invalid_argument("violation_search: restarts must be >= 1");
    }
    const auto t0 = std::chrono::steady_clock::now();

    SearchReport rep;
    rep.kind = kind;
    rep.dim = dim;
    rep.restarts = restarts;
    rep.best_penalized_score = -std::numeric_limits<double>::infinity();
    rep.restart_scores.assign(static_cast<std::size_t>(restarts),
                              std::numeric_limits<double>::quiet_NaN());

    int penalized_best_restart = -1;
    std::vector<double> penalized_best_params;

    const int g = generator_param_count(dim);
    for (int r = 0; r < restarts; ++r) {
        Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(r));
        const SearchStructure st = draw_structure(kind, dim, rng);
        const int n_params = g + 2 * st.branch_count;
        std::vector<double> initial(static_cast<std::size_t>(n_params));
        for (int k = 0; k < g; ++k) {
            initial[static_cast<std::size_t>(k)] = 0.5 * rng.gaussian();
        }
        for (int k = g; k < n_params; ++k) {
            initial[static_cast<std::size_t>(k)] = rng.gaussian();
        }

        CoordinateAscentOptions opts;
        opts.max_sweeps = 40;
        opts.initial_step = 0.5;
        const AscentResult ascent = coordinate_ascent(
            [&](const std::vector<double>& p) {
                return penalized_score(kind, dim, st, p);
            },
            std::move(initial), opts);

        if (ascent.value > rep.best_penalized_score) {
            rep.best_penalized_score = ascent.value;
            penalized_best_restart = r;
            penalized_best_params = ascent.params;
        }

        // Repair onto the exact constraint manifold, then score exactly:
        // finite penalties leave residuals far above feasibility_tol, so
        // only repaired candidates can certify feasible-region scores.
        const Candidate c = realize(st, dim, ascent.params);
        const RegisterLayout layout = RegisterLayout::single(dim);
        std::vector<StateVector> branches;
        branches.reserve(static_cast<std::size_t>(st.branch_count));
        for (int i = 0; i < st.branch_count; ++i) {
            branches.push_back(StateVector::basis(layout, {i}));
        }
        const BeliefPartition partition = partition_from(st, dim);

        const std::optional<UnitaryOperator> repaired =
            (kind == TestKind::BranchDiscriminating)
                ? strip_cross_branch_yes(c.U, branches, partition, rng.raw())
                : confine_branches_to_no_subspace(c.U, branches, partition,
                                                  rng.raw());
        if (!repaired) {
            ++rep.infeasible_count;
            continue;
        }

        const TestDecomposition dec =
            decompose(*repaired, branches, c.alpha, partition);
        double residual = 0.0;
        double exact_score = 0.0;
        if (kind == TestKind::BranchDiscriminating) {
            const std::vector<int> owner = ownership(partition);
            for (int i = 0; i < st.branch_count; ++i) {
                for (Eigen::Index j = 0; j < dec.gamma.cols(); ++j) {
                    if (owner[static_cast<std::size_t>(j)] != i) {
                        residual += std::norm(dec.gamma(i, j));
                    }
                }
            }
            const LinearityReport lin = check_linearity_relation(dec);
            exact_score = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < lin.eta_mass.size(); ++i) {
                exact_score = std::max(exact_score,
                                       lin.eta_mass[i] - lin.gamma_mass[i]);
            }
        } else {
            for (int i = 0; i < st.branch_count; ++i) {
                residual += dec.gamma.row(i).squaredNorm() +
                            std::max(0.0, dec.branch_residuals[static_cast<std::size_t>(i)]);
            }
            exact_score = (kind == TestKind::Definitive)
                              ? dec.eta.squaredNorm() - dec.gamma.squaredNorm()
                              : dec.eta.squaredNorm();
        }

        bool feasible = residual <= feasibility_tol;
        if (kind == TestKind::Definitive) {
            // Certain Yes on the superposition is part of the constraint
            // set; repaired candidates never reach it, so the kind reports
            // an empty feasible set rather than near-zero scores.
            feasible = feasible && dec.eta.squaredNorm() >= 1.0 - violation_tol;
        }
        if (!feasible) {
            ++rep.infeasible_count;
            continue;
        }

        ++rep.feasible_count;
        rep.restart_scores[static_cast<std::size_t>(r)] = exact_score;
        if (!rep.best_feasible_score || exact_score > *rep.best_feasible_score) {
            rep.best_feasible_score = exact_score;
            rep.best_restart = r;
            rep.best_params = ascent.params;
        }
    }

    if (!rep.best_feasible_score) {
        rep.best_restart = penalized_best_restart;
        rep.best_params = std::move(penalized_best_params);
    }
    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace superlab
