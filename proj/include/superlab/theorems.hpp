#pragma once

#include "superlab/rng.hpp"
#include "superlab/statespace.hpp"
#include "superlab/unitary.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace superlab {

// Feasible violation scores above this bound would contradict the
// impossibility theorems; below it they are float noise.
inline constexpr double violation_tol = 1e-9;
// Constraint residual (squared-norm scale) a candidate must meet to count
// as feasible.
inline constexpr double feasibility_tol = 1e-12;

// Orthogonal decomposition of the test's output space into "No" states,
// "Yes" states, and (optionally) a grouping of the Yes states by the
// branch whose memory they retain.
struct BeliefPartition {
    std::vector<StateVector> no_states;
    std::vector<StateVector> yes_states;
    // per_branch_yes[i] lists indices into yes_states owned by branch i.
    // Empty when the partition carries no branch grouping.
    std::vector<std::vector<int>> per_branch_yes;

    bool has_grouping() const { return !per_branch_yes.empty(); }
};

// Throws unless no/yes lists are each orthonormal, mutually orthogonal,
// and any grouping uses disjoint valid indices.
void validate_partition(const BeliefPartition& partition, double tol = norm_tol);

// Coefficient tables of a candidate test U against a belief partition:
//   beta(i, j)  = ⟨N_j | U | branch_i⟩
//   gamma(i, j) = ⟨Y_j | U | branch_i⟩
//   zeta(j)     = ⟨N_j | U · Σ_i α_i branch_i⟩
//   eta(j)      = ⟨Y_j | U · Σ_i α_i branch_i⟩
struct TestDecomposition {
    Eigen::VectorXcd alpha;
    Eigen::MatrixXcd beta;
    Eigen::MatrixXcd gamma;
    Eigen::VectorXcd zeta;
    Eigen::VectorXcd eta;
    std::vector<std::vector<int>> per_branch_yes;
    // Squared-norm mass of each branch image outside span(partition), and
    // of the superposition image.
    std::vector<double> branch_residuals;
    double superposition_residual = 0.0;
};

TestDecomposition decompose(const UnitaryOperator& U,
                            const std::vector<StateVector>& branches,
                            const Eigen::VectorXcd& alpha,
                            const BeliefPartition& partition);

// The linearity relation behind the branch-discriminating impossibility:
// unconditionally, eta = gammaᵀ·alpha; when the partition groups Yes states
// by branch and each branch image avoids the other branches' Yes states,
// the grouped form eta_ij = alpha_i · gamma_ij follows, and with it
// Σ_j|eta_ij|² = |alpha_i|² Σ_j|gamma_ij|² ≤ Σ_j|gamma_ij|².
struct LinearityReport {
    double flat_residual = 0.0;      // max_j |eta_j − Σ_i alpha_i gamma_ij|, zeta/beta alike
    double grouped_residual = 0.0;   // max over owned slots |eta_j − alpha_i gamma_ij|
    double cross_branch_leakage = 0.0;  // max |gamma_i'j|² on foreign slots
    std::vector<double> eta_mass;    // Σ_{j in yes_i} |eta_j|² per branch
    std::vector<double> gamma_mass;  // Σ_{j in yes_i} |gamma_ij|² per branch
    bool flat_ok = false;
    bool grouped_ok = false;         // trivially true without grouping
    bool mass_inequality_ok = false;
};

LinearityReport check_linearity_relation(const TestDecomposition& d);

// Signed score of a candidate definitive test:
//   ‖P_yes U Σα_i|i⟩‖² − Σ_i ‖P_yes U |i⟩‖²
// Nonpositive for every unitary; zero yes-mass whenever all branch images
// lie in the No subspace.
double definitive_violation(const UnitaryOperator& U,
                            const std::vector<StateVector>& branches,
                            const Eigen::VectorXcd& alpha,
                            const BeliefPartition& partition);

enum class TestKind { Definitive, PartiallyDefinitive, BranchDiscriminating };

struct SearchReport {
    TestKind kind = TestKind::Definitive;
    int dim = 0;
    int restarts = 0;
    // Best exact-feasible violation score; absent when no restart produced
    // a feasible candidate. That happens in dimensions too small to hold
    // the required structure, and always for the definitive kind, whose
    // constraint set (certain Yes on the superposition, certain No on
    // every branch) admits no unitary at all.
    std::optional<double> best_feasible_score;
    double best_penalized_score = 0.0;
    int feasible_count = 0;
    int infeasible_count = 0;
    int best_restart = -1;
    std::vector<double> best_params;
    std::vector<double> restart_scores;  // exact-feasible score per restart, NaN if infeasible
    double elapsed_seconds = 0.0;

    // True unless a feasible candidate scored above violation_tol.
    bool theorem_holds() const {
        return !best_feasible_score || *best_feasible_score <= violation_tol;
    }
};

// Random-restart ascent over from_generator parameters and branch weights,
// maximizing the kind-specific violation score under penalized structural
// constraints; every restart's best candidate is repaired onto the exact
// constraint manifold before being scored. The impossibility theorems
// guarantee every feasible score is ≤ 0 up to float error.
SearchReport violation_search(TestKind kind, int dim, int restarts,
                              std::uint64_t seed);

// Repairs: the nearest exactly-feasible candidate for each test structure,
// or nullopt when none exists (rank-deficient projections).
std::optional<UnitaryOperator> confine_branches_to_no_subspace(
    const UnitaryOperator& U, const std::vector<StateVector>& branches,
    const BeliefPartition& partition, std::uint64_t seed);
std::optional<UnitaryOperator> strip_cross_branch_yes(
    const UnitaryOperator& U, const std::vector<StateVector>& branches,
    const BeliefPartition& partition, std::uint64_t seed);

// Unitary invariance of overlaps: distinguishable (orthogonal) states stay
// orthogonal, and |⟨a|b⟩| is the floor on any achievable image overlap.
struct Lemma1Report {
    struct PairResult {
        double base_overlap = 0.0;     // |⟨a|b⟩|, the minimum achievable
        double max_deviation = 0.0;    // max over U of ||⟨Ua|Ub⟩| − |⟨a|b⟩||
    };
    std::vector<PairResult> pairs;
    double max_deviation = 0.0;
    bool pass = false;
};

Lemma1Report check_lemma1(
    const std::vector<std::pair<StateVector, StateVector>>& pairs,
    const std::vector<UnitaryOperator>& unitaries, double tol = norm_tol);

// Operational face of the phase-average identity: a unitary-then-measure
// protocol cannot tell the phase-averaged preparation from the stochastic
// mixture of branches. Route A evolves the phase-averaged density matrix;
// route B evolves each branch as a pure state and mixes the statistics.
struct MixtureReport {
    std::vector<double> distribution_phase_averaged;
    std::vector<double> distribution_mixture;
    double max_discrepancy = 0.0;
    bool pass = false;
};

MixtureReport mixture_indistinguishability(
    std::span<const Complex> alpha, const std::vector<StateVector>& branches,
    const std::vector<UnitaryOperator>& protocol_unitaries,
    std::string_view register_name, int K, double tol = norm_tol);

// A random candidate test satisfying the branch-discriminating premise:
// disjoint basis slots per branch (private No and Yes states), Haar-random
// branches, and a seeded unitary completing branch image assignments.
struct TheoremInstance {
    UnitaryOperator U;
    std::vector<StateVector> branches;
    Eigen::VectorXcd alpha;
    BeliefPartition partition;
};

TheoremInstance random_structured_instance(int dim, Rng& rng);

// Random weights on the probability simplex (complex phases included).
Eigen::VectorXcd random_alpha(int count, Rng& rng);

}  // namespace superlab
