#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "superlab/protocol.hpp"
#include "superlab/theorems.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace superlab;

namespace {

constexpr double pi = std::numbers::pi;

// The working partition for the isolated-machine test: one No record
// state, one Yes record state, measured branches as inputs.
struct MachineCase {
    UnitaryOperator machine;
    std::vector<StateVector> branches;
    Eigen::VectorXcd alpha;
    BeliefPartition partition;
};

MachineCase machine_case(double phase_assumed) {
    ExperimentConfig cfg;
    cfg.phase_assumed = phase_assumed;
    const auto layout = protocol_layout();
    const int record_no = layout.flat_index(std::vector<int>{spin::up, experimenter::ready, paper::no});
    const int record_yes = layout.flat_index(std::vector<int>{spin::up, experimenter::ready, paper::yes});

    Eigen::VectorXcd alpha(2);
    const double w = std::numbers::sqrt2 / 2.0;
    alpha << Complex(w, 0.0), Complex(w, 0.0);

    BeliefPartition partition;
    partition.no_states.push_back(StateVector::basis(18, record_no));
    partition.yes_states.push_back(StateVector::basis(18, record_yes));

    return MachineCase{
        build_machine_transform(cfg),
        {StateVector::basis(layout, {spin::up, experimenter::saw_up, paper::blank}),
         StateVector::basis(layout, {spin::down, experimenter::saw_down, paper::blank})},
        alpha,
        partition};
}

BeliefPartition basis_partition(int dim, int n_no, int n_yes, bool grouped, int branches) {
    BeliefPartition partition;
    for (int i = 0; i < n_no; ++i) partition.no_states.push_back(StateVector::basis(dim, i));
    for (int j = 0; j < n_yes; ++j) partition.yes_states.push_back(StateVector::basis(dim, n_no + j));
    if (grouped) {
        partition.per_branch_yes.resize(static_cast<std::size_t>(branches));
        for (int i = 0; i < branches && i < n_yes; ++i)
            partition.per_branch_yes[static_cast<std::size_t>(i)] = {i};
    }
    return partition;
}

std::vector<StateVector> haar_columns(int dim, int count, std::uint64_t seed) {
    const auto frame = haar_random(dim, seed);
    std::vector<StateVector> cols;
    const auto layout = RegisterLayout::single(dim);
    for (int i = 0; i < count; ++i) cols.emplace_back(layout, frame.entries().col(i));
    return cols;
}

}  // namespace

TEST_CASE("partition validation flags structural defects") {
    CHECK_NOTHROW(validate_partition(basis_partition(6, 2, 2, true, 2)));

    BeliefPartition overlapping;
    overlapping.no_states.push_back(StateVector::basis(4, 0));
    overlapping.yes_states.push_back(StateVector::basis(4, 0));
    CHECK_THROWS_AS(validate_partition(overlapping), std::invalid_argument);

    auto doubly_owned = basis_partition(6, 2, 2, true, 2);
    doubly_owned.per_branch_yes[1] = {0};  // slot 0 already owned by branch 0
    CHECK_THROWS_AS(validate_partition(doubly_owned), std::invalid_argument);

    auto out_of_range = basis_partition(6, 2, 2, true, 2);
    out_of_range.per_branch_yes[0] = {5};
    CHECK_THROWS_AS(validate_partition(out_of_range), std::invalid_argument);

    BeliefPartition skewed;
    const double w = std::numbers::sqrt2 / 2.0;
    skewed.no_states.push_back(StateVector::basis(4, 0));
    skewed.no_states.push_back(StateVector::from_amplitudes(
        {Complex(w, 0.0), Complex(w, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)}));
    CHECK_THROWS_AS(validate_partition(skewed), std::invalid_argument);
}

TEST_CASE("decomposing the machine transform reproduces its record weights") {
    const auto mc = machine_case(0.0);
    const auto dec = decompose(mc.machine, mc.branches, mc.alpha, mc.partition);

    // Each measured branch feeds half its mass to the Yes record...
    CHECK(std::abs(dec.gamma.row(0).squaredNorm() - 0.5) < 1e-12);
    CHECK(std::abs(dec.gamma.row(1).squaredNorm() - 0.5) < 1e-12);
    CHECK(std::abs(dec.beta.row(0).squaredNorm() - 0.5) < 1e-12);
    CHECK(std::abs(dec.beta.row(1).squaredNorm() - 0.5) < 1e-12);
    // ...while the matched superposition hits it with certainty.
    CHECK(std::abs(dec.eta.squaredNorm() - 1.0) < 1e-12);
    CHECK(dec.zeta.squaredNorm() < 1e-12);
    // Branch images lie inside the record span.
    for (double r : dec.branch_residuals) CHECK(std::abs(r) < 1e-12);
    CHECK(std::abs(dec.superposition_residual) < 1e-12);

    // Certainty on the superposition exactly saturates the branch budget:
    // the score is the theorem's boundary case, zero.
    const double v = definitive_violation(mc.machine, mc.branches, mc.alpha, mc.partition);
    CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("the flat linearity identity holds for arbitrary unitaries") {
    Rng rng = Rng::for_stream(1001, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 4 + static_cast<int>(rng.raw() % 9);
        const int branches = 2 + static_cast<int>(rng.raw() % 3);
        const auto u = haar_random(dim, rng.raw());
        const auto branch_states = haar_columns(dim, branches, rng.raw());
        const auto alpha = random_alpha(branches, rng);
        const auto partition = basis_partition(dim, 1 + static_cast<int>(rng.raw() % 2),
                                               1 + static_cast<int>(rng.raw() % 2), false, branches);
        const auto report = check_linearity_relation(decompose(u, branch_states, alpha, partition));
        CHECK(report.flat_residual < 1e-12);
        CHECK(report.flat_ok);
        CHECK(report.grouped_ok);  // trivially, no grouping present
    }
}

TEST_CASE("structured instances satisfy the grouped relation and mass bound") {
    Rng rng = Rng::for_stream(1002, 0);
    for (int trial = 0; trial < 150; ++trial) {
        const int dim = 2 + static_cast<int>(rng.raw() % 15);
        const auto inst = random_structured_instance(dim, rng);
        CHECK_NOTHROW(validate_partition(inst.partition));
        const auto dec = decompose(inst.U, inst.branches, inst.alpha, inst.partition);
        const auto report = check_linearity_relation(dec);
        CHECK(report.flat_residual < 1e-10);
        CHECK(report.grouped_residual < 1e-10);
        CHECK(report.cross_branch_leakage < 1e-12);
        CHECK(report.grouped_ok);
        CHECK(report.mass_inequality_ok);
        for (std::size_t i = 0; i < report.eta_mass.size(); ++i)
            CHECK(report.eta_mass[i] <= report.gamma_mass[i] + 1e-12);
    }
}

TEST_CASE("grouped yes-mass scales with the squared branch weight") {
    Rng rng = Rng::for_stream(1003, 0);
    int checked = 0;
    while (checked < 10) {
        const auto inst = random_structured_instance(8, rng);
        if (inst.alpha.size() != 2) continue;
        Eigen::VectorXcd alpha(2);
        alpha << Complex(0.6, 0.0), Complex(0.8, 0.0);
        const auto report = check_linearity_relation(decompose(inst.U, inst.branches, alpha, inst.partition));
        REQUIRE(report.eta_mass.size() == 2);
        CHECK(std::abs(report.eta_mass[0] - 0.36 * report.gamma_mass[0]) < 1e-12);
        CHECK(std::abs(report.eta_mass[1] - 0.64 * report.gamma_mass[1]) < 1e-12);
        ++checked;
    }
}

TEST_CASE("decompose validates branch weights and dimensions") {
    const auto mc = machine_case(0.0);
    Eigen::VectorXcd short_alpha(1);
    short_alpha << Complex(1.0, 0.0);
    CHECK_THROWS_AS(decompose(mc.machine, mc.branches, short_alpha, mc.partition), std::invalid_argument);
    Eigen::VectorXcd heavy_alpha(2);
    heavy_alpha << Complex(1.0, 0.0), Complex(1.0, 0.0);
    CHECK_THROWS_AS(decompose(mc.machine, mc.branches, heavy_alpha, mc.partition), std::invalid_argument);

    auto tilted_branches = mc.branches;
    tilted_branches[1] = tilted_branches[0];
    CHECK_THROWS_AS(decompose(mc.machine, tilted_branches, mc.alpha, mc.partition), std::invalid_argument);
}

TEST_CASE("the definitive score is never positive") {
    Rng rng = Rng::for_stream(1004, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 3 + static_cast<int>(rng.raw() % 10);
        const int branches = 2 + static_cast<int>(rng.raw() % 2);
        const auto u = haar_random(dim, rng.raw());
        const auto branch_states = haar_columns(dim, branches, rng.raw());
        const auto alpha = random_alpha(branches, rng);
        const int n_yes = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(dim - 1));
        const auto partition = basis_partition(dim, dim - n_yes, n_yes, false, branches);
        CHECK(definitive_violation(u, branch_states, alpha, partition) <= 1e-10);
    }
}

TEST_CASE("confined branches leave the superposition with zero yes-mass") {
    Rng rng = Rng::for_stream(1005, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const int branches = 2 + static_cast<int>(rng.raw() % 2);
        // Keep dim > 2*branches so a No span large enough to hold every
        // branch always exists.
        const int dim = 2 * branches + 1 + static_cast<int>(rng.raw() % 8);
        const int n_yes = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(dim - 2 * branches + 1));
        const auto u = haar_random(dim, rng.raw());
        const auto branch_states = haar_columns(dim, branches, rng.raw());
        const auto alpha = random_alpha(branches, rng);
        const auto partition = basis_partition(dim, dim - n_yes, n_yes, false, branches);

        const auto repaired = confine_branches_to_no_subspace(u, branch_states, partition, rng.raw());
        REQUIRE(repaired.has_value());
        const auto dec = decompose(*repaired, branch_states, alpha, partition);
        // Confinement zeroes the yes coordinates of the specified images;
        // the only residue comes from the seeded completion of the
        // orthogonal complement, at one-ulp amplitude scale.
        CHECK(dec.gamma.squaredNorm() <= 1e-30);
        CHECK(dec.eta.squaredNorm() <= 1e-18);
        CHECK(definitive_violation(*repaired, branch_states, alpha, partition) <= 1e-30);
    }
}

TEST_CASE("confinement reports impossibility when the No span is too small") {
    Rng rng = Rng::for_stream(1006, 0);
    const auto u = haar_random(4, 1);
    const auto branch_states = haar_columns(4, 3, 2);
    const auto partition = basis_partition(4, 1, 3, false, 3);
    CHECK_FALSE(confine_branches_to_no_subspace(u, branch_states, partition, 3).has_value());
}

TEST_CASE("stripping cross-branch yes-mass restores the grouped premise") {
    Rng rng = Rng::for_stream(1007, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const int dim = 6 + static_cast<int>(rng.raw() % 7);
        const int branches = 2;
        const auto u = haar_random(dim, rng.raw());
        const auto branch_states = haar_columns(dim, branches, rng.raw());
        const auto alpha = random_alpha(branches, rng);
        const auto partition = basis_partition(dim, dim - branches, branches, true, branches);

        const auto repaired = strip_cross_branch_yes(u, branch_states, partition, rng.raw());
        REQUIRE(repaired.has_value());
        const auto report = check_linearity_relation(decompose(*repaired, branch_states, alpha, partition));
        CHECK(report.cross_branch_leakage <= 1e-24);
        CHECK(report.grouped_residual < 1e-10);
        CHECK(report.mass_inequality_ok);
    }
}

TEST_CASE("violation search finds no feasible counterexamples") {
    const auto bd = violation_search(TestKind::BranchDiscriminating, 4, 20, 5);
    CHECK(bd.theorem_holds());
    CHECK(bd.restart_scores.size() == 20);
    CHECK(bd.feasible_count + bd.infeasible_count == 20);
    CHECK(bd.feasible_count >= 1);
    REQUIRE(bd.best_feasible_score.has_value());
    CHECK(*bd.best_feasible_score <= violation_tol);

    const auto pd = violation_search(TestKind::PartiallyDefinitive, 4, 10, 6);
    CHECK(pd.theorem_holds());
    CHECK(pd.feasible_count >= 1);
    CHECK(*pd.best_feasible_score <= violation_tol);
}

TEST_CASE("the definitive constraint set is empty at every dimension tried") {
    for (int dim : {2, 4, 6}) {
        const auto report = violation_search(TestKind::Definitive, dim, 8, 7);
        CHECK(report.feasible_count == 0);
        CHECK(report.infeasible_count == 8);
        CHECK_FALSE(report.best_feasible_score.has_value());
        CHECK(report.theorem_holds());
    }
}

TEST_CASE("two-dimensional searches cannot even satisfy the constraints") {
    // Two branches plus at least one Yes state exceed two dimensions, so
    // every restart is structurally infeasible and the theorem holds
    // vacuously.
    const auto report = violation_search(TestKind::PartiallyDefinitive, 2, 6, 9);
    CHECK(report.feasible_count == 0);
    CHECK(report.theorem_holds());
}

TEST_CASE("violation search is deterministic in its seed") {
    const auto a = violation_search(TestKind::BranchDiscriminating, 4, 8, 12);
    const auto b = violation_search(TestKind::BranchDiscriminating, 4, 8, 12);
    CHECK(a.best_penalized_score == b.best_penalized_score);
    CHECK(a.feasible_count == b.feasible_count);
    REQUIRE(a.restart_scores.size() == b.restart_scores.size());
    for (std::size_t i = 0; i < a.restart_scores.size(); ++i) {
        if (std::isnan(a.restart_scores[i])) {
            CHECK(std::isnan(b.restart_scores[i]));
        } else {
            CHECK(a.restart_scores[i] == b.restart_scores[i]);
        }
    }
}

TEST_CASE("violation search validates its arguments") {
    CHECK_THROWS_AS(violation_search(TestKind::Definitive, 1, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(violation_search(TestKind::Definitive, 4, 0, 0), std::invalid_argument);
}

TEST_CASE("overlaps are invariant under every unitary") {
    std::vector<UnitaryOperator> unitaries;
    Rng rng = Rng::for_stream(1008, 0);
    for (int i = 0; i < 50; ++i) unitaries.push_back(haar_random(6, rng.raw()));

    const auto a = StateVector::basis(6, 0);
    const auto b = StateVector::basis(6, 1);
    const auto half = linear_combination(Complex(0.5, 0.0), a,
                                         Complex(std::sqrt(0.75), 0.0), b, false);
    std::vector<std::pair<StateVector, StateVector>> pairs;
    pairs.emplace_back(a, b);      // distinguishable stays distinguishable
    pairs.emplace_back(a, a);      // identical stays identical
    pairs.emplace_back(a, half);   // partial overlap is pinned at 0.5

    const auto report = check_lemma1(pairs, unitaries);
    REQUIRE(report.pairs.size() == 3);
    CHECK(report.pairs[0].base_overlap == 0.0);
    CHECK(report.pairs[1].base_overlap == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.pairs[2].base_overlap == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.max_deviation < 1e-10);
    CHECK(report.pass);

    // An absurd tolerance shows the pass flag is real, not hardwired.
    const auto strict = check_lemma1(pairs, unitaries, 1e-20);
    CHECK_FALSE(strict.pass);

    std::vector<std::pair<StateVector, StateVector>> mismatched;
    mismatched.emplace_back(StateVector::basis(4, 0), StateVector::basis(4, 1));
    CHECK_THROWS_AS(check_lemma1(mismatched, unitaries), std::invalid_argument);
}

TEST_CASE("phase-averaged preparation is indistinguishable from the mixture") {
    Rng rng = Rng::for_stream(1009, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const int dim = 4 + static_cast<int>(rng.raw() % 9);
        const int branches = 2 + static_cast<int>(rng.raw() % 3);
        const auto alpha_vec = random_alpha(branches, rng);
        std::vector<Complex> alpha(alpha_vec.data(), alpha_vec.data() + branches);
        const auto branch_states = haar_columns(dim, branches, rng.raw());
        std::vector<UnitaryOperator> protocol;
        const int steps = static_cast<int>(rng.raw() % 3);
        for (int s = 0; s < steps; ++s) protocol.push_back(haar_random(dim, rng.raw()));
        const int K = 2 + static_cast<int>(rng.raw() % 3);

        const auto report = mixture_indistinguishability(alpha, branch_states, protocol, "sys", K);
        CHECK(report.max_discrepancy < 1e-12);
        CHECK(report.pass);
    }
}

TEST_CASE("with no protocol steps the readout is exactly the weight profile") {
    const double w = std::numbers::sqrt2 / 2.0;
    const std::vector<Complex> alpha{Complex(0.6, 0.0), Complex(0.0, 0.8)};
    std::vector<StateVector> branch_states{StateVector::basis(4, 1), StateVector::basis(4, 3)};
    const auto report = mixture_indistinguishability(alpha, branch_states, {}, "sys", 2);
    CHECK(report.pass);
    CHECK(std::abs(report.distribution_mixture[1] - 0.36) < 1e-12);
    CHECK(std::abs(report.distribution_mixture[3] - 0.64) < 1e-12);
    CHECK(std::abs(report.distribution_phase_averaged[1] - 0.36) < 1e-12);
    (void)w;
}

TEST_CASE("the machine cannot tell the averaged preparation from the mixture") {
    const auto mc = machine_case(0.0);
    std::vector<Complex> alpha{mc.alpha(0), mc.alpha(1)};
    const auto report = mixture_indistinguishability(alpha, mc.branches, {mc.machine}, "paper", 2);
    CHECK(report.pass);
    // Both routes give the fifty-fifty record distribution...
    CHECK(std::abs(report.distribution_mixture[paper::yes] - 0.5) < 1e-12);
    CHECK(std::abs(report.distribution_phase_averaged[paper::yes] - 0.5) < 1e-12);
    // ...whereas the coherent superposition itself reads Yes with
    // certainty, which is the whole point of the protocol.
    const auto coherent = linear_combination(mc.alpha(0), mc.branches[0], mc.alpha(1), mc.branches[1]);
    const auto dist = born_distribution(apply(mc.machine, coherent), "paper");
    CHECK(std::abs(dist[paper::yes] - 1.0) < 1e-10);
}

TEST_CASE("mixture check validates its inputs") {
    const std::vector<Complex> alpha{Complex(1.0, 0.0)};
    std::vector<StateVector> branch_states{StateVector::basis(4, 0)};
    CHECK_THROWS_AS(mixture_indistinguishability(alpha, branch_states, {}, "sys", 1), std::invalid_argument);
    const std::vector<Complex> heavy{Complex(1.0, 0.0), Complex(1.0, 0.0)};
    CHECK_THROWS_AS(mixture_indistinguishability(heavy, branch_states, {}, "sys", 2), std::invalid_argument);
    CHECK_THROWS_AS(mixture_indistinguishability(alpha, branch_states, {}, "nope", 2), std::invalid_argument);
}

TEST_CASE("random structured instances are well-formed") {
    Rng rng = Rng::for_stream(1010, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 2 + static_cast<int>(rng.raw() % 15);
        const auto inst = random_structured_instance(dim, rng);
        const int branches = static_cast<int>(inst.branches.size());
        CHECK(branches >= 2);
        CHECK(branches <= 4);
        CHECK(std::abs(inst.alpha.norm() - 1.0) < 1e-12);
        CHECK_NOTHROW(validate_partition(inst.partition));
        for (int i = 0; i < branches; ++i) {
            for (int j = i + 1; j < branches; ++j)
                CHECK(std::abs(inner_product(inst.branches[static_cast<std::size_t>(i)],
                                             inst.branches[static_cast<std::size_t>(j)])) < 1e-10);
        }
    }
    CHECK_THROWS_AS(random_structured_instance(1, rng), std::invalid_argument);
    CHECK_THROWS_AS(random_alpha(0, rng), std::invalid_argument);
}
