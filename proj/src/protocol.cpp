#include "superlab/protocol.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace superlab {

namespace {

// Fixed completion seeds keep protocol runs reproducible; any completion
// of the unspecified complement is equally valid.
constexpr std::uint64_t entangle_completion_seed = 101;
constexpr std::uint64_t machine_completion_seed = 202;

const char* spin_register = "spin";
const char* paper_register = "paper";

StateVector protocol_basis(int s, int e, int p) {
    return StateVector::basis(protocol_layout(), {s, e, p});
}

}  // namespace

RegisterLayout protocol_layout() {
    return RegisterLayout({{"spin", 2}, {"experimenter", 3}, {"paper", 3}});
}

StateVector prepare_initial(const ExperimentConfig& cfg) {
    const RegisterLayout layout = protocol_layout();
    Vector amps = Vector::Zero(layout.total_dim());
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const Complex phase(std::cos(cfg.phase_actual), std::sin(cfg.phase_actual));
    amps(layout.flat_index(std::array{spin::up, experimenter::ready, paper::blank})) =
        Complex(inv_sqrt2, 0.0);
    amps(layout.flat_index(std::array{spin::down, experimenter::ready, paper::blank})) =
        phase * inv_sqrt2;
    return StateVector(layout, std::move(amps));
}

UnitaryOperator build_entangle_transform() {
    PartialIsometrySpec spec;
    spec.pairs.emplace_back(
        protocol_basis(spin::up, experimenter::ready, paper::blank),
        protocol_basis(spin::up, experimenter::saw_up, paper::blank));
    spec.pairs.emplace_back(
        protocol_basis(spin::down, experimenter::ready, paper::blank),
        protocol_basis(spin::down, experimenter::saw_down, paper::blank));
    return complete_to_unitary(spec, entangle_completion_seed);
}

UnitaryOperator build_machine_transform(const ExperimentConfig& cfg) {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const StateVector record_no = protocol_basis(spin::up, experimenter::ready, paper::no);
    const StateVector record_yes = protocol_basis(spin::up, experimenter::ready, paper::yes);

    // Both outputs share the |reset⟩ = |↑, E0⟩ product: memories wiped,
    // identical across branches; only the paper differs.
    const StateVector up_image = linear_combination(
        Complex(inv_sqrt2, 0.0), record_no, Complex(inv_sqrt2, 0.0), record_yes, false);
    const Complex comp(std::cos(cfg.phase_assumed), -std::sin(cfg.phase_assumed));
    const StateVector down_image = linear_combination(
        -comp * inv_sqrt2, record_no, comp * inv_sqrt2, record_yes, false);

    PartialIsometrySpec spec;
    spec.pairs.emplace_back(
        protocol_basis(spin::up, experimenter::saw_up, paper::blank), up_image);
    spec.pairs.emplace_back(
        protocol_basis(spin::down, experimenter::saw_down, paper::blank), down_image);
    return complete_to_unitary(spec, machine_completion_seed);
}

double rsi_yes_probability(double phase_mismatch) {
    const double c = std::cos(phase_mismatch / 2.0);
    return c * c;
}

namespace {

Outcome paper_value_to_outcome(int value) {
    if (value == paper::yes) return Outcome::Yes;
    if (value == paper::no) return Outcome::No;
    throw std::logic_error("protocol: paper register read back a blank record");
}

TrialRecord run_trial_impl(const ExperimentConfig& cfg, int index,
                           const UnitaryOperator& entangle,
                           const UnitaryOperator& machine) {
    Rng rng = Rng::for_stream(cfg.seed, static_cast<std::uint64_t>(index));
    const StateVector initial = prepare_initial(cfg);
    const StateVector entangled = apply(entangle, initial);

    // Deterministic predictions of both models for this configuration.
    const StateVector rsi_final = apply(machine, entangled);
    const std::vector<double> rsi_dist = born_distribution(rsi_final, paper_register);
    const double p_yes_rsi = rsi_dist[paper::yes];

    const std::vector<double> spin_dist = born_distribution(entangled, spin_register);
    double p_yes_collapse = 0.0;
    for (int v = 0; v < static_cast<int>(spin_dist.size()); ++v) {
        if (spin_dist[v] <= 0.0) continue;
        const Projection branch = project_register(entangled, spin_register, v);
        const StateVector branch_final = apply(machine, *branch.post_state);
        p_yes_collapse +=
            spin_dist[v] * born_distribution(branch_final, paper_register)[paper::yes];
    }

    // The sampled history. The paper readout is a real record in both
    // models; under unitary-only evolution it is the sole sampling event.
    const ProtocolStep entangle_step{ProtocolStep::Kind::MeasurementInteraction, entangle};
    EvolveResult evolved = evolve(cfg.model, initial, entangle_step, rng);
    const StateVector machine_out = apply(machine, evolved.state);
    const MeasurementOutcome readout = measure_register(machine_out, paper_register, rng);
    const Outcome outcome = paper_value_to_outcome(readout.value);

    TrialRecord record;
    record.index = index;
    record.outcome = outcome;
    record.outcome_probability_rsi =
        (outcome == Outcome::Yes) ? p_yes_rsi : 1.0 - p_yes_rsi;
    record.outcome_probability_collapse =
        (outcome == Outcome::Yes) ? p_yes_collapse : 1.0 - p_yes_collapse;
    return record;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, int index) {
    return run_trial_impl(cfg, index, build_entangle_transform(),
                          build_machine_transform(cfg));
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) {
        throw std::invalid_argument("run_trials: trials must be at least 1");
    }
    const UnitaryOperator entangle = build_entangle_transform();
    const UnitaryOperator machine = build_machine_transform(cfg);
    std::vector<TrialRecord> records;
    records.reserve(cfg.trials);
    for (int i = 0; i < cfg.trials; ++i) {
        records.push_back(run_trial_impl(cfg, i, entangle, machine));
    }
    return records;
}

EvidenceLedger accumulate_evidence(std::span<const TrialRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("accumulate_evidence: no trial records");
    }
    EvidenceLedger ledger;
    for (const TrialRecord& r : records) {
        if (r.outcome == Outcome::Yes) {
            ++ledger.yes_count;
        } else {
            ++ledger.no_count;
        }
        if (r.outcome_probability_rsi <= zero_probability_floor) {
            // The outcome is impossible under RSI at this phase; flag the
            // rejection instead of pushing the ledger to -infinity.
            ledger.rsi_rejected = true;
        } else {
            ledger.log_bayes_factor +=
                std::log(r.outcome_probability_rsi / r.outcome_probability_collapse);
        }
    }
    return ledger;
}

}  // namespace superlab
