#pragma once

#include "superlab/dynamics.hpp"
#include "superlab/statespace.hpp"
#include "superlab/unitary.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace superlab {

// The isolated-machine experiment: prepare an electron superposition,
// let the experimenter measure it, interfere the branches into a shared
// record state, read the paper, repeat.

namespace spin {
inline constexpr int up = 0;
inline constexpr int down = 1;
}  // namespace spin

namespace experimenter {
inline constexpr int ready = 0;     // E0, before looking at the electron
inline constexpr int saw_up = 1;    // E[↑]
inline constexpr int saw_down = 2;  // E[↓]
}  // namespace experimenter

namespace paper {
inline constexpr int blank = 0;
inline constexpr int no = 1;
inline constexpr int yes = 2;
}  // namespace paper

// spin(2) ⊗ experimenter(3) ⊗ paper(3), big-endian.
RegisterLayout protocol_layout();

struct ExperimentConfig {
    double phase_actual = 0.0;   // relative phase of the prepared superposition
    double phase_assumed = 0.0;  // phase the machine transform is built for
    int trials = 1;
    EvolutionModel model;
    std::uint64_t seed = 0;
};

enum class Outcome { No, Yes };

struct TrialRecord {
    int index = 0;
    Outcome outcome = Outcome::No;
    double outcome_probability_rsi = 0.0;       // P(outcome | unitary-only)
    double outcome_probability_collapse = 0.0;  // P(outcome | objective collapse)
};

// Recorded RSI probabilities at or below this floor count as a
// zero-probability outcome: the phase-specific RSI hypothesis is rejected
// outright instead of producing a non-finite log Bayes factor.
inline constexpr double zero_probability_floor = 1e-12;

struct EvidenceLedger {
    long yes_count = 0;
    long no_count = 0;
    // Σ log(P(outcome|RSI) / P(outcome|collapse)) over trials with nonzero
    // RSI probability. Authoritative only while rsi_rejected is false.
    double log_bayes_factor = 0.0;
    bool rsi_rejected = false;
};

// (|↑⟩ + e^{i·phase_actual}|↓⟩)/√2 ⊗ |E0⟩ ⊗ |blank⟩.
StateVector prepare_initial(const ExperimentConfig& cfg);

// The experimenter measures the electron: |↑,E0⟩ → |↑,E[↑]⟩ and
// |↓,E0⟩ → |↓,E[↓]⟩ on a blank paper, completed to a full unitary.
UnitaryOperator build_entangle_transform();

// The machine transform of the allowable test:
//   |↑,E[↑],blank⟩ → |reset⟩ ⊗ (|N⟩+|Y⟩)/√2
//   |↓,E[↓],blank⟩ → e^{-i·phase_assumed} |reset⟩ ⊗ (-|N⟩+|Y⟩)/√2
// where |reset⟩ = |↑,E0⟩ is the wiped memory state shared by both branches.
UnitaryOperator build_machine_transform(const ExperimentConfig& cfg);

// Executes one trial: prepare → measurement interaction (per model) →
// machine transform → projective readout of the paper register. Records
// the outcome together with both models' predicted probabilities for it.
TrialRecord run_trial(const ExperimentConfig& cfg, int index);

// All trials of cfg, by index. Identical to calling run_trial per index;
// the shared transforms are built once.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);

// RSI probability of Yes when the machine's assumed phase differs from the
// actual preparation phase by phase_mismatch: cos²(phase_mismatch/2).
double rsi_yes_probability(double phase_mismatch);

// Outcome counts and the accumulated log Bayes factor (RSI over collapse).
EvidenceLedger accumulate_evidence(std::span<const TrialRecord> records);

}  // namespace superlab
