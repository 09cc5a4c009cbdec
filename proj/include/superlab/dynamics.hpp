#pragma once

#include "superlab/rng.hpp"
#include "superlab/statespace.hpp"
#include "superlab/unitary.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace superlab {

// The two rival evolution models: pure unitary evolution (RSI) and
// objective collapse (projective measurement with Born sampling).
enum class ModelKind { UnitaryOnly, ObjectiveCollapse };

struct EvolutionModel {
    ModelKind kind = ModelKind::UnitaryOnly;
    // Registers collapsed at measurement-interaction steps (ObjectiveCollapse only).
    std::vector<std::string> collapse_registers;
    std::uint64_t rng_seed = 0;
};

struct MeasurementOutcome {
    std::string register_name;
    int value = 0;
    double probability = 0.0;
    StateVector post_state;
};

// Born probabilities of each basis value of the named register.
std::vector<double> born_distribution(const StateVector& psi,
                                      std::string_view register_name);

// Deterministic projection onto register == value. Probability is the
// squared norm of the projected component; post_state is absent when it is
// (numerically) zero.
struct Projection {
    double probability = 0.0;
    std::optional<StateVector> post_state;
};
Projection project_register(const StateVector& psi,
                            std::string_view register_name, int value);

// Samples a basis value of the register with Born probabilities and
// returns the renormalized projection. Zero-probability values are never
// returned.
MeasurementOutcome measure_register(const StateVector& psi,
                                    std::string_view register_name, Rng& rng);

// One step of a protocol: either a plain unitary or a measurement
// interaction (an entangling unitary that objective collapse follows with
// a projective collapse of the model's designated registers).
struct ProtocolStep {
    enum class Kind { Unitary, MeasurementInteraction };
    Kind kind = Kind::Unitary;
    UnitaryOperator op;
};

struct EvolveResult {
    StateVector state;
    std::vector<MeasurementOutcome> outcomes;  // empty under UnitaryOnly
};

// UnitaryOnly applies the step's unitary and never consults the RNG.
// ObjectiveCollapse applies the unitary, then for measurement interactions
// collapses each designated register via measure_register.
EvolveResult evolve(const EvolutionModel& model, const StateVector& psi,
                    const ProtocolStep& step, Rng& rng);

}  // namespace superlab
