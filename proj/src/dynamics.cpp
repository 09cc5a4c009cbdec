#include "superlab/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace superlab {

namespace {

struct RegisterView {
    int index;
    int dim;
    int stride;
};

RegisterView locate(const StateVector& psi, std::string_view register_name) {
    const int r = psi.layout().index_of(register_name);
    return {r, psi.layout().at(r).dim, psi.layout().stride(r)};
}

// Basis value of the register at a flat composite index.
int digit_at(int flat, const RegisterView& reg) {
    return (flat / reg.stride) % reg.dim;
}

}  // namespace

std::vector<double> born_distribution(const StateVector& psi,
                                      std::string_view register_name) {
    const RegisterView reg = locate(psi, register_name);
    std::vector<double> probs(reg.dim, 0.0);
    for (int flat = 0; flat < psi.dim(); ++flat) {
        probs[digit_at(flat, reg)] += std::norm(psi.amplitude(flat));
    }
    return probs;
}

Projection project_register(const StateVector& psi,
                            std::string_view register_name, int value) {
    const RegisterView reg = locate(psi, register_name);
    if (value < 0 || value >= reg.dim) {
        throw std::invalid_argument("project_register: value out of range");
    }
    Vector projected = Vector::Zero(psi.dim());
    double mass = 0.0;
    for (int flat = 0; flat < psi.dim(); ++flat) {
        if (digit_at(flat, reg) == value) {
            projected(flat) = psi.amplitude(flat);
            mass += std::norm(psi.amplitude(flat));
        }
    }
    Projection result;
    result.probability = mass;
    if (mass > 0.0) {
        projected /= std::sqrt(mass);
        result.post_state = StateVector(psi.layout(), std::move(projected));
    }
    return result;
}

MeasurementOutcome measure_register(const StateVector& psi,
                                    std::string_view register_name, Rng& rng) {
    const std::vector<double> probs = born_distribution(psi, register_name);
    const double u = rng.uniform();

    // Inverse-CDF over the strictly positive entries only, so a
    // zero-probability value can never be selected.
    int chosen = -1;
    double cumulative = 0.0;
    for (int v = 0; v < static_cast<int>(probs.size()); ++v) {
        if (probs[v] <= 0.0) continue;
        cumulative += probs[v];
        chosen = v;
        if (u < cumulative) break;
    }
    if (chosen < 0) {
        throw std::runtime_error("measure_register: state has no probability mass");
    }

    Projection proj = project_register(psi, register_name, chosen);
    return MeasurementOutcome{std::string(register_name), chosen,
                              proj.probability, std::move(*proj.post_state)};
}

EvolveResult evolve(const EvolutionModel& model, const StateVector& psi,
                    const ProtocolStep& step, Rng& rng) {
    StateVector state = apply(step.op, psi);
    EvolveResult result{std::move(state), {}};
    if (model.kind == ModelKind::ObjectiveCollapse &&
        step.kind == ProtocolStep::Kind::MeasurementInteraction) {
        for (const auto& reg : model.collapse_registers) {
            MeasurementOutcome outcome = measure_register(result.state, reg, rng);
            result.state = outcome.post_state;
            result.outcomes.push_back(std::move(outcome));
        }
    }
    return result;
}

}  // namespace superlab
