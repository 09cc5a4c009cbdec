#include "superlab/optim.hpp"

#include <algorithm>
#include <stdexcept>

namespace superlab {

AscentResult coordinate_ascent(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> initial, const CoordinateAscentOptions& options) {
    if (initial.empty()) {
        throw std::invalid_argument("coordinate_ascent: empty parameter vector");
    }
    if (!(options.lower_bound < options.upper_bound)) {
        throw std::invalid_argument("coordinate_ascent: empty search box");
    }

    const auto clamp = [&](double x) {
        return std::clamp(x, options.lower_bound, options.upper_bound);
    };

    AscentResult result;
    result.params = std::move(initial);
    for (double& x : result.params) x = clamp(x);
    result.value = objective(result.params);
    ++result.evaluations;

    std::vector<double> steps(result.params.size(), options.initial_step);

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        bool any_live = false;
        for (std::size_t k = 0; k < result.params.size(); ++k) {
            if (steps[k] < options.min_step) continue;
            any_live = true;

            bool improved = false;
            for (double direction : {+1.0, -1.0}) {
                const double saved = result.params[k];
                const double moved = clamp(saved + direction * steps[k]);
                if (moved == saved) continue;
                result.params[k] = moved;
                const double trial = objective(result.params);
                ++result.evaluations;
                if (trial > result.value) {
                    result.value = trial;
                    improved = true;
                    break;
                }
                result.params[k] = saved;
            }
            if (improved) {
                steps[k] = std::min(steps[k] * 2.0,
                                    options.upper_bound - options.lower_bound);
            } else {
                steps[k] *= 0.5;
            }
        }
        result.sweeps = sweep + 1;
        if (!any_live) break;
    }
    return result;
}

}  // namespace superlab
