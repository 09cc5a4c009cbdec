#pragma once

#include <functional>
#include <vector>

namespace superlab {

// Seeded random-restart coordinate ascent with per-coordinate adaptive
// steps. Deliberately unsophisticated: the search suites only need a
// reliable local climber, not optimization performance.
struct CoordinateAscentOptions {
    int max_sweeps = 60;
    double initial_step = 0.25;
    double min_step = 1e-9;       // stop once every coordinate step is below this
    double lower_bound = -10.0;   // search box applied to every coordinate
    double upper_bound = 10.0;
};

struct AscentResult {
    std::vector<double> params;
    double value = 0.0;
    long evaluations = 0;
    int sweeps = 0;
};

AscentResult coordinate_ascent(const std::function<double(const std::vector<double>&)>& objective,
                               std::vector<double> initial,
                               const CoordinateAscentOptions& options = {});

}  // namespace superlab
