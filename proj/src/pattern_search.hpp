#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace expconv::detail {

// Coordinate pattern search for a local maximum of f inside the box |x_i| ≤ radius.
// Returns the number of evaluations.
inline std::size_t pattern_maximize(const std::function<double(std::span<const double>)>& f, std::vector<double>& x,
                                    double& value, double step, double radius, double min_step_fraction = 1e-7,
                                    int max_iterations = 2000) {
    const double min_step = step * min_step_fraction;
    std::size_t evaluations = 0;
    for (int iter = 0; iter < max_iterations && step > min_step; ++iter) {
        bool moved = false;
        for (std::size_t a = 0; a < x.size(); ++a) {
            for (double dir : {1.0, -1.0}) {
                std::vector<double> y = x;
                y[a] = std::clamp(y[a] + dir * step, -radius, radius);
                if (y[a] == x[a]) continue;
                const double v = f(y);
                ++evaluations;
                if (v > value) {
                    x = std::move(y);
                    value = v;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    return evaluations;
}

}  // namespace expconv::detail
