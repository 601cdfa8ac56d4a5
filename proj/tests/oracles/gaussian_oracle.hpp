#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace oracle {

// log of ∫ e^{−η⟨t⟩²} e^{s⟨x−t⟩²} dt over ℝ^d, completing the square; needs η > s.
inline double log_gaussian_convolution(double eta, double s, std::span<const double> x) {
    double x2 = 0.0;
    for (double v : x) x2 += v * v;
    const double d = static_cast<double>(x.size());
    return s - eta + 0.5 * d * std::log(std::numbers::pi / (eta - s)) + s * eta * x2 / (eta - s);
}

// d/dx of the same in d = 1, as a multiple of the value: 2sηx/(η−s).
inline double gaussian_log_slope(double eta, double s, double x) { return 2.0 * s * eta * x / (eta - s); }

}  // namespace oracle
