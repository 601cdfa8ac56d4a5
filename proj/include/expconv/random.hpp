#pragma once

#include <cstdint>
#include <random>

namespace expconv {

/// Platform-independent uniform draws from a seeded mt19937_64 (the standard
/// distributions are implementation-defined, the engine is not).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace expconv
