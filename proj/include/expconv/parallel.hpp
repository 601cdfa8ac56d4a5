#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace expconv {

/// Worker count: EXPCONV_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks, one per worker.
/// Callers write results into per-index slots so any reduction done
/// afterwards is independent of scheduling. The first exception thrown by
/// any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

}  // namespace expconv
