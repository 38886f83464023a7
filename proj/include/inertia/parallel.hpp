// Index-parallel loops over independent solves.
#pragma once

#include <functional>

namespace inertia {

// INERTIA_THREADS when set to a positive integer, else the hardware
// concurrency (at least 1).
int worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads. Results
// must be written to per-index slots. If any call throws, the exception of
// the lowest failing index is rethrown after all workers finish.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace inertia
