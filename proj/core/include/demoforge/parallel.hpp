#pragma once

#include <cstddef>
#include <functional>

namespace demoforge {

/// Worker cap: DEMOFORGE_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) over up to worker_count() threads. Each index
/// is visited exactly once; callers write results by index so output order is
/// independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace demoforge
