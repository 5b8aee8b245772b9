#pragma once

#include <cstddef>
#include <functional>

namespace isac {

/// Number of worker threads used by parallel_for (hardware concurrency, at least 1).
unsigned worker_count();

/// Run fn(i) for i in [0, n) on a pool of workers. Work is split by index so
/// results written to per-index slots are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace isac
