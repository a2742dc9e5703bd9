#pragma once

#include <cstddef>
#include <functional>

namespace nmzi {

// Worker threads used for ensembles and sweeps. Read from NMZI_WORKERS when
// set (>= 1), otherwise the hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index runs
// exactly once; the first exception thrown is rethrown after all threads
// join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

} // namespace nmzi
