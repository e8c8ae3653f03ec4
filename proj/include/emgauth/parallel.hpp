#pragma once

#include <cstddef>
#include <functional>

namespace emgauth {

// Number of worker threads used by parallel_for. 0 selects the hardware
// concurrency. Results never depend on this value: every task writes to its
// own output slot and reductions happen afterwards in index order.
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs body(i) for i in [0, n). Exceptions thrown by tasks are rethrown on the
// calling thread; when several tasks throw, the one with the lowest index wins.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace emgauth
