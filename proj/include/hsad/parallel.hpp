#pragma once

#include <cstddef>
#include <functional>

namespace hsad {

// 0 = auto (hardware concurrency).
void set_thread_count(int threads);
int thread_count();

// Runs fn(begin, end) over disjoint chunks of [0, n). Callers must only
// write to disjoint output slots so that the result is independent of the
// thread count.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

} // namespace hsad
