#pragma once

#include <cstddef>
#include <functional>

namespace mixlab {

/// Worker count used by every Monte-Carlo loop. Results never depend on it.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs task(i) for i in [0, n_tasks) on up to thread_count() workers.
/// The first exception thrown by any task is rethrown on the caller.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

}  // namespace mixlab
