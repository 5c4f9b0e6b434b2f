#pragma once

#include <functional>

#include "vmilan/types.hpp"

namespace vmilan {

/// Number of worker threads used by data-parallel operator loops (default 1).
/// Loops only split independent per-entry work, so results do not depend on
/// this value.
void set_thread_count(int threads);
int thread_count();

/// Reads VMILAN_THREADS from the environment, if set.
void configure_threads_from_env();

/// Calls body(begin, end) over contiguous chunks of [0, count).
void parallel_for(Index count, const std::function<void(Index, Index)>& body);

}  // namespace vmilan
