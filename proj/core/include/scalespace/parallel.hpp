#pragma once

#include <cstddef>
#include <functional>

namespace scalespace {

/// Environment variable holding the worker-thread count.
inline constexpr const char* kThreadsEnv = "SCALESPACE_THREADS";

/// Worker count from SCALESPACE_THREADS, else hardware concurrency (>= 1).
std::size_t thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Every index
/// runs exactly once; if any call throws, the exception of the lowest failing
/// index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace scalespace
