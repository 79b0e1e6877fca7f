#pragma once

#include <cstddef>
#include <functional>

namespace evflow {

// Upper bound on worker threads used by parallel_for. 0 means
// std::thread::hardware_concurrency().
void set_max_threads(std::size_t n);
std::size_t max_threads();

// Runs fn(i) for i in [0, n). Calls made from inside another parallel_for
// body run serially on the calling thread, so outer worker pools are not
// oversubscribed. Exceptions are rethrown on the calling thread (the one
// from the lowest failing index).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace evflow
