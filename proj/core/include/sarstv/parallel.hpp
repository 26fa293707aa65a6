#pragma once

#include <cstddef>
#include <functional>

namespace sarstv {

/// Worker count: SARSTV_THREADS if set to a positive integer, otherwise
/// std::thread::hardware_concurrency().
unsigned max_threads();

/// Runs body(i) for i in [0, n). Iterations are split into contiguous
/// blocks over at most max_threads() threads. Calls made from inside a
/// worker run serially, so nested parallel regions never oversubscribe.
/// Results must not depend on the schedule; every body writes only its
/// own outputs. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sarstv
