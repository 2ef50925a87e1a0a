#pragma once

#include <cstddef>
#include <functional>

namespace fracpersist {

/// Thread count to use: `requested` if nonzero, else the FRACPERSIST_THREADS
/// environment variable, else 1.
unsigned resolve_threads(unsigned requested);

/// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks are claimed
/// dynamically, so a task must not depend on which worker runs it. The first
/// exception thrown by any task is rethrown after all workers have joined.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace fracpersist
