#pragma once

#include <cstddef>
#include <functional>

namespace dgbench {

// Runs fn(0..trials-1) across up to `workers` threads (sequentially when
// workers <= 1). fn must write only to its own trial's slot; any exception
// is rethrown on the calling thread after all workers join. Results must be
// aggregated by the caller in trial order, which keeps outputs independent
// of the worker count.
void parallel_trials(std::size_t trials, int workers,
                     const std::function<void(std::size_t)>& fn);

// Hardware thread count, at least 1.
int default_workers();

}  // namespace dgbench
