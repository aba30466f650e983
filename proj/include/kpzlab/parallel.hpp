// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace kpzlab {

// Runs body(i) for i in [0, count) on up to `threads` workers (0 means
// hardware concurrency). Callers write results by index, so output does
// not depend on the thread count. The first exception thrown by a worker
// is rethrown on the caller.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested);

}  // namespace kpzlab
