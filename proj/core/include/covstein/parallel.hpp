#pragma once

#include <cstddef>
#include <functional>

namespace covstein {

/// Number of hardware threads, at least 1.
unsigned hardware_parallelism() noexcept;

/// Runs body(i) for i in [0, count) on up to `workers` threads using a
/// static contiguous partition. Results must be written to per-index slots
/// so output does not depend on the worker count. The first exception thrown
/// by any body is rethrown after all workers have joined.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace covstein
