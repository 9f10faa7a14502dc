#pragma once

#include <cstddef>
#include <functional>

namespace quic {

/// Worker count: QUIC_SIM_THREADS if set and > 0, otherwise the hardware
/// concurrency (at least 1).
unsigned worker_count();

/// Calls fn(i) for every i in [0, n). Indices are handed out in chunks to a
/// pool of worker_count() threads; fn must only touch state owned by i.
/// The first exception thrown by fn is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace quic
