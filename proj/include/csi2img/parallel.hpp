#pragma once

#include <cstdint>
#include <functional>

namespace csi2img {

// Global worker count. Defaults to CSI2IMG_THREADS or the hardware count,
// clamped to [1, 16].
int thread_count();
void set_thread_count(int n);

// Splits [begin, end) into one contiguous chunk per worker and runs
// fn(chunk_begin, chunk_end) on each. Every index is processed by exactly
// one worker with the same per-index operation order as a sequential run,
// so results are identical for any thread count.
void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t, int64_t)>& fn);

// Raises the allocator's mmap/trim thresholds so the multi-megabyte tensor
// buffers recycle through the heap instead of faulting fresh pages every
// iteration. Idempotent.
void tune_allocator();

}  // namespace csi2img
