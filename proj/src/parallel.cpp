#include "csi2img/parallel.hpp"

#include <malloc.h>

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace csi2img {

namespace {

int default_threads() {
    if (const char* env = std::getenv("CSI2IMG_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return std::min(n, 16);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return std::clamp(int(hw ? hw : 1), 1, 16);
}

int g_threads = default_threads();

}  // namespace

int thread_count() { return g_threads; }

void set_thread_count(int n) { g_threads = std::clamp(n, 1, 16); }

void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
#endif
}

void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t, int64_t)>& fn) {
    const int64_t total = end - begin;
    if (total <= 0) return;
    const int nthreads = std::min<int64_t>(g_threads, total);
    if (nthreads <= 1) {
        fn(begin, end);
        return;
    }
    const int64_t chunk = (total + nthreads - 1) / nthreads;
    std::vector<std::thread> workers;
    workers.reserve(size_t(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        const int64_t lo = begin + t * chunk;
        const int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& w : workers) w.join();
}

}  // namespace csi2img
