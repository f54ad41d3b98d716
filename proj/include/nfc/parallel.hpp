#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace nfc {

inline int& thread_count() {
    static int n = []() {
        unsigned hc = std::thread::hardware_concurrency();
        return hc ? static_cast<int>(hc) : 1;
    }();
    return n;
}

// Splits [begin, end) into contiguous chunks, one worker per chunk.
// Results are merged by the caller in chunk order, so reductions are
// deterministic regardless of scheduling.
template <typename Body>
void parallel_chunks(long long begin, long long end, const Body& body,
                     int nthreads = 0) {
    if (nthreads <= 0) nthreads = thread_count();
    long long total = end - begin;
    if (total <= 0) return;
    int k = static_cast<int>(std::min<long long>(nthreads, total));
    if (k <= 1) {
        body(0, begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(k);
    long long step = total / k, rem = total % k;
    long long lo = begin;
    for (int t = 0; t < k; ++t) {
        long long hi = lo + step + (t < rem ? 1 : 0);
        pool.emplace_back([&body, t, lo, hi]() { body(t, lo, hi); });
        lo = hi;
    }
    for (auto& th : pool) th.join();
}

}  // namespace nfc
