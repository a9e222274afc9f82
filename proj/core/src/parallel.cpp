#include "mzsg/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

namespace mzsg {

namespace {

std::atomic<int> g_threads{0}; // 0 = auto

int detect_default() {
    const unsigned hw = std::thread::hardware_concurrency();
    return std::clamp(static_cast<int>(hw), 1, 8);
}

} // namespace

int thread_budget() {
    const int t = g_threads.load(std::memory_order_relaxed);
    if (t > 0) return t;
    static const int auto_budget = detect_default();
    return auto_budget;
}

void set_thread_budget(int n) { g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed); }

void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), chunks);

    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            fn(c * kReductionChunk, std::min(n, (c + 1) * kReductionChunk));
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) return;
            try {
                fn(c * kReductionChunk, std::min(n, (c + 1) * kReductionChunk));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace mzsg
