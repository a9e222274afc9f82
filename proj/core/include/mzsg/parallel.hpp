#ifndef MZSG_PARALLEL_HPP
#define MZSG_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace mzsg {

/// Worker count used by parallel loops. Affects speed only, never results:
/// all reductions run in a fixed chunk order independent of scheduling.
int thread_budget();
void set_thread_budget(int n);

constexpr std::size_t kReductionChunk = 4096;

/// Runs fn(begin, end) over fixed-size chunks of [0, n), possibly on several
/// threads. Chunk boundaries do not depend on the thread budget.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Runs fn(i) for each i in [0, n).
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

/// Deterministic sum of value(i) over [0, n): per-chunk partial sums are
/// accumulated sequentially in chunk order regardless of worker count.
template <class F>
double chunked_sum(std::size_t n, F&& value) {
    if (n == 0) return 0.0;
    const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += value(i);
        partial[b / kReductionChunk] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

/// Deterministic max reduction (order-independent by nature, parallel here
/// for symmetry with chunked_sum).
template <class F>
double chunked_max(std::size_t n, F&& value, double init) {
    if (n == 0) return init;
    const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(chunks, init);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double s = init;
        for (std::size_t i = b; i < e; ++i) {
            const double v = value(i);
            if (v > s) s = v;
        }
        partial[b / kReductionChunk] = s;
    });
    double total = init;
    for (double p : partial)
        if (p > total) total = p;
    return total;
}

} // namespace mzsg

#endif // MZSG_PARALLEL_HPP
