#include "tdp/reduce.hpp"

#include <algorithm>
#include <atomic>
#include <span>
#include <thread>
#include <vector>

namespace tdp {

namespace {

double pairwise(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return x[0];
    const std::size_t half = n / 2;
    return pairwise(x, half) + pairwise(x + half, n - half);
}

std::span<const double> input(const TargetBuffer& buf, std::size_t n, const char* who) {
    auto data = buf.span<const double>();
    if (n > data.size())
        throw BoundsError(std::string(who) + ": n=" + std::to_string(n) + " exceeds buffer of " +
                          std::to_string(data.size()));
    return data.first(n);
}

// Runs body(block) for every block, spread over the configured workers.
// Deterministic launch configs use contiguous block ranges per worker.
template <class Body>
void for_each_block(const LaunchConfig& cfg, std::size_t nblocks, Body&& body) {
    const std::size_t nworkers = std::min(cfg.effective_workers(), nblocks);
    if (nworkers <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) body(b, std::size_t{0});
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(nworkers);
    if (cfg.deterministic) {
        for (std::size_t w = 0; w < nworkers; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t b = w * nblocks / nworkers; b < (w + 1) * nblocks / nworkers; ++b)
                    body(b, w);
            });
    } else {
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < nworkers; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t b; (b = next.fetch_add(1, std::memory_order_relaxed)) < nblocks;)
                    body(b, w);
            });
        workers.clear();
    }
}

template <class Pick>
double extremum(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg, const char* who,
                Pick pick) {
    cfg.validate();
    if (n == 0) throw InvalidArgument(std::string(who) + ": n must be >= 1");
    auto x = input(buf, n, who);
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(nblocks);
    for_each_block(cfg, nblocks, [&](std::size_t b, std::size_t) {
        const std::size_t first = b * kReduceBlock;
        const std::size_t last = std::min(first + kReduceBlock, n);
        double best = x[first];
        for (std::size_t i = first + 1; i < last; ++i) best = pick(best, x[i]);
        partial[b] = best;
    });
    double best = partial[0];
    for (std::size_t b = 1; b < nblocks; ++b) best = pick(best, partial[b]);
    return best;
}

}  // namespace

double target_double_sum(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg) {
    cfg.validate();
    auto x = input(buf, n, "target_double_sum");
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;

    if (cfg.deterministic) {
        std::vector<double> block_sums(nblocks);
        for_each_block(cfg, nblocks, [&](std::size_t b, std::size_t) {
            const std::size_t first = b * kReduceBlock;
            block_sums[b] = pairwise(x.data() + first, std::min(kReduceBlock, n - first));
        });
        return pairwise(block_sums.data(), nblocks);
    }

    std::vector<double> worker_sums(std::min(cfg.effective_workers(), nblocks), 0.0);
    for_each_block(cfg, nblocks, [&](std::size_t b, std::size_t w) {
        const std::size_t first = b * kReduceBlock;
        const std::size_t last = std::min(first + kReduceBlock, n);
        double s = 0.0;
        for (std::size_t i = first; i < last; ++i) s += x[i];
        worker_sums[w] += s;
    });
    double total = 0.0;
    for (double s : worker_sums) total += s;
    return total;
}

double target_double_min(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg) {
    return extremum(buf, n, cfg, "target_double_min",
                    [](double a, double b) { return b < a ? b : a; });
}

double target_double_max(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg) {
    return extremum(buf, n, cfg, "target_double_max",
                    [](double a, double b) { return b > a ? b : a; });
}

}  // namespace tdp
