#include "tdp/exec.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace tdp {

Backend parse_backend(std::string_view text) {
    if (text == "serial") return Backend::serial;
    if (text == "threads") return Backend::threads;
    throw InvalidArgument("invalid backend '" + std::string(text) +
                          "' (expected serial or threads)");
}

std::string_view to_string(Backend backend) noexcept {
    return backend == Backend::serial ? "serial" : "threads";
}

std::size_t default_workers() noexcept {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

void LaunchConfig::validate() const {
    if (vvl == 0) throw InvalidArgument("LaunchConfig: vvl must be >= 1");
    if (nworkers == 0) throw InvalidArgument("LaunchConfig: nworkers must be >= 1");
}

namespace detail {

namespace {

// Records the failure with the lowest chunk number. Workers skip only chunks
// above the lowest failure seen so far, so the lowest failing chunk always
// runs and the exception a caller sees does not depend on thread timing.
class FailureSlot {
public:
    void record(std::size_t chunk, std::exception_ptr error) {
        std::lock_guard lock(mutex_);
        if (chunk < lowest_.load(std::memory_order_relaxed)) {
            lowest_.store(chunk, std::memory_order_relaxed);
            error_ = std::move(error);
        }
    }
    bool skip(std::size_t chunk) const noexcept {
        return chunk > lowest_.load(std::memory_order_relaxed);
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::atomic<std::size_t> lowest_{std::numeric_limits<std::size_t>::max()};
    std::exception_ptr error_;
};

void run_range(ChunkRangeFn fn, std::size_t first, std::size_t last, FailureSlot& failure) {
    for (std::size_t c = first; c < last; ++c) {
        if (failure.skip(c)) return;
        try {
            fn.call(fn.ctx, c, c + 1);
        } catch (...) {
            failure.record(c, std::current_exception());
            return;
        }
    }
}

}  // namespace

void run_chunks(const LaunchConfig& cfg, std::size_t nchunks, ChunkRangeFn fn) {
    if (nchunks == 0) return;

    if (cfg.backend == Backend::serial) {
        fn.call(fn.ctx, 0, nchunks);
        return;
    }

    const std::size_t nworkers = cfg.nworkers;
    FailureSlot failure;
    std::vector<std::jthread> workers;
    workers.reserve(nworkers);

    if (cfg.deterministic) {
        // Block decomposition: worker w owns chunks [w*n/W, (w+1)*n/W).
        for (std::size_t w = 0; w < nworkers; ++w) {
            const std::size_t first = w * nchunks / nworkers;
            const std::size_t last = (w + 1) * nchunks / nworkers;
            if (first == last) continue;
            workers.emplace_back([=, &failure] { run_range(fn, first, last, failure); });
        }
    } else {
        // Self-scheduling: workers pull batches from a shared counter.
        const std::size_t batch = std::max<std::size_t>(1, nchunks / (8 * nworkers));
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < nworkers; ++w) {
            workers.emplace_back([&, batch] {
                for (;;) {
                    const std::size_t first = next.fetch_add(batch, std::memory_order_relaxed);
                    if (first >= nchunks || failure.skip(first)) return;
                    run_range(fn, first, std::min(first + batch, nchunks), failure);
                }
            });
        }
        workers.clear();  // join before `next` leaves scope
    }
    workers.clear();
    failure.rethrow();
}

}  // namespace detail

void synchronize() noexcept {}

}  // namespace tdp
