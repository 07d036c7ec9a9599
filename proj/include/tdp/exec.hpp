#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

#include "tdp/layout.hpp"
#include "tdp/memspace.hpp"

namespace tdp {

enum class Backend { serial, threads };

/// Parses `serial` or `threads`.
Backend parse_backend(std::string_view text);
std::string_view to_string(Backend backend) noexcept;

/// Hardware concurrency, at least 1.
std::size_t default_workers() noexcept;

struct LaunchConfig {
    Backend backend = Backend::serial;
    std::size_t nworkers = default_workers();  // ignored by the serial backend
    /// Virtual vector length: sites per chunk, and the extent of the lane loop.
    std::size_t vvl = 1;
    /// Fixed contiguous chunk-to-worker blocks instead of dynamic scheduling.
    bool deterministic = true;

    /// Throws InvalidArgument for vvl == 0 or nworkers == 0.
    void validate() const;
    /// Workers actually used: 1 for the serial backend.
    std::size_t effective_workers() const noexcept {
        return backend == Backend::serial ? 1 : nworkers;
    }
};

/// One thread-level work item: `vvl` consecutive sites starting at `base`,
/// of which the first `nactive` are real (logical) sites.
struct SiteChunk {
    std::size_t base = 0;
    std::size_t vvl = 1;
    std::size_t nactive = 1;

    bool full() const noexcept { return nactive == vvl; }
    bool active(std::size_t lane) const noexcept { return lane < nactive; }
    std::size_t site(std::size_t lane) const noexcept { return base + lane; }
};

/// Chunk number `chunk` of a launch over `nsites_logical` sites.
inline SiteChunk make_chunk(std::size_t chunk, std::size_t vvl,
                            std::size_t nsites_logical) noexcept {
    const std::size_t base = chunk * vvl;
    const std::size_t remaining = base < nsites_logical ? nsites_logical - base : 0;
    return {base, vvl, remaining < vvl ? remaining : vvl};
}

namespace detail {

template <std::size_t N, class Body>
inline void fixed_lanes(Body& body) {
#pragma GCC ivdep
    for (std::size_t lane = 0; lane < N; ++lane) body(lane);
}

}  // namespace detail

/// The instruction-level construct: runs `body(lane)` for every active lane
/// of the chunk in ascending lane order. Inactive (padding) lanes are never
/// visited, so kernels cannot store into padding. Full chunks of common
/// widths take a fixed-trip-count loop the compiler can vectorize.
template <class Body>
inline void for_each_lane(const SiteChunk& chunk, Body&& body) {
    if (chunk.full()) {
        switch (chunk.vvl) {
            case 1: body(std::size_t{0}); return;
            case 2: detail::fixed_lanes<2>(body); return;
            case 4: detail::fixed_lanes<4>(body); return;
            case 8: detail::fixed_lanes<8>(body); return;
            case 16: detail::fixed_lanes<16>(body); return;
            default: break;
        }
    }
#pragma GCC ivdep
    for (std::size_t lane = 0; lane < chunk.nactive; ++lane) body(lane);
}

namespace detail {

/// Type-erased callback over a half-open range of chunk numbers.
struct ChunkRangeFn {
    void* ctx;
    void (*call)(void* ctx, std::size_t first_chunk, std::size_t last_chunk);
};

/// Distributes [0, nchunks) over the configured workers; rethrows the
/// exception of the lowest failing chunk after every worker has stopped.
void run_chunks(const LaunchConfig& cfg, std::size_t nchunks, ChunkRangeFn fn);

}  // namespace detail

/// Applies `kernel(chunk)` to every chunk of `layout`: chunks start at
/// 0, vvl, 2*vvl, ... below nsites_padded. Each chunk runs on exactly one
/// worker. The layout must have been built with a padding quantum that is a
/// multiple of cfg.vvl.
template <class Kernel>
void launch(const LaunchConfig& cfg, const LayoutDescriptor& layout, Kernel&& kernel) {
    cfg.validate();
    if (layout.nsites_padded() % cfg.vvl != 0)
        throw InvalidArgument("launch: padded site count " +
                              std::to_string(layout.nsites_padded()) +
                              " is not a multiple of vvl " + std::to_string(cfg.vvl));
    const std::size_t nchunks = layout.nsites_padded() / cfg.vvl;
    const std::size_t vvl = cfg.vvl;
    const std::size_t nlogical = layout.nsites_logical();

    auto range = [&](std::size_t first, std::size_t last) {
        for (std::size_t c = first; c < last; ++c) kernel(make_chunk(c, vvl, nlogical));
    };
    using Range = decltype(range);
    detail::ChunkRangeFn fn{&range, [](void* ctx, std::size_t first, std::size_t last) {
                                (*static_cast<Range*>(ctx))(first, last);
                            }};
    detail::run_chunks(cfg, nchunks, fn);
}

/// As above, with `constants` held read-only for the duration of the launch.
/// The kernel is called as `kernel(chunk, constants)`.
template <class Kernel>
void launch(const LaunchConfig& cfg, const LayoutDescriptor& layout,
            const ConstantTable& constants, Kernel&& kernel) {
    ConstantTable::LaunchGuard guard(constants);
    launch(cfg, layout, [&](const SiteChunk& chunk) { kernel(chunk, constants); });
}

/// Waits for all launched work. Launches are synchronous on the CPU
/// backends, so this returns immediately.
void synchronize() noexcept;

}  // namespace tdp
