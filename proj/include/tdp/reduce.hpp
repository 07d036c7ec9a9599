#pragma once

#include <cstddef>

#include "tdp/exec.hpp"
#include "tdp/memspace.hpp"

namespace tdp {

/// Elements per leaf block of the deterministic summation tree.
inline constexpr std::size_t kReduceBlock = 256;

/// Sum of the first `n` doubles of `buf`.
///
/// Deterministic mode: each block of kReduceBlock elements is summed by
/// recursive halving (left half gets n/2 elements), then the block sums are
/// combined by the same recursive halving. The tree depends only on `n`, so
/// the result is bitwise reproducible for any worker count or backend.
///
/// Non-deterministic mode: workers fold the blocks they grab left to right and
/// partial sums are combined in completion order.
double target_double_sum(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg);

/// Exact extrema of the first `n` doubles; n == 0 is an error. -0.0 and +0.0
/// compare equal and either may be returned.
double target_double_min(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg);
double target_double_max(const TargetBuffer& buf, std::size_t n, const LaunchConfig& cfg);

}  // namespace tdp
