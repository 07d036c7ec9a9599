#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tdp {

/// Reproducible uniform doubles in [lo, hi).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Each draw keeps the top 53 bits, scaled by 2^-53; the standard
/// distributions are avoided because their algorithms are implementation
/// defined.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

inline std::vector<double> uniform_doubles(std::uint64_t seed, std::size_t n, double lo,
                                           double hi) {
    UniformStream stream(seed);
    std::vector<double> out(n);
    for (double& x : out) x = stream.next(lo, hi);
    return out;
}

}  // namespace tdp
