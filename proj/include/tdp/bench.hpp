#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tdp/exec.hpp"
#include "tdp/kernels.hpp"

namespace tdp {

// --- timing -------------------------------------------------------------------

struct TimingStats {
    double min_s = 0.0;
    double mean_s = 0.0;
    double stddev_s = 0.0;
    std::size_t reps = 0;
};

/// Runs `run` `warmup` times untimed, then `reps` times timed on the steady
/// clock. The reported statistic is the minimum; mean and standard deviation
/// are kept for diagnostics. Exceptions from `run` abort the measurement.
TimingStats measure(const std::function<void()>& run, std::size_t warmup, std::size_t reps);

// --- roofline -------------------------------------------------------------------

struct MachineModel {
    std::string name;
    double peak_flops = 0.0;  // double-precision flop/s
    double stream_bw = 0.0;   // bytes/s

    /// Throws InvalidArgument unless both rates are positive and finite.
    static MachineModel make(std::string name, double peak_flops, double stream_bw);

    double ridge_point() const;
};

/// Peak flop rate over memory bandwidth, in flops/byte.
double ridge_point(double peak_flops, double stream_bw);

enum class BoundClass { memory_bound, compute_bound };
std::string_view to_string(BoundClass bound) noexcept;
BoundClass parse_bound_class(std::string_view text);

/// min(peak, oi * bandwidth). oi must be finite and >= 0; a kernel with no
/// flops attains zero.
double attainable_flops(double oi, const MachineModel& machine);
/// Memory-bound iff oi is below the machine's ridge point.
BoundClass classify(double oi, const MachineModel& machine);
/// 100 * kernel_bw / stream_bw. Values slightly above 100 are legitimate.
double pct_of_stream(double kernel_bw, double stream_bw);

/// Processor data for the six reference machines: ivybridge, haswell,
/// interlagos, xeonphi, k20x, k40.
const std::vector<MachineModel>& machine_presets();
MachineModel machine_preset(std::string_view name);

/// Reads `name=`, `peak_gflops=`, `stream_gbs=` lines; `#` starts a comment.
MachineModel parse_machine_config(std::istream& in);
MachineModel load_machine_config(const std::string& path);

/// One decimal place, as used in reports.
std::string format_ridge(double ridge);

// --- STREAM ---------------------------------------------------------------------

/// Size of the largest CPU cache reported by sysfs, or 32 MiB if unknown.
std::size_t last_level_cache_bytes();
/// Default triad length: four times the LLC in the 24 bytes/site triad
/// footprint, capped at 2^25 sites to bound memory use.
std::size_t default_stream_sites();

struct StreamResult {
    double bandwidth = 0.0;  // bytes/s
    TimingStats timing;
    std::size_t n_sites = 0;
    /// Non-empty when n_sites does not exceed four times the LLC.
    std::string warning;
};

/// STREAM-style triad a = b + q c over n_sites single-component sites.
/// bandwidth = 24 n_sites / min_time. The output is checked against b + q c
/// after timing; a mismatch throws.
StreamResult stream_triad_bandwidth(std::size_t n_sites, std::size_t warmup, std::size_t reps,
                                    const LaunchConfig& cfg);

/// Rough double-precision flop rate from cache-resident multiply-add chains.
double measure_peak_flops(const LaunchConfig& cfg);
/// Machine model from measure_peak_flops and a default-sized STREAM triad.
MachineModel measure_machine(const LaunchConfig& cfg);

// --- records --------------------------------------------------------------------

struct BenchRecord {
    std::string kernel;
    std::string layout;
    std::size_t vvl = 1;
    std::string backend;
    std::size_t workers = 1;
    std::size_t reps = 1;
    double min_time_s = 0.0;
    std::uint64_t bytes = 0;
    std::uint64_t flops = 0;
    double bandwidth_gbs = 0.0;
    double oi = 0.0;
    double pct_stream = 0.0;
    BoundClass bound = BoundClass::memory_bound;

    friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// Fills the derived columns from the analytic cost model and the timing.
BenchRecord make_bench_record(const KernelCostModel& cost, std::size_t nsites,
                              const std::string& layout, std::size_t vvl, Backend backend,
                              std::size_t workers, std::size_t reps, double min_time_s,
                              const MachineModel& machine);

/// bandwidth * time == bytes and oi * bytes == flops, up to the rounding of
/// the stored doubles (a few ulps).
bool record_consistent(const BenchRecord& record);

std::string bench_csv_header();
std::string to_csv_row(const BenchRecord& record);
BenchRecord parse_bench_row(std::string_view line, std::size_t line_no);

/// Reads a header line plus rows; an empty stream yields no records.
std::vector<BenchRecord> read_bench_csv(std::istream& in);
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace tdp
