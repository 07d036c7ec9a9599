#include "tdp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tdp/csv.hpp"
#include "tdp/random.hpp"

namespace tdp {

TimingStats measure(const std::function<void()>& run, std::size_t warmup, std::size_t reps) {
    if (reps == 0) throw InvalidArgument("measure: reps must be >= 1");
    for (std::size_t i = 0; i < warmup; ++i) run();

    using clock = std::chrono::steady_clock;
    std::vector<double> times;
    times.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const auto t0 = clock::now();
        run();
        const auto t1 = clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }

    TimingStats stats;
    stats.reps = reps;
    stats.min_s = *std::min_element(times.begin(), times.end());
    double sum = 0.0;
    for (double t : times) sum += t;
    stats.mean_s = sum / static_cast<double>(reps);
    double sq = 0.0;
    for (double t : times) sq += (t - stats.mean_s) * (t - stats.mean_s);
    stats.stddev_s = reps > 1 ? std::sqrt(sq / static_cast<double>(reps - 1)) : 0.0;
    // A steady clock can report 0 for very short runs; clamp to one tick.
    if (stats.min_s <= 0.0)
        stats.min_s = std::chrono::duration<double>(clock::duration(1)).count();
    return stats;
}

// --- roofline -------------------------------------------------------------------

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument(std::string(what) + " must be positive and finite");
}

}  // namespace

MachineModel MachineModel::make(std::string name, double peak_flops, double stream_bw) {
    require_positive(peak_flops, "peak flop rate");
    require_positive(stream_bw, "stream bandwidth");
    return {std::move(name), peak_flops, stream_bw};
}

double MachineModel::ridge_point() const { return tdp::ridge_point(peak_flops, stream_bw); }

double ridge_point(double peak_flops, double stream_bw) {
    require_positive(peak_flops, "ridge_point: peak flop rate");
    require_positive(stream_bw, "ridge_point: stream bandwidth");
    return peak_flops / stream_bw;
}

std::string_view to_string(BoundClass bound) noexcept {
    return bound == BoundClass::memory_bound ? "memory-bound" : "compute-bound";
}

BoundClass parse_bound_class(std::string_view text) {
    if (text == "memory-bound") return BoundClass::memory_bound;
    if (text == "compute-bound") return BoundClass::compute_bound;
    throw InvalidArgument("invalid bound class '" + std::string(text) + "'");
}

double attainable_flops(double oi, const MachineModel& machine) {
    if (!(oi >= 0.0) || !std::isfinite(oi))
        throw InvalidArgument("attainable_flops: oi must be finite and >= 0");
    return std::min(machine.peak_flops, oi * machine.stream_bw);
}

BoundClass classify(double oi, const MachineModel& machine) {
    if (!(oi >= 0.0) || !std::isfinite(oi))
        throw InvalidArgument("classify: oi must be finite and >= 0");
    return oi < machine.ridge_point() ? BoundClass::memory_bound : BoundClass::compute_bound;
}

double pct_of_stream(double kernel_bw, double stream_bw) {
    require_positive(kernel_bw, "pct_of_stream: kernel bandwidth");
    require_positive(stream_bw, "pct_of_stream: stream bandwidth");
    return 100.0 * kernel_bw / stream_bw;
}

const std::vector<MachineModel>& machine_presets() {
    static const std::vector<MachineModel> presets{
        {"ivybridge", 259e9, 49.8e9},   {"haswell", 154e9, 40.9e9},
        {"interlagos", 141e9, 32.4e9},  {"xeonphi", 1.01e12, 158.4e9},
        {"k20x", 1.31e12, 181.3e9},     {"k40", 1.43e12, 192.1e9},
    };
    return presets;
}

MachineModel machine_preset(std::string_view name) {
    for (const auto& m : machine_presets())
        if (m.name == name) return m;
    throw InvalidArgument("unknown machine preset '" + std::string(name) +
                          "' (expected ivybridge, haswell, interlagos, xeonphi, k20x or k40)");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

MachineModel parse_machine_config(std::istream& in) {
    std::string name;
    double peak_gflops = 0.0, stream_gbs = 0.0;
    bool have_name = false, have_peak = false, have_stream = false;
    std::string raw;
    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
        std::string_view line = csv::chomp(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw csv::ParseError(line_no, "expected key=value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key == "name") {
            name = std::string(value);
            have_name = true;
        } else if (key == "peak_gflops") {
            peak_gflops = csv::parse_double(value, line_no, key);
            have_peak = true;
        } else if (key == "stream_gbs") {
            stream_gbs = csv::parse_double(value, line_no, key);
            have_stream = true;
        } else {
            throw csv::ParseError(line_no, "unknown key '" + std::string(key) + "'");
        }
    }
    if (!have_name || !have_peak || !have_stream)
        throw InvalidArgument("machine config needs name, peak_gflops and stream_gbs");
    return MachineModel::make(name, peak_gflops * 1e9, stream_gbs * 1e9);
}

MachineModel load_machine_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open machine config '" + path + "'");
    return parse_machine_config(in);
}

std::string format_ridge(double ridge) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", ridge);
    return buf;
}

// --- STREAM ---------------------------------------------------------------------

std::size_t last_level_cache_bytes() {
    namespace fs = std::filesystem;
    std::size_t best_level = 0, best_size = 0;
    std::error_code ec;
    const fs::path root = "/sys/devices/system/cpu/cpu0/cache";
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        std::ifstream level_in(entry.path() / "level");
        std::ifstream size_in(entry.path() / "size");
        std::size_t level = 0;
        std::string size_text;
        if (!(level_in >> level) || !(size_in >> size_text) || size_text.empty()) continue;
        std::size_t mult = 1;
        switch (size_text.back()) {
            case 'K': mult = std::size_t{1} << 10; size_text.pop_back(); break;
            case 'M': mult = std::size_t{1} << 20; size_text.pop_back(); break;
            case 'G': mult = std::size_t{1} << 30; size_text.pop_back(); break;
            default: break;
        }
        std::size_t size = 0;
        try {
            size = std::stoull(size_text) * mult;
        } catch (const std::exception&) {
            continue;
        }
        if (level > best_level || (level == best_level && size > best_size)) {
            best_level = level;
            best_size = size;
        }
    }
    return best_size > 0 ? best_size : std::size_t{32} << 20;
}

std::size_t default_stream_sites() {
    constexpr std::size_t kCap = std::size_t{1} << 25;
    return std::min(4 * last_level_cache_bytes() / 24, kCap);
}

StreamResult stream_triad_bandwidth(std::size_t n_sites, std::size_t warmup, std::size_t reps,
                                    const LaunchConfig& cfg) {
    if (n_sites == 0) throw InvalidArgument("stream_triad_bandwidth: n_sites must be >= 1");
    const auto layout = make_layout(n_sites, 1, LayoutScheme::soa(), cfg.vvl);
    FieldPair a(layout), b(layout), c(layout);
    const std::vector<double> bv = uniform_doubles(1, n_sites, -1.0, 1.0);
    const std::vector<double> cv = uniform_doubles(2, n_sites, -1.0, 1.0);
    b.load_logical(bv);
    c.load_logical(cv);
    a.copy_to_target();
    b.copy_to_target();
    c.copy_to_target();
    ConstantTable constants;
    constexpr double q = 3.0;
    constants.set("q", q);

    StreamResult result;
    result.n_sites = n_sites;
    result.timing = measure([&] { kernel_triad(a, b, c, constants, cfg); }, warmup, reps);
    result.bandwidth = 24.0 * static_cast<double>(n_sites) / result.timing.min_s;

    a.copy_from_target();
    for (std::size_t s = 0; s < n_sites; ++s)
        if (a.host_at(0, s) != bv[s] + q * cv[s])
            throw std::runtime_error("stream triad produced a wrong result at site " +
                                     std::to_string(s));

    const std::size_t threshold = 4 * last_level_cache_bytes();
    if (24 * n_sites <= threshold)
        result.warning = "triad working set of " + std::to_string(24 * n_sites) +
                         " bytes does not exceed 4x the last-level cache (" +
                         std::to_string(threshold / 4) + " bytes); bandwidth may be cache-inflated";
    return result;
}

double measure_peak_flops(const LaunchConfig& cfg) {
    // Cache-resident multiply-add chains; 8 independent accumulators per lane.
    constexpr std::size_t kSites = 8192, kIters = 512, kChains = 8;
    LaunchConfig c = cfg;
    c.vvl = 8;
    const auto layout = make_layout(kSites, 1, LayoutScheme::soa(), c.vvl);
    FieldPair x(layout);
    x.load_logical(uniform_doubles(3, kSites, 0.5, 1.0));
    x.copy_to_target();
    FieldView view = x.target_view();
    const auto run = [&] {
        launch(c, layout, [&](const SiteChunk& chunk) {
            for_each_lane(chunk, [&](std::size_t lane) {
                double acc[kChains];
                for (std::size_t k = 0; k < kChains; ++k) acc[k] = view(0, chunk.site(lane)) + k;
                for (std::size_t it = 0; it < kIters; ++it)
                    for (std::size_t k = 0; k < kChains; ++k) acc[k] = acc[k] * 0.999 + 0.001;
                double sum = 0.0;
                for (std::size_t k = 0; k < kChains; ++k) sum += acc[k];
                view(0, chunk.site(lane)) = sum;
            });
        });
    };
    const TimingStats t = measure(run, 1, 5);
    return 2.0 * kSites * kIters * kChains / t.min_s;
}

MachineModel measure_machine(const LaunchConfig& cfg) {
    const StreamResult stream = stream_triad_bandwidth(default_stream_sites(), 1, 5, cfg);
    return MachineModel::make("measured", measure_peak_flops(cfg), stream.bandwidth);
}

// --- records --------------------------------------------------------------------

BenchRecord make_bench_record(const KernelCostModel& cost, std::size_t nsites,
                              const std::string& layout, std::size_t vvl, Backend backend,
                              std::size_t workers, std::size_t reps, double min_time_s,
                              const MachineModel& machine) {
    require_positive(min_time_s, "make_bench_record: min_time");
    BenchRecord r;
    r.kernel = std::string(cost.name);
    r.layout = layout;
    r.vvl = vvl;
    r.backend = std::string(to_string(backend));
    r.workers = backend == Backend::serial ? 1 : workers;
    r.reps = reps;
    r.min_time_s = min_time_s;
    r.bytes = cost.bytes_per_site * nsites;
    r.flops = cost.flops_per_site * nsites;
    const double bw = static_cast<double>(r.bytes) / min_time_s;
    r.bandwidth_gbs = bw / 1e9;
    r.oi = cost.oi();
    r.pct_stream = pct_of_stream(bw, machine.stream_bw);
    r.bound = classify(r.oi, machine);
    return r;
}

bool record_consistent(const BenchRecord& r) {
    constexpr double tol = 8 * std::numeric_limits<double>::epsilon();
    const double bytes = static_cast<double>(r.bytes);
    const double flops = static_cast<double>(r.flops);
    const bool bw_ok = std::abs(r.bandwidth_gbs * 1e9 * r.min_time_s - bytes) <= tol * bytes;
    const bool oi_ok = std::abs(r.oi * bytes - flops) <= tol * std::max(flops, 1.0);
    return bw_ok && oi_ok;
}

std::string bench_csv_header() {
    return "kernel,layout,vvl,backend,workers,reps,min_time_s,bytes,flops,bandwidth_gbs,oi,"
           "pct_stream,bound_class";
}

std::string to_csv_row(const BenchRecord& r) {
    std::string row;
    row += r.kernel + ',' + r.layout + ',' + std::to_string(r.vvl) + ',' + r.backend + ',';
    row += std::to_string(r.workers) + ',' + std::to_string(r.reps) + ',';
    row += csv::format_double(r.min_time_s) + ',' + std::to_string(r.bytes) + ',' +
           std::to_string(r.flops) + ',';
    row += csv::format_double(r.bandwidth_gbs) + ',' + csv::format_double(r.oi) + ',' +
           csv::format_double(r.pct_stream) + ',' + std::string(to_string(r.bound));
    return row;
}

BenchRecord parse_bench_row(std::string_view line, std::size_t line_no) {
    const auto f = csv::split(line);
    if (f.size() != 13)
        throw csv::ParseError(line_no, "expected 13 fields, got " + std::to_string(f.size()));
    BenchRecord r;
    r.kernel = std::string(f[0]);
    r.layout = std::string(f[1]);
    try {
        LayoutScheme::parse(r.layout);
        parse_backend(f[3]);
        r.bound = parse_bound_class(f[12]);
    } catch (const InvalidArgument& e) {
        throw csv::ParseError(line_no, e.what());
    }
    r.vvl = csv::parse_uint(f[2], line_no, "vvl");
    r.backend = std::string(f[3]);
    r.workers = csv::parse_uint(f[4], line_no, "workers");
    r.reps = csv::parse_uint(f[5], line_no, "reps");
    r.min_time_s = csv::parse_double(f[6], line_no, "min_time_s");
    r.bytes = csv::parse_uint(f[7], line_no, "bytes");
    r.flops = csv::parse_uint(f[8], line_no, "flops");
    r.bandwidth_gbs = csv::parse_double(f[9], line_no, "bandwidth_gbs");
    r.oi = csv::parse_double(f[10], line_no, "oi");
    r.pct_stream = csv::parse_double(f[11], line_no, "pct_stream");
    return r;
}

std::vector<BenchRecord> read_bench_csv(std::istream& in) {
    std::vector<BenchRecord> records;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = csv::chomp(raw);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != bench_csv_header())
                throw csv::ParseError(line_no, "unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        records.push_back(parse_bench_row(line, line_no));
    }
    return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << bench_csv_header() << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
}

}  // namespace tdp
