#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "tdp/bench.hpp"
#include "tdp/csv.hpp"

using namespace tdp;

TEST_CASE("reference machine ridge points") {
    CHECK(format_ridge(machine_preset("ivybridge").ridge_point()) == "5.2");
    CHECK(format_ridge(machine_preset("xeonphi").ridge_point()) == "6.4");
    CHECK(format_ridge(machine_preset("k40").ridge_point()) == "7.4");
    CHECK(machine_presets().size() == 6);
    for (const auto& m : machine_presets()) {
        CHECK(m.ridge_point() == m.peak_flops / m.stream_bw);
        CHECK(m.ridge_point() > 1.0);
    }
    CHECK_THROWS_AS(machine_preset("cray1"), InvalidArgument);
}

TEST_CASE("attainable performance and classification") {
    const auto k40 = machine_preset("k40");
    CHECK(attainable_flops(0.0625, k40) / 1e9 == doctest::Approx(12.0).epsilon(0.01));
    const auto ivy = machine_preset("ivybridge");
    CHECK(attainable_flops(100, ivy) == 259e9);
    CHECK(attainable_flops(0, ivy) == 0.0);
    CHECK(classify(0.0625, ivy) == BoundClass::memory_bound);
    CHECK(classify(100, ivy) == BoundClass::compute_bound);
    CHECK(classify(ivy.ridge_point(), ivy) == BoundClass::compute_bound);
    CHECK_THROWS_AS(attainable_flops(-1, ivy), InvalidArgument);
    CHECK_THROWS_AS(attainable_flops(std::numeric_limits<double>::infinity(), ivy), InvalidArgument);

    // Property: attainable is monotone in oi and never exceeds either roof.
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double a = std::ldexp(static_cast<double>(rng() % 10000), -10);
        const double b = a + std::ldexp(static_cast<double>(rng() % 10000), -10);
        CHECK(attainable_flops(a, k40) <= attainable_flops(b, k40));
        CHECK(attainable_flops(b, k40) <= k40.peak_flops);
        CHECK(attainable_flops(b, k40) <= b * k40.stream_bw);
    }
}

TEST_CASE("percent of STREAM") {
    CHECK(pct_of_stream(40e9, 40e9) == 100.0);
    CHECK(pct_of_stream(20e9, 40e9) == 50.0);
    CHECK_THROWS_AS(pct_of_stream(1.0, 0.0), InvalidArgument);
}

TEST_CASE("machine models") {
    CHECK_THROWS_AS(MachineModel::make("x", 0, 1), InvalidArgument);
    CHECK_THROWS_AS(MachineModel::make("x", 1, -1), InvalidArgument);
    CHECK_THROWS_AS(ridge_point(1, 0), InvalidArgument);

    std::istringstream in("# test box\nname=box\npeak_gflops=100\n\nstream_gbs = 25\n");
    const auto m = parse_machine_config(in);
    CHECK(m.name == "box");
    CHECK(m.peak_flops == 100e9);
    CHECK(m.stream_bw == 25e9);
    CHECK(m.ridge_point() == 4.0);

    std::istringstream missing("name=box\npeak_gflops=100\n");
    CHECK_THROWS_AS(parse_machine_config(missing), InvalidArgument);
    std::istringstream bad("name=box\npeak_gflops=fast\nstream_gbs=1\n");
    CHECK_THROWS(parse_machine_config(bad));
    CHECK_THROWS_AS(load_machine_config("/nonexistent/machine.cfg"), InvalidArgument);
}

TEST_CASE("measure") {
    using namespace std::chrono;
    int calls = 0;
    const auto t = measure([&] {
        ++calls;
        std::this_thread::sleep_for(milliseconds(10));
    }, 1, 3);
    CHECK(calls == 4);
    CHECK(t.reps == 3);
    CHECK(t.min_s >= 0.010);
    CHECK(t.min_s <= 0.013);
    CHECK(t.mean_s >= t.min_s);
    CHECK(t.stddev_s >= 0.0);

    calls = 0;
    const auto one = measure([&] { ++calls; }, 0, 1);
    CHECK(calls == 1);
    CHECK(one.reps == 1);
    CHECK(one.min_s > 0.0);
    CHECK(one.stddev_s == 0.0);
    CHECK_THROWS_AS(measure([] {}, 0, 0), InvalidArgument);
}

TEST_CASE("bench record derived columns") {
    const auto k40 = machine_preset("k40");
    const auto r = make_bench_record(kTriadCost, 1000, "soa", 4, Backend::threads, 2, 5, 1e-6, k40);
    CHECK(r.kernel == "triad");
    CHECK(r.bytes == 24000);
    CHECK(r.flops == 2000);
    CHECK(r.bandwidth_gbs == doctest::Approx(24.0));
    CHECK(r.pct_stream == doctest::Approx(100.0 * 24e9 / 192.1e9));
    CHECK(r.bound == BoundClass::memory_bound);
    CHECK(record_consistent(r));

    const auto s = make_bench_record(kScaleCost, 10, "aos", 1, Backend::serial, 8, 1, 1e-3, k40);
    CHECK(s.workers == 1);

    auto broken = r;
    broken.bytes += 1000;
    CHECK_FALSE(record_consistent(broken));
}

TEST_CASE("CSV round trip is the identity") {
    std::mt19937_64 rng(77);
    std::vector<BenchRecord> records;
    const char* layouts[] = {"aos", "soa", "aosoa:2", "aosoa:8"};
    const auto& machines = machine_presets();
    for (int i = 0; i < 200; ++i) {
        const auto kernel = kAllSuiteKernels[rng() % 4];
        const auto& m = machines[rng() % machines.size()];
        const double t = std::ldexp(1.0 + static_cast<double>(rng() % 1000000) / 7.0, -30);
        records.push_back(make_bench_record(cost_model(kernel), 1 + rng() % 100000,
                                            layouts[rng() % 4], 1u << (rng() % 4),
                                            rng() % 2 ? Backend::serial : Backend::threads,
                                            1 + rng() % 8, 1 + rng() % 10, t, m));
    }
    std::stringstream io;
    write_bench_csv(io, records);
    CHECK(io.str().rfind(bench_csv_header() + "\n", 0) == 0);
    const auto back = read_bench_csv(io);
    CHECK(back == records);
    for (const auto& r : back) CHECK(record_consistent(r));

    std::istringstream empty("");
    CHECK(read_bench_csv(empty).empty());
}

TEST_CASE("malformed CSV is reported with its line number") {
    const auto k40 = machine_preset("k40");
    const auto row = to_csv_row(make_bench_record(kScaleCost, 10, "aos", 1, Backend::serial, 1, 1, 1e-3, k40));
    auto expect_line = [](const std::string& text, const std::string& where) {
        std::istringstream in(text);
        try {
            read_bench_csv(in);
            FAIL("expected a parse error");
        } catch (const csv::ParseError& e) {
            CHECK(std::string(e.what()).find(where) != std::string::npos);
        }
    };
    expect_line("kernel,layout\n", "line 1");
    expect_line(bench_csv_header() + "\n" + row + "\n" + "scale,aos,1\n", "line 3");
    expect_line(bench_csv_header() + "\n" + "scale,aos,1,serial,1,1,x,48,3,1,0.0625,1,memory-bound\n",
                "line 2");
    expect_line(bench_csv_header() + "\n" + "scale,aosoa:,1,serial,1,1,1,48,3,1,0.0625,1,memory-bound\n",
                "line 2");
}

TEST_CASE("STREAM triad") {
    const auto r = stream_triad_bandwidth(1 << 16, 1, 3, LaunchConfig{});
    CHECK(r.n_sites == 1 << 16);
    CHECK(r.bandwidth > 0);
    CHECK(r.bandwidth == doctest::Approx(24.0 * (1 << 16) / r.timing.min_s));
    CHECK_FALSE(r.warning.empty());  // far smaller than the cache
    CHECK(default_stream_sites() >= 1);
    CHECK(last_level_cache_bytes() > 0);
}
