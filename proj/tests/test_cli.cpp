#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tdp/bench.hpp"
#include "tdp/csv.hpp"
#include "tdp/kernels.hpp"

using namespace tdp;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(TDP_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("tdp_cli_test_" + name);
}

}  // namespace

TEST_CASE("bench runs the cartesian product of its axes") {
    const auto r = run("bench --kernel scale --layout aos,soa,aosoa:4 --vvl 1,4 "
                       "--backend serial,threads --threads 2 --grid 16,16 --reps 2 --machine preset:k40");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto records = read_bench_csv(in);
    CHECK(records.size() == 12);
    for (const auto& rec : records) {
        CHECK(rec.kernel == "scale");
        CHECK(record_consistent(rec));
    }
}

TEST_CASE("bench against a preset reports percent of its bandwidth") {
    const auto r = run("bench --kernel triad --grid 16,16 --reps 2 --machine preset:k40");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto records = read_bench_csv(in);
    REQUIRE(records.size() == 1);
    CHECK(records[0].pct_stream == doctest::Approx(100.0 * records[0].bandwidth_gbs / 192.1));
}

TEST_CASE("sweep covers every kernel by default") {
    const auto r = run("sweep --layout soa --vvl 4 --backend serial --grid 8,8 --reps 1 "
                       "--machine preset:haswell");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto records = read_bench_csv(in);
    REQUIRE(records.size() == 4);
    CHECK(records[2].kernel == "collision");
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run("bench --layout aosoa: --machine preset:k40").code == 2);
    CHECK(run("bench --backend gpu --machine preset:k40").code == 2);
    CHECK(run("bench --kernel copy --machine preset:k40").code == 2);
    CHECK(run("bench --machine preset:cray1").code == 2);
    CHECK(run("lb --grid 32").code == 2);
    CHECK(run("lb --grid 2,8").code == 2);
    CHECK(run("lb --tau 0.4").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("lb writes one diagnostics row per step") {
    const auto r = run("lb --grid 32,32 --steps 100 --tau 0.8");
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 102);
    CHECK(rows[0] == lb_diagnostics_header());
    const auto first = parse_lb_diagnostics_row(rows[1], 2);
    const auto last = parse_lb_diagnostics_row(rows[101], 102);
    CHECK(first.step == 0);
    CHECK(last.step == 100);
    CHECK(std::abs(last.total_mass - first.total_mass) / first.total_mass <= 1e-12);

    const auto zero = run("lb --grid 8,8 --steps 0");
    REQUIRE(zero.code == 0);
    CHECK(lines(zero.out).size() == 2);
}

TEST_CASE("lb output files are reproducible") {
    const auto a = scratch("a.csv"), b = scratch("b.csv");
    const auto da = scratch("a.dump"), db = scratch("b.dump");
    const std::string common =
        "lb --grid 16,12 --steps 30 --seed 7 --noise 0.01 --deterministic --backend threads "
        "--threads 3 --layout aosoa:4 --vvl 4";
    REQUIRE(run(common + " --csv " + a.string() + " --dump " + da.string()).code == 0);
    REQUIRE(run(common + " --csv " + b.string() + " --dump " + db.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(da) == slurp(db));
    CHECK(lines(slurp(da)).size() == 16 * 12 + 1);

    // A different seed changes the initial density.
    const auto c = scratch("c.csv");
    REQUIRE(run("lb --grid 16,12 --steps 30 --seed 8 --noise 0.01 --csv " + c.string()).code == 0);
    CHECK(slurp(a) != slurp(c));
    for (const auto& p : {a, b, c, da, db}) std::filesystem::remove(p);
}

TEST_CASE("roofline report") {
    const auto records = scratch("records.csv");
    {
        std::ofstream out(records);
        const auto ivy = machine_preset("ivybridge");
        write_bench_csv(out, {make_bench_record(kTriadCost, 1000, "soa", 4, Backend::serial, 1, 3, 1e-6, ivy),
                              make_bench_record(KernelCostModel{"dense", 1000, 8}, 10, "aos", 1,
                                                Backend::serial, 1, 3, 1e-6, ivy)});
    }
    const auto r = run("roofline --records " + records.string());
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    std::vector<std::string> headers;
    for (const auto& row : rows)
        if (row.rfind("# machine=", 0) == 0) headers.push_back(row);
    REQUIRE(headers.size() == 6);
    CHECK(headers[0].find("machine=ivybridge") != std::string::npos);
    CHECK(headers[0].find("ridge=5.2") != std::string::npos);
    CHECK(headers[3].find("ridge=6.4") != std::string::npos);
    CHECK(headers[5].find("ridge=7.4") != std::string::npos);
    CHECK(rows[1] == "kernel,layout,vvl,backend,workers,oi,attainable_gflops,bound_class,pct_stream");
    CHECK(rows[2].find(",memory-bound,") != std::string::npos);
    CHECK(rows[3].find(",compute-bound,") != std::string::npos);

    // Stable output for diffing.
    CHECK(run("roofline --records " + records.string()).out == r.out);

    const auto empty = scratch("empty.csv");
    std::ofstream(empty).close();
    const auto e = run("roofline --records " + empty.string() + " --machine preset:k40");
    CHECK(e.code == 0);
    CHECK(lines(e.out).size() == 2);
    CHECK(lines(e.out)[0].find("ridge=7.4") != std::string::npos);

    {
        std::ofstream bad(records, std::ios::app);
        bad << "triad,soa,4\n";
    }
    CHECK(run("roofline --records " + records.string()).code == 2);
    std::filesystem::remove(records);
    std::filesystem::remove(empty);
}
