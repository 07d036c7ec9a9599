// Command-line front end: kernel benchmarks, the lattice Boltzmann mini-app
// and roofline reports.
//
// Exit codes: 0 success, 1 correctness or conservation failure, 2 usage error.

#include <CLI11.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tdp/bench.hpp"
#include "tdp/csv.hpp"
#include "tdp/kernels.hpp"

namespace {

using namespace tdp;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Plan {
    std::vector<std::string> kernels;
    std::vector<std::size_t> grid{64, 64};
    std::size_t steps = 100;
    double tau = 0.8;
    std::vector<std::string> layouts;
    std::vector<std::size_t> vvls;
    std::vector<std::string> backends;
    std::vector<std::size_t> threads;
    std::vector<std::string> machines;
    std::string csv_path;
    std::string records_path;
    std::string dump_path;
    std::uint64_t seed = 42;
    bool deterministic = false;
    std::size_t reps = 10;
    std::size_t warmup = 2;
    double amplitude = 1e-3;
    double noise = 1e-3;
};

GridShape grid_of(const Plan& plan) {
    if (plan.grid.size() != 2) throw InvalidArgument("--grid expects X,Y");
    return GridShape(plan.grid);
}

MachineModel resolve_machine(const std::string& source, const LaunchConfig& cfg) {
    if (source.rfind("preset:", 0) == 0) return machine_preset(source.substr(7));
    if (source.rfind("file:", 0) == 0) return load_machine_config(source.substr(5));
    if (source == "measure") {
        const MachineModel m = measure_machine(cfg);
        std::cerr << "measured machine: peak " << m.peak_flops / 1e9 << " Gflop/s, STREAM "
                  << m.stream_bw / 1e9 << " GB/s\n";
        return m;
    }
    throw InvalidArgument("invalid machine source '" + source +
                          "' (expected preset:<name>, file:<path> or measure)");
}

// Output goes to --csv if given, otherwise stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw InvalidArgument("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string describe(const std::string& kernel, const std::string& layout, std::size_t vvl,
                     Backend backend, std::size_t workers) {
    std::ostringstream s;
    s << "kernel=" << kernel << " layout=" << layout << " vvl=" << vvl
      << " backend=" << to_string(backend) << " workers=" << workers;
    return s.str();
}

void check_against_oracle(const std::vector<double>& expected, const std::vector<double>& got,
                          const std::string& where) {
    std::size_t mismatches = 0;
    std::ostringstream report;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(expected[i]) == std::bit_cast<std::uint64_t>(got[i]))
            continue;
        if (mismatches < 5)
            report << "  value " << i << ": expected " << csv::format_double(expected[i])
                   << ", got " << csv::format_double(got[i]) << '\n';
        ++mismatches;
    }
    if (mismatches != 0)
        throw CheckFailure(where + ": " + std::to_string(mismatches) + " of " +
                           std::to_string(expected.size()) +
                           " values differ from the serial/aos/vvl=1 oracle\n" + report.str());
}

int cmd_bench(const Plan& plan) {
    const GridShape shape = grid_of(plan);
    std::vector<SuiteKernel> kernels;
    for (const auto& k : plan.kernels) kernels.push_back(parse_suite_kernel(k));
    std::vector<LayoutScheme> layouts;
    for (const auto& l : plan.layouts) layouts.push_back(LayoutScheme::parse(l));
    std::vector<Backend> backends;
    for (const auto& b : plan.backends) backends.push_back(parse_backend(b));
    for (std::size_t v : plan.vvls)
        if (v == 0) throw InvalidArgument("--vvl values must be >= 1");
    for (std::size_t t : plan.threads)
        if (t == 0) throw InvalidArgument("--threads values must be >= 1");
    if (plan.machines.size() != 1) throw InvalidArgument("bench takes a single --machine");
    if (plan.reps == 0) throw InvalidArgument("--reps must be >= 1");

    const LaunchConfig measure_cfg{Backend::threads, default_workers(), 8, plan.deterministic};
    const MachineModel machine = resolve_machine(plan.machines.front(), measure_cfg);
    Output out(plan.csv_path);
    out.stream() << bench_csv_header() << '\n';

    for (SuiteKernel kernel : kernels) {
        KernelInstance oracle(kernel, shape, LayoutScheme::aos(),
                              LaunchConfig{Backend::serial, 1, 1, true}, plan.seed);
        oracle.run();
        const std::vector<double> expected = oracle.logical_output();

        for (const LayoutScheme& layout : layouts)
            for (std::size_t vvl : plan.vvls)
                for (Backend backend : backends) {
                    const std::vector<std::size_t> workers =
                        backend == Backend::serial ? std::vector<std::size_t>{1} : plan.threads;
                    for (std::size_t nworkers : workers) {
                        const LaunchConfig cfg{backend, nworkers, vvl, plan.deterministic};
                        const std::string where = describe(std::string(to_string(kernel)),
                                                           layout.to_string(), vvl, backend, nworkers);
                        KernelInstance inst(kernel, shape, layout, cfg, plan.seed);
                        inst.run();
                        check_against_oracle(expected, inst.logical_output(), where);

                        inst.reset();
                        const TimingStats t = measure([&] { inst.run(); }, plan.warmup, plan.reps);
                        const BenchRecord record =
                            make_bench_record(cost_model(kernel), shape.nsites(), layout.to_string(),
                                              vvl, backend, nworkers, plan.reps, t.min_s, machine);
                        out.stream() << to_csv_row(record) << '\n';
                    }
                }
    }
    return 0;
}

template <typename T>
const T& single(const std::vector<T>& values, const char* flag) {
    if (values.size() != 1) throw InvalidArgument(std::string("lb takes a single ") + flag);
    return values.front();
}

int cmd_lb(const Plan& plan) {
    LbParams params;
    params.shape = grid_of(plan);
    params.tau = plan.tau;
    params.steps = plan.steps;
    params.shear_amplitude = plan.amplitude;
    params.density_noise = plan.noise;
    params.seed = plan.seed;
    const LayoutScheme layout = LayoutScheme::parse(single(plan.layouts, "--layout"));
    const LaunchConfig cfg{parse_backend(single(plan.backends, "--backend")),
                           single(plan.threads, "--threads"), single(plan.vvls, "--vvl"),
                           plan.deterministic};
    cfg.validate();

    const LbRun run = run_lb_miniapp(params, layout, cfg);

    Output out(plan.csv_path);
    out.stream() << lb_diagnostics_header() << '\n';
    for (const auto& d : run.diagnostics) out.stream() << to_csv_row(d) << '\n';
    out.stream().flush();

    if (!plan.dump_path.empty()) {
        std::ofstream dump(plan.dump_path);
        if (!dump) throw InvalidArgument("cannot write '" + plan.dump_path + "'");
        dump << "x,y";
        for (std::size_t i = 0; i < d2q9::kQ; ++i) dump << ",f" << i;
        dump << '\n';
        const std::vector<double> f = run.state.f.logical_host_values();
        for (std::size_t s = 0; s < params.shape.nsites(); ++s) {
            const auto xy = params.shape.coords_of(s);
            dump << xy[0] << ',' << xy[1];
            for (std::size_t i = 0; i < d2q9::kQ; ++i)
                dump << ',' << csv::format_double(f[s * d2q9::kQ + i]);
            dump << '\n';
        }
    }

    const double m0 = run.diagnostics.front().total_mass;
    double drift = 0.0;
    for (const auto& d : run.diagnostics) drift = std::max(drift, std::abs(d.total_mass - m0) / m0);
    if (!(drift <= 1e-10))
        throw CheckFailure("relative mass drift " + csv::format_double(drift) + " exceeds 1e-10");
    return 0;
}

int cmd_roofline(const Plan& plan) {
    std::vector<BenchRecord> records;
    if (!plan.records_path.empty()) {
        std::ifstream in(plan.records_path);
        if (!in) throw InvalidArgument("cannot open records '" + plan.records_path + "'");
        records = read_bench_csv(in);
    }
    std::vector<MachineModel> machines;
    if (plan.machines.empty()) {
        machines = machine_presets();
    } else {
        const LaunchConfig cfg{Backend::threads, default_workers(), 8, plan.deterministic};
        for (const auto& m : plan.machines) machines.push_back(resolve_machine(m, cfg));
    }

    Output out(plan.csv_path);
    std::ostream& os = out.stream();
    for (const MachineModel& m : machines) {
        os << "# machine=" << m.name << " peak_gflops=" << csv::format_double(m.peak_flops / 1e9)
           << " stream_gbs=" << csv::format_double(m.stream_bw / 1e9)
           << " ridge=" << format_ridge(m.ridge_point()) << '\n';
        os << "kernel,layout,vvl,backend,workers,oi,attainable_gflops,bound_class,pct_stream\n";
        for (const BenchRecord& r : records) {
            os << r.kernel << ',' << r.layout << ',' << r.vvl << ',' << r.backend << ','
               << r.workers << ',' << csv::format_double(r.oi) << ','
               << csv::format_double(attainable_flops(r.oi, m) / 1e9) << ','
               << to_string(classify(r.oi, m)) << ','
               << csv::format_double(pct_of_stream(r.bandwidth_gbs * 1e9, m.stream_bw)) << '\n';
        }
    }
    return 0;
}

void add_sweep_options(CLI::App& cmd, Plan& plan) {
    cmd.add_option("--kernel", plan.kernels, "Kernels: scale, triad, collision, propagation")
        ->delimiter(',');
    cmd.add_option("--grid", plan.grid, "Grid extents X,Y")->delimiter(',')->expected(2);
    cmd.add_option("--layout", plan.layouts, "Layouts: aos, soa, aosoa:<sal>")->delimiter(',');
    cmd.add_option("--vvl", plan.vvls, "Virtual vector lengths")->delimiter(',');
    cmd.add_option("--backend", plan.backends, "Backends: serial, threads")->delimiter(',');
    cmd.add_option("--threads", plan.threads, "Worker counts for the threads backend")
        ->delimiter(',');
    cmd.add_option("--machine", plan.machines,
                   "Machine model: preset:<name>, file:<path> or measure");
    cmd.add_option("--csv", plan.csv_path, "Write CSV here instead of stdout");
    cmd.add_option("--seed", plan.seed, "Seed for input data");
    cmd.add_flag("--deterministic", plan.deterministic,
                 "Static chunk assignment and fixed reduction order");
    cmd.add_option("--reps", plan.reps, "Timed repetitions per point");
    cmd.add_option("--warmup", plan.warmup, "Untimed repetitions per point");
}

void fill_defaults(Plan& plan, bool sweep) {
    if (plan.kernels.empty()) {
        if (sweep)
            for (SuiteKernel k : kAllSuiteKernels) plan.kernels.emplace_back(to_string(k));
        else
            plan.kernels = {"triad"};
    }
    if (plan.layouts.empty())
        plan.layouts = sweep ? std::vector<std::string>{"aos", "soa", "aosoa:2", "aosoa:4", "aosoa:8"}
                             : std::vector<std::string>{"aos"};
    if (plan.vvls.empty()) plan.vvls = sweep ? std::vector<std::size_t>{1, 2, 4, 8} : std::vector<std::size_t>{1};
    if (plan.backends.empty())
        plan.backends = sweep ? std::vector<std::string>{"serial", "threads"}
                              : std::vector<std::string>{"serial"};
    if (plan.threads.empty()) plan.threads = {default_workers()};
    if (plan.machines.empty()) plan.machines = {"measure"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-parallel layout and vector-length benchmarks"};
    app.require_subcommand(1);
    Plan plan;

    CLI::App* bench = app.add_subcommand("bench", "Benchmark kernels over a configuration product");
    add_sweep_options(*bench, plan);
    CLI::App* sweep =
        app.add_subcommand("sweep", "bench with every kernel, layout, vvl and backend by default");
    add_sweep_options(*sweep, plan);

    CLI::App* lb = app.add_subcommand("lb", "Run the D2Q9 lattice Boltzmann mini-app");
    lb->add_option("--grid", plan.grid, "Grid extents X,Y")->delimiter(',')->expected(2);
    lb->add_option("--steps", plan.steps, "Timesteps");
    lb->add_option("--tau", plan.tau, "BGK relaxation time (> 0.5)");
    lb->add_option("--layout", plan.layouts, "Layout")->delimiter(',');
    lb->add_option("--vvl", plan.vvls, "Virtual vector length")->delimiter(',');
    lb->add_option("--backend", plan.backends, "serial or threads")->delimiter(',');
    lb->add_option("--threads", plan.threads, "Worker count")->delimiter(',');
    lb->add_option("--csv", plan.csv_path, "Write diagnostics here instead of stdout");
    lb->add_option("--dump", plan.dump_path, "Write the final distributions here");
    lb->add_option("--seed", plan.seed, "Seed for the density perturbation");
    lb->add_option("--amplitude", plan.amplitude, "Shear-wave velocity amplitude");
    lb->add_option("--noise", plan.noise, "Density perturbation amplitude");
    lb->add_flag("--deterministic", plan.deterministic,
                 "Static chunk assignment and fixed reduction order");

    CLI::App* roofline = app.add_subcommand("roofline", "Roofline report for benchmark records");
    roofline->add_option("--records", plan.records_path, "Benchmark CSV from bench or sweep");
    roofline->add_option("--machine", plan.machines, "Machine models (default: all presets)")
        ->delimiter(',');
    roofline->add_option("--csv", plan.csv_path, "Write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (bench->parsed() || sweep->parsed()) {
            fill_defaults(plan, sweep->parsed());
            return cmd_bench(plan);
        }
        if (lb->parsed()) {
            if (plan.layouts.empty()) plan.layouts = {"aos"};
            if (plan.vvls.empty()) plan.vvls = {1};
            if (plan.backends.empty()) plan.backends = {"serial"};
            if (plan.threads.empty()) plan.threads = {default_workers()};
            return cmd_lb(plan);
        }
        return cmd_roofline(plan);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const csv::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
