#include "tdp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "tdp/csv.hpp"
#include "tdp/random.hpp"
#include "tdp/reduce.hpp"

namespace tdp {

namespace {

constexpr std::size_t kNoSite = static_cast<std::size_t>(-1);

void require_components(const FieldPair& field, std::size_t n, const char* who) {
    if (field.layout().ncomponents() != n)
        throw InvalidArgument(std::string(who) + ": expected " + std::to_string(n) +
                              " components, got " +
                              std::to_string(field.layout().ncomponents()));
}

// w * rho * (base + cu * (3 + 4.5 cu)), base = 1 - 1.5 |u|^2.
inline double equilibrium_term(double w, double rho, double cu, double base) noexcept {
    return w * rho * (base + cu * (3.0 + 4.5 * cu));
}

}  // namespace

void kernel_scale(FieldPair& field, const ConstantTable& constants, const LaunchConfig& cfg) {
    require_components(field, 3, "kernel_scale");
    const double a = constants.get("a");
    FieldView f = field.target_view();
    launch(cfg, field.layout(), constants, [=](const SiteChunk& chunk, const ConstantTable&) {
        for (std::size_t comp = 0; comp < 3; ++comp)
            for_each_lane(chunk, [&](std::size_t lane) {
                const std::size_t s = chunk.site(lane);
                f(comp, s) = a * f(comp, s);
            });
    });
}

void kernel_triad(FieldPair& a, const FieldPair& b, const FieldPair& c,
                  const ConstantTable& constants, const LaunchConfig& cfg) {
    require_components(a, 1, "kernel_triad");
    require_components(b, 1, "kernel_triad");
    require_components(c, 1, "kernel_triad");
    if (!(a.layout() == b.layout()) || !(a.layout() == c.layout()))
        throw InvalidArgument("kernel_triad: fields must share one layout");
    const double q = constants.get("q");
    FieldView out = a.target_view();
    ConstFieldView bv = b.target_cview();
    ConstFieldView cv = c.target_cview();
    launch(cfg, a.layout(), constants, [=](const SiteChunk& chunk, const ConstantTable&) {
        for_each_lane(chunk, [&](std::size_t lane) {
            const std::size_t s = chunk.site(lane);
            out(0, s) = bv(0, s) + q * cv(0, s);
        });
    });
}

namespace d2q9 {

std::array<double, kQ> equilibrium(double rho, double ux, double uy) noexcept {
    const double base = 1.0 - 1.5 * (ux * ux + uy * uy);
    std::array<double, kQ> feq{};
    for (std::size_t i = 0; i < kQ; ++i) {
        const double cu = cx[i] * ux + cy[i] * uy;
        feq[i] = equilibrium_term(w[i], rho, cu, base);
    }
    return feq;
}

}  // namespace d2q9

D2Q9State::D2Q9State(GridShape shape_, double tau_, const LayoutScheme& scheme, std::size_t vvl)
    : shape(std::move(shape_)), tau(tau_),
      f(make_layout(shape.nsites(), d2q9::kQ, scheme, vvl)),
      f_next(make_layout(shape.nsites(), d2q9::kQ, scheme, vvl)) {
    if (shape.rank() != 2) throw InvalidArgument("D2Q9State: grid must be two-dimensional");
    if (!(tau > 0.5)) throw InvalidArgument("D2Q9State: tau must be > 0.5");
}

void kernel_lb_collision(D2Q9State& state, const LaunchConfig& cfg) {
    using namespace d2q9;
    require_components(state.f, kQ, "kernel_lb_collision");
    const double omega = 1.0 / state.tau;
    const double keep = 1.0 - omega;
    FieldView f = state.f.target_view();
    const std::size_t nx = state.shape.extent(0);

    launch(cfg, state.f.layout(), [=](const SiteChunk& chunk) {
        std::size_t bad_site = kNoSite;
        for_each_lane(chunk, [&](std::size_t lane) {
            const std::size_t s = chunk.site(lane);
            double fi[kQ];
            double rho = 0.0, jx = 0.0, jy = 0.0;
            for (std::size_t i = 0; i < kQ; ++i) {
                fi[i] = f(i, s);
                rho += fi[i];
                jx += cx[i] * fi[i];
                jy += cy[i] * fi[i];
            }
            if (!(rho > 0.0)) bad_site = std::min(bad_site, s);
            const double inv_rho = 1.0 / rho;
            const double ux = jx * inv_rho;
            const double uy = jy * inv_rho;
            const double base = 1.0 - 1.5 * (ux * ux + uy * uy);
            for (std::size_t i = 0; i < kQ; ++i) {
                const double cu = cx[i] * ux + cy[i] * uy;
                f(i, s) = keep * fi[i] + omega * equilibrium_term(w[i], rho, cu, base);
            }
        });
        if (bad_site != kNoSite)
            throw NumericalDomainError("lb collision: nonpositive density at site (" +
                                       std::to_string(bad_site % nx) + "," +
                                       std::to_string(bad_site / nx) + ")");
    });
}

void kernel_lb_propagation(const FieldPair& src, FieldPair& dst, const GridShape& shape,
                           const LaunchConfig& cfg) {
    using namespace d2q9;
    require_components(src, kQ, "kernel_lb_propagation");
    require_components(dst, kQ, "kernel_lb_propagation");
    if (!(src.layout() == dst.layout()))
        throw InvalidArgument("kernel_lb_propagation: source and destination layouts differ");
    if (shape.rank() != 2 || shape.nsites() != src.layout().nsites_logical())
        throw InvalidArgument("kernel_lb_propagation: grid shape does not match field");
    const std::size_t nx = shape.extent(0);
    const std::size_t ny = shape.extent(1);
    if (nx < 3 || ny < 3)
        throw InvalidArgument("kernel_lb_propagation: every grid extent must be >= 3");

    ConstFieldView in = src.target_cview();
    FieldView out = dst.target_view();
    launch(cfg, dst.layout(), [=](const SiteChunk& chunk) {
        for_each_lane(chunk, [&](std::size_t lane) {
            const std::size_t s = chunk.site(lane);
            const std::size_t x = s % nx;
            const std::size_t y = s / nx;
            // Upstream coordinates x - c for c in {-1, 0, 1}.
            const std::size_t xs[3] = {x + 1 == nx ? 0 : x + 1, x, x == 0 ? nx - 1 : x - 1};
            const std::size_t ys[3] = {y + 1 == ny ? 0 : y + 1, y, y == 0 ? ny - 1 : y - 1};
            for (std::size_t i = 0; i < kQ; ++i) {
                const std::size_t from = ys[cy[i] + 1] * nx + xs[cx[i] + 1];
                out(i, s) = in(i, from);
            }
        });
    });
}

void kernel_lb_propagation(D2Q9State& state, const LaunchConfig& cfg) {
    kernel_lb_propagation(state.f, state.f_next, state.shape, cfg);
    std::swap(state.f, state.f_next);
}

LbDiagnostics lb_diagnostics(const D2Q9State& state, std::size_t step, const LaunchConfig& cfg) {
    using namespace d2q9;
    const LayoutDescriptor& layout = state.f.layout();
    TargetBuffer mass = target_malloc(layout.nsites_padded(), ElementType::f64);
    TargetBuffer mom_x = target_malloc(layout.nsites_padded(), ElementType::f64);
    TargetBuffer mom_y = target_malloc(layout.nsites_padded(), ElementType::f64);
    double* m = mass.span<double>().data();
    double* px = mom_x.span<double>().data();
    double* py = mom_y.span<double>().data();
    ConstFieldView f = state.f.target_cview();

    launch(cfg, layout, [=](const SiteChunk& chunk) {
        for_each_lane(chunk, [&](std::size_t lane) {
            const std::size_t s = chunk.site(lane);
            double rho = 0.0, jx = 0.0, jy = 0.0;
            for (std::size_t i = 0; i < kQ; ++i) {
                const double v = f(i, s);
                rho += v;
                jx += cx[i] * v;
                jy += cy[i] * v;
            }
            m[s] = rho;
            px[s] = jx;
            py[s] = jy;
        });
    });
    synchronize();

    const std::size_t n = layout.nsites_logical();
    return {step, target_double_sum(mass, n, cfg), target_double_sum(mom_x, n, cfg),
            target_double_sum(mom_y, n, cfg)};
}

std::vector<double> lb_initial_state(const LbParams& params) {
    if (params.shape.rank() != 2) throw InvalidArgument("lb: grid must be two-dimensional");
    const std::size_t nx = params.shape.extent(0);
    const std::size_t ny = params.shape.extent(1);
    UniformStream noise(params.seed);
    std::vector<double> values(params.shape.nsites() * d2q9::kQ);
    for (std::size_t y = 0; y < ny; ++y) {
        const double ux = params.shear_amplitude *
                          std::sin(2.0 * std::numbers::pi * static_cast<double>(y) /
                                   static_cast<double>(ny));
        for (std::size_t x = 0; x < nx; ++x) {
            double rho = 1.0;
            if (params.density_noise != 0.0) rho += params.density_noise * noise.next(-1.0, 1.0);
            const auto feq = d2q9::equilibrium(rho, ux, 0.0);
            const std::size_t s = y * nx + x;
            std::copy(feq.begin(), feq.end(), values.begin() + static_cast<std::ptrdiff_t>(s * d2q9::kQ));
        }
    }
    return values;
}

LbRun run_lb_miniapp(const LbParams& params, const LayoutScheme& scheme, const LaunchConfig& cfg) {
    cfg.validate();
    LbRun run{D2Q9State(params.shape, params.tau, scheme, cfg.vvl), {}};
    D2Q9State& state = run.state;
    if (params.shape.extent(0) < 3 || params.shape.extent(1) < 3)
        throw InvalidArgument("lb: every grid extent must be >= 3");

    state.f.load_logical(lb_initial_state(params));
    state.f.copy_to_target();

    run.diagnostics.reserve(params.steps + 1);
    run.diagnostics.push_back(lb_diagnostics(state, 0, cfg));
    for (std::size_t step = 1; step <= params.steps; ++step) {
        try {
            kernel_lb_collision(state, cfg);
        } catch (const NumericalDomainError& e) {
            throw NumericalDomainError("step " + std::to_string(step) + ": " + e.what());
        }
        kernel_lb_propagation(state, cfg);
        synchronize();
        run.diagnostics.push_back(lb_diagnostics(state, step, cfg));
    }
    state.f.copy_from_target();
    return run;
}

std::string lb_diagnostics_header() { return "step,total_mass,total_momentum_x,total_momentum_y"; }

std::string to_csv_row(const LbDiagnostics& d) {
    return std::to_string(d.step) + ',' + csv::format_double(d.total_mass) + ',' +
           csv::format_double(d.momentum_x) + ',' + csv::format_double(d.momentum_y);
}

LbDiagnostics parse_lb_diagnostics_row(std::string_view line, std::size_t line_no) {
    const auto fields = csv::split(line);
    if (fields.size() != 4)
        throw csv::ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    return {csv::parse_uint(fields[0], line_no, "step"),
            csv::parse_double(fields[1], line_no, "total_mass"),
            csv::parse_double(fields[2], line_no, "total_momentum_x"),
            csv::parse_double(fields[3], line_no, "total_momentum_y")};
}

// --- suite ------------------------------------------------------------------

SuiteKernel parse_suite_kernel(std::string_view text) {
    for (SuiteKernel k : kAllSuiteKernels)
        if (text == to_string(k)) return k;
    throw InvalidArgument("unknown kernel '" + std::string(text) +
                          "' (expected scale, triad, collision or propagation)");
}

std::string_view to_string(SuiteKernel kernel) noexcept { return cost_model(kernel).name; }

const KernelCostModel& cost_model(SuiteKernel kernel) noexcept {
    switch (kernel) {
        case SuiteKernel::scale: return kScaleCost;
        case SuiteKernel::triad: return kTriadCost;
        case SuiteKernel::collision: return kCollisionCost;
        case SuiteKernel::propagation: return kPropagationCost;
    }
    return kScaleCost;
}

struct KernelInstance::Impl {
    Impl(SuiteKernel k, const GridShape& s, const LaunchConfig& c) : kernel(k), shape(s), cfg(c) {}

    SuiteKernel kernel;
    GridShape shape;
    LaunchConfig cfg;
    ConstantTable constants;
    std::vector<FieldPair> fields;       // scale: f | triad: a, b, c
    std::unique_ptr<D2Q9State> lattice;  // collision, propagation
    std::vector<std::vector<double>> initial;  // canonical inputs per field

    std::vector<FieldPair*> all_pairs() {
        std::vector<FieldPair*> out;
        for (auto& p : fields) out.push_back(&p);
        if (lattice) {
            out.push_back(&lattice->f);
            out.push_back(&lattice->f_next);
        }
        return out;
    }
};

KernelInstance::KernelInstance(SuiteKernel kernel, const GridShape& shape,
                               const LayoutScheme& scheme, const LaunchConfig& cfg,
                               std::uint64_t seed)
    : impl_(std::make_unique<Impl>(kernel, shape, cfg)) {
    cfg.validate();
    const std::size_t n = shape.nsites();
    switch (kernel) {
        case SuiteKernel::scale:
            impl_->fields.emplace_back(make_layout(n, 3, scheme, cfg.vvl));
            impl_->initial.push_back(uniform_doubles(seed, 3 * n, -1.0, 1.0));
            impl_->constants.set("a", 1.25);
            break;
        case SuiteKernel::triad: {
            const auto layout = make_layout(n, 1, scheme, cfg.vvl);
            for (int i = 0; i < 3; ++i) impl_->fields.emplace_back(layout);
            impl_->initial.push_back(std::vector<double>(n, 0.0));
            impl_->initial.push_back(uniform_doubles(seed, n, -1.0, 1.0));
            impl_->initial.push_back(uniform_doubles(seed + 1, n, -1.0, 1.0));
            impl_->constants.set("q", 3.0);
            break;
        }
        case SuiteKernel::collision: {
            impl_->lattice = std::make_unique<D2Q9State>(shape, 0.8, scheme, cfg.vvl);
            UniformStream stream(seed);
            std::vector<double> f(n * d2q9::kQ);
            for (std::size_t s = 0; s < n; ++s) {
                const double rho = stream.next(0.9, 1.1);
                const double ux = stream.next(-0.05, 0.05);
                const double uy = stream.next(-0.05, 0.05);
                auto feq = d2q9::equilibrium(rho, ux, uy);
                // Off-equilibrium part so relaxation does real work.
                for (std::size_t i = 0; i < d2q9::kQ; ++i)
                    f[s * d2q9::kQ + i] = feq[i] * (1.0 + stream.next(-0.05, 0.05));
            }
            impl_->initial.push_back(std::move(f));
            break;
        }
        case SuiteKernel::propagation:
            impl_->lattice = std::make_unique<D2Q9State>(shape, 0.8, scheme, cfg.vvl);
            impl_->initial.push_back(uniform_doubles(seed, n * d2q9::kQ, 0.0, 1.0));
            break;
    }
    reset();
}

KernelInstance::~KernelInstance() = default;
KernelInstance::KernelInstance(KernelInstance&&) noexcept = default;
KernelInstance& KernelInstance::operator=(KernelInstance&&) noexcept = default;

void KernelInstance::reset() {
    Impl& s = *impl_;
    if (s.lattice) {
        s.lattice->f.load_logical(s.initial[0]);
        s.lattice->f.copy_to_target();
        return;
    }
    for (std::size_t i = 0; i < s.fields.size(); ++i) {
        s.fields[i].load_logical(s.initial[i]);
        s.fields[i].copy_to_target();
    }
}

void KernelInstance::run() {
    Impl& s = *impl_;
    switch (s.kernel) {
        case SuiteKernel::scale: kernel_scale(s.fields[0], s.constants, s.cfg); break;
        case SuiteKernel::triad:
            kernel_triad(s.fields[0], s.fields[1], s.fields[2], s.constants, s.cfg);
            break;
        case SuiteKernel::collision: kernel_lb_collision(*s.lattice, s.cfg); break;
        case SuiteKernel::propagation: kernel_lb_propagation(*s.lattice, s.cfg); break;
    }
    synchronize();
}

std::vector<double> KernelInstance::logical_output() {
    Impl& s = *impl_;
    FieldPair& out = s.lattice ? s.lattice->f : s.fields[0];
    out.copy_from_target();
    return out.logical_host_values();
}

void KernelInstance::poison_padding(double sentinel) {
    for (FieldPair* p : impl_->all_pairs()) p->poison_padding(sentinel);
}

SuiteKernel KernelInstance::kernel() const noexcept { return impl_->kernel; }
std::size_t KernelInstance::nsites() const noexcept { return impl_->shape.nsites(); }
const LaunchConfig& KernelInstance::config() const noexcept { return impl_->cfg; }

}  // namespace tdp
