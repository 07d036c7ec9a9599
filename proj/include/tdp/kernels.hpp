#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tdp/exec.hpp"
#include "tdp/layout.hpp"
#include "tdp/memspace.hpp"

namespace tdp {

/// Analytic per-site work of a kernel. Bytes count each logically read and
/// each logically written double once, with no cache modelling.
struct KernelCostModel {
    std::string_view name;
    std::uint64_t flops_per_site;
    std::uint64_t bytes_per_site;

    double oi() const noexcept {
        return static_cast<double>(flops_per_site) / static_cast<double>(bytes_per_site);
    }
};

inline constexpr KernelCostModel kScaleCost{"scale", 3, 48};
inline constexpr KernelCostModel kTriadCost{"triad", 2, 24};
// Static count of the collision expression in kernels.cpp:
//   moments 45, 1/rho 1, velocity 2, 1 - 1.5|u|^2 5, per direction 9 x 12.
inline constexpr KernelCostModel kCollisionCost{"collision", 161, 144};
inline constexpr KernelCostModel kPropagationCost{"propagation", 0, 144};

/// field[c, s] <- a * field[c, s] for the three components of every site.
/// `a` is read from constant "a".
void kernel_scale(FieldPair& field, const ConstantTable& constants, const LaunchConfig& cfg);

/// a[s] <- b[s] + q * c[s] on single-component fields; `q` is constant "q".
void kernel_triad(FieldPair& a, const FieldPair& b, const FieldPair& c,
                  const ConstantTable& constants, const LaunchConfig& cfg);

// --- D2Q9 lattice Boltzmann -------------------------------------------------

namespace d2q9 {

inline constexpr std::size_t kQ = 9;
// Velocity ordering: rest, the four axis directions, then the diagonals.
inline constexpr std::array<int, kQ> cx{0, 1, 0, -1, 0, 1, -1, -1, 1};
inline constexpr std::array<int, kQ> cy{0, 0, 1, 0, -1, 1, 1, -1, -1};
inline constexpr std::array<double, kQ> w{4.0 / 9,  1.0 / 9,  1.0 / 9,  1.0 / 9, 1.0 / 9,
                                          1.0 / 36, 1.0 / 36, 1.0 / 36, 1.0 / 36};

/// BGK equilibrium, evaluated with the same expression the collision kernel
/// uses.
std::array<double, kQ> equilibrium(double rho, double ux, double uy) noexcept;

}  // namespace d2q9

/// Distribution field of a periodic 2-D D2Q9 lattice, double buffered for
/// propagation. `f` is the current state; `f_next` is scratch.
struct D2Q9State {
    D2Q9State(GridShape shape, double tau, const LayoutScheme& scheme, std::size_t vvl);

    GridShape shape;
    double tau;
    FieldPair f;
    FieldPair f_next;
};

/// Local BGK relaxation of every site toward equilibrium with relaxation time
/// tau. Throws NumericalDomainError naming the site if a density is not
/// positive.
void kernel_lb_collision(D2Q9State& state, const LaunchConfig& cfg);

/// f_i(x) <- f_i(x - c_i) with periodic wrap, from `src` into `dst`.
void kernel_lb_propagation(const FieldPair& src, FieldPair& dst, const GridShape& shape,
                           const LaunchConfig& cfg);
/// Propagates state.f into state.f_next and swaps the two.
void kernel_lb_propagation(D2Q9State& state, const LaunchConfig& cfg);

struct LbDiagnostics {
    std::size_t step;
    double total_mass;
    double momentum_x;
    double momentum_y;

    friend bool operator==(const LbDiagnostics&, const LbDiagnostics&) = default;
};

/// Global mass and momentum of the target copy of state.f, summed with
/// target_double_sum over per-site values.
LbDiagnostics lb_diagnostics(const D2Q9State& state, std::size_t step, const LaunchConfig& cfg);

struct LbParams {
    GridShape shape{{32, 32}};
    double tau = 0.8;
    std::size_t steps = 100;
    /// Peak x-velocity of the initial shear wave u_x(y) = A sin(2 pi y / ny).
    double shear_amplitude = 1e-3;
    /// Amplitude of a uniform random density perturbation; 0 disables it.
    double density_noise = 0.0;
    std::uint64_t seed = 42;
};

/// Host-side initial state: equilibrium at rho = 1 (+ noise) carrying the
/// shear wave. Values are in canonical (site-major) order.
std::vector<double> lb_initial_state(const LbParams& params);

struct LbRun {
    D2Q9State state;  // host copy synchronized with the target
    std::vector<LbDiagnostics> diagnostics;  // step 0 .. steps
};

/// Alternates collision and propagation for params.steps steps.
LbRun run_lb_miniapp(const LbParams& params, const LayoutScheme& scheme, const LaunchConfig& cfg);

/// CSV header and rows `step,total_mass,total_momentum_x,total_momentum_y`
/// with shortest round-trip number formatting.
std::string lb_diagnostics_header();
std::string to_csv_row(const LbDiagnostics& d);
LbDiagnostics parse_lb_diagnostics_row(std::string_view line, std::size_t line_no);

// --- Benchmark suite ----------------------------------------------------------

enum class SuiteKernel { scale, triad, collision, propagation };

SuiteKernel parse_suite_kernel(std::string_view text);
std::string_view to_string(SuiteKernel kernel) noexcept;
const KernelCostModel& cost_model(SuiteKernel kernel) noexcept;
inline constexpr std::array<SuiteKernel, 4> kAllSuiteKernels{
    SuiteKernel::scale, SuiteKernel::triad, SuiteKernel::collision, SuiteKernel::propagation};

/// One suite kernel set up on a grid with seeded random inputs, ready to be
/// launched repeatedly.
class KernelInstance {
public:
    KernelInstance(SuiteKernel kernel, const GridShape& shape, const LayoutScheme& scheme,
                   const LaunchConfig& cfg, std::uint64_t seed);
    ~KernelInstance();
    KernelInstance(KernelInstance&&) noexcept;
    KernelInstance& operator=(KernelInstance&&) noexcept;

    /// Reloads the seeded inputs into the target copies.
    void reset();
    /// One launch of the kernel.
    void run();
    /// Copies the output back and returns its logical values in canonical
    /// order.
    std::vector<double> logical_output();
    /// Overwrites padded sites of every input and output with `sentinel`.
    void poison_padding(double sentinel);

    SuiteKernel kernel() const noexcept;
    std::size_t nsites() const noexcept;
    const LaunchConfig& config() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tdp
