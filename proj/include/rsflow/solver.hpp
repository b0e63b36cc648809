/// @file solver.hpp
/// @brief Barotropic real Schur flow in a periodic 3D box.
///
/// The horizontal velocity u_h lives on the 2D horizontal grid, so it has
/// no x3 dependence by construction; u3 is fully 3D. Three modes:
///  - constrained: 2D density, isothermal Pi = c^2 ln rho, Pi_3 = 0.
///  - free: 3D density; the u_h equation sees the x3-average of grad_h Pi
///    and the discarded part is reported as the pressure residual.
///  - kinematic_tg: u_h is the steady Taylor-Green field; only the u3
///    equation is integrated (Pi_3 = 0, inviscid).
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsflow/field.hpp"

namespace rsflow {

enum class SolverMode { constrained, free, kinematic_tg };

SolverMode parse_solver_mode(const std::string& s);
std::string to_string(SolverMode m);

struct SolverConfig {
    SolverMode mode = SolverMode::constrained;
    double c = 1.0;
    double nu = 0.0;
    double cfl = 0.4;
    double t_end = 1.0;
    int snapshot_stride = 10;  ///< steps between snapshots
    std::uint64_t seed = 0;
    int kmax = 2;
    double amplitude = 0.1;
    std::vector<int> dims = {32, 32, 32};
    std::vector<double> length = {kTwoPi, kTwoPi, kTwoPi};

    /// Throws ContractError on out-of-range values.
    void validate() const;
};

/// Flat key=value text; '#' starts a comment. Keys: mode, c, nu, cfl, t_end,
/// snapshot_stride, seed, kmax, amplitude, dims, length. dims and length take
/// one value (cube) or three comma-separated values.
SolverConfig parse_config(std::istream& in);
SolverConfig load_config(const std::filesystem::path& path);

struct FlowState {
    Grid grid3;
    Grid grid2;
    VectorField u_h;  ///< 2 components on grid2
    ScalarField u3;   ///< on grid3
    ScalarField rho;  ///< grid2 (constrained, kinematic_tg) or grid3 (free)
    double time = 0.0;
    int rho_clipped = 0;  ///< nodes raised to the density floor at initialization

    /// this += s * k (k has the same layout)
    void axpy(double s, const FlowState& k);
};

/// Band-limited random data with wavenumbers <= kmax; rho = 1 + perturbation,
/// clipped to >= 0.2. The density is 2D unless @p mode is free.
FlowState init_random(const Grid& grid3, std::uint64_t seed, int kmax, double amplitude,
                      SolverMode mode = SolverMode::constrained);

/// Steady Taylor-Green u_h, band-limited random u3 of the given amplitude, rho = 1.
FlowState init_kinematic_tg(const Grid& grid3, std::uint64_t seed, int kmax, double amplitude);

/// Initial state for the configured mode.
FlowState initial_state(const SolverConfig& config);

/// Time derivative of (u_h, u3, rho). Throws NumericalError if rho <= 0.
FlowState rhs(const FlowState& state, const SolverConfig& config);

/// Classical RK4 step; throws NumericalError on non-finite values.
FlowState step_rk4(const FlowState& state, const SolverConfig& config, double dt);

/// cfl * min spacing / (max |u| + c); c is dropped in kinematic_tg, which has no sound waves.
double cfl_dt(const FlowState& state, const SolverConfig& config);

/// f(x1, x2) copied along x3.
ScalarField extrude(const ScalarField& f2, const Grid& grid3);
/// Mean over x3.
ScalarField x3_average(const ScalarField& f3, const Grid& grid2);

/// (u1, u2, u3) on grid3.
VectorField assemble_velocity(const FlowState& state);
/// (u1, u2, u3, rho) on grid3, the snapshot layout.
VectorField snapshot_field(const FlowState& state);

struct Diagnostics {
    double time = 0.0;
    double energy = 0.0;    ///< (1/2) integral rho |u|^2
    double energy_h = 0.0;  ///< (1/2) integral |u_h|^2 over the horizontal plane
    double mass = 0.0;      ///< integral rho over the box
    double rho_min = 0.0;
    double rho_max = 0.0;
    double umax = 0.0;
    double rsf_dev = 0.0;
    double pressure_residual = 0.0;  ///< max |grad_h Pi - <grad_h Pi>_3| (free mode)
    double max_du3_dx3 = 0.0;
};

Diagnostics diagnostics(const FlowState& state, const SolverConfig& config);

/// check_rsf of the assembled 3D velocity.
double rsf_deviation(const FlowState& state);

inline constexpr const char* kDiagnosticsHeader = "time,energy,mass,rho_min,rho_max,umax,rsf_dev,pressure_residual";
std::string diagnostics_csv_row(const Diagnostics& d);

/// Largest |d u3 / d x3| tolerated before the run is declared steepened.
inline constexpr double kSteepeningLimit = 20.0;

struct RunResult {
    FlowState final_state;
    std::vector<Diagnostics> diagnostics;  ///< one per snapshot
    int steps = 0;
    double dt = 0.0;
};

/// Called with (snapshot index, state, diagnostics) at step 0 and every
/// snapshot_stride steps.
using SnapshotObserver = std::function<void(int, const FlowState&, const Diagnostics&)>;

/// Fixed step dt = t_end / n, n the smallest multiple of snapshot_stride with
/// dt <= cfl_dt(initial). Snapshots are therefore uniformly spaced.
double fixed_step(const FlowState& initial, const SolverConfig& config);

/// Integrates to t_end. Aborts with NumericalError (step index and time in
/// the message) on rho <= 0, non-finite values, |d3 u3| > 20, or a Courant
/// number above 1.
RunResult run_simulation(const SolverConfig& config, FlowState initial, const SnapshotObserver& observer = {});

/// run_simulation writing snap_NNNN.rsff files and diagnostics.csv into @p out.
RunResult simulate_to_directory(const SolverConfig& config, const std::filesystem::path& out);

std::string snapshot_name(int index);

}  // namespace rsflow
