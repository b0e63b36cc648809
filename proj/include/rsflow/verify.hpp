/// @file verify.hpp
/// @brief Frozen-in verification: flow maps with Jacobians, pullback
/// errors, transport residuals, identity suites and convergence fits.
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsflow/pullback.hpp"
#include "rsflow/rsf.hpp"
#include "rsflow/solver.hpp"

namespace rsflow {

struct VelocitySnapshot {
    double time = 0.0;
    VectorField u;
};

/// Uniformly spaced velocity snapshots on one grid. Snapshots are addressed
/// by the index they were pushed with; old ones may be released to bound
/// memory during streaming.
class VelocityHistory {
public:
    /// Times must increase with a constant spacing (relative tolerance 1e-9).
    void push(double time, VectorField u);

    std::size_t count() const { return first_ + snaps_.size(); }
    std::size_t oldest() const { return first_; }
    bool empty() const { return count() == 0; }
    const VelocitySnapshot& operator[](std::size_t index) const;
    const Grid& grid() const { return grid_; }
    double start_time() const { return t_first_; }
    double spacing() const { return spacing_; }
    double time(std::size_t index) const { return t_first_ + static_cast<double>(index) * spacing_; }
    /// Index of the snapshot taken at @p t; throws ContractError if none.
    std::size_t index_of(double t) const;

    /// Releases every snapshot with index < @p index.
    void release_before(std::size_t index);

private:
    std::deque<VelocitySnapshot> snaps_;
    Grid grid_;
    std::size_t first_ = 0;
    double t_first_ = 0.0;
    double spacing_ = 0.0;
};

/// Samples an analytic velocity (ncomp = grid dim) at @p count uniformly spaced times.
VelocityHistory analytic_history(const AnalyticField& u, const Grid& grid, double t_start, double spacing, int count);

/// Reads snap_NNNN.rsff files (sorted by name) and keeps the first d
/// components, d the grid dimension, as the velocity.
VelocityHistory load_snapshot_history(const std::filesystem::path& dir);

/// Lagrange weights in time over snapshots first..first+m-1 (m <= 4): the
/// cubic through the four snapshots around the interval holding @p t,
/// shifted inward at the ends of the history.
struct TimeStencil {
    std::size_t first = 0;
    int count = 0;
    std::array<double, 4> weight{};
};
TimeStencil time_stencil(double t, double t_first, double spacing, std::size_t nsnap);

/// Particle advection of every grid node by RK4, with the Jacobian carried
/// along through dJ/dt = J G(Phi), G(k, c) = d u_c / d x_k, from J = I.
/// Velocity is cubic in time between snapshots and interpolated in space
/// with @p scheme. Snapshots can be pushed while a simulation runs; only
/// the few needed for the current step are retained.
class FlowMapIntegrator {
public:
    FlowMapIntegrator(double t0, double t1, int steps, Interpolation scheme = Interpolation::lagrange4);

    /// Next snapshot; integrates as far as the available data allows.
    void push(double time, VectorField u);
    /// Integrates the remaining steps and returns the map from t0 to t1.
    /// Throws ContractError if the snapshots do not cover [t0, t1] and
    /// NumericalError if a Jacobian determinant becomes non-positive.
    DiscreteMap finish();

    int steps_done() const { return done_; }
    double min_determinant() const { return min_det_; }

private:
    struct StageFields {
        double time = 0.0;
        VectorField u;
        TensorField g;
    };

    std::size_t required_snapshot(double t) const;
    const StageFields& fields_at(double t, std::size_t nsnap);
    void try_advance(bool final);
    void step(double t, double h, std::size_t nsnap);
    void init_particles(const Grid& g);

    double t0_, t1_;
    int steps_;
    Interpolation scheme_;
    VelocityHistory history_;
    std::deque<StageFields> cache_;
    std::vector<std::vector<double>> state_;  ///< d positions then d*d Jacobian entries
    int done_ = 0;
    double min_det_ = 1.0;
};

/// Flow map from t0 to t1 through a stored history (both inside its span).
DiscreteMap advect_flowmap(const VelocityHistory& history, double t0, double t1, int steps,
                           Interpolation scheme = Interpolation::lagrange4);

struct FormNorms {
    double linf = 0.0;
    double l2 = 0.0;  ///< sqrt(sum over tuples of integral c^2)
};
FormNorms form_norms(const KForm& w);

struct PullbackError {
    double linf = 0.0;
    double l2 = 0.0;
    double linf_rel = 0.0;  ///< divided by the norm of omega(t0)
    double l2_rel = 0.0;
};

/// Norms of phi^* omega(t1) - omega(t0).
PullbackError pullback_error(const KForm& omega_t1, const DiscreteMap& map, const KForm& omega_t0,
                             Interpolation scheme = Interpolation::lagrange4);

struct ResidualSample {
    std::size_t index = 0;
    double time = 0.0;
    KForm residual;
    double linf = 0.0;
    double l2 = 0.0;
    double dt_linf = 0.0;   ///< max |d_t omega|
    double lie_linf = 0.0;  ///< max |L_u omega|
    /// Size of the terms before cancellation: (|omega+| + |omega-|) / (2 dt) + |u| |omega| / h.
    double scale = 0.0;
};

/// Centered d_t omega + L_u omega at every interior snapshot. The series is
/// aligned with the history (same count, nothing released).
std::vector<ResidualSample> residual_pde(const VelocityHistory& history, std::span<const KForm> series);

struct ResidualReport {
    std::vector<std::vector<ResidualSample>> components;
    std::vector<ResidualSample> sum;
    /// Per interior snapshot: max |res(sum) - sum res| / (sum of the component scales).
    std::vector<double> linearity;
    double max_linearity = 0.0;
};
ResidualReport residual_pde(const VelocityHistory& history, const std::vector<std::vector<KForm>>& components);

/// Vorticity components of every snapshot of @p history.
std::vector<std::vector<KForm>> component_series(const VelocityHistory& history, const DecompPlan& plan);

enum class LemmaMode {
    standard,          ///< extended axes invisible to the first k components and to omega
    inject_violation,  ///< omega gains an x_{k+1} dependence
    constant_extension ///< the extra velocity components are constants
};

/// max |L_{u(d)} omega - L_{u(k)} omega| at random points with exact
/// derivatives; u(k) keeps the first k components. k is 1-based count.
double lemma1_check(int d, int k, std::uint64_t seed, LemmaMode mode = LemmaMode::standard);

struct WedgeSample {
    std::size_t index = 0;
    double time = 0.0;
    double direct = 0.0;   ///< max |(d_t + L_u)(Omega_i ^ Omega_j)| from the wedge series
    double leibniz = 0.0;  ///< max |R_i ^ Omega_j + Omega_i ^ R_j|
    double bound = 0.0;    ///< |Omega_j| |R_i| + |Omega_i| |R_j| (max norms)
    double residual_i = 0.0;
    double residual_j = 0.0;
};

struct WedgeReport {
    bool trivial = false;  ///< the wedge degree exceeds d
    int i = 0;
    int j = 1;
    std::vector<WedgeSample> samples;
};

/// Transport residual of Omega_i ^ Omega_j next to its Leibniz expansion.
WedgeReport wedge_invariants(const VelocityHistory& history, const DecompPlan& plan, int i = 0, int j = 1);

struct ConvergenceFit {
    std::vector<int> resolutions;
    std::vector<double> errors;
    bool below_floor = false;  ///< some error at or under the floor; no slope fitted
    double slope = 0.0;        ///< least-squares d log2(error) / d log2(N)
    double order() const { return -slope; }
};

/// Throws ContractError unless there are >= 3 resolutions, each dividing the next.
void require_nested(std::span<const int> resolutions);
ConvergenceFit fit_order(std::span<const int> resolutions, std::span<const double> errors, double floor = 1e-14);

struct IdentityRow {
    int d = 0;
    std::uint64_t seed = 0;
    double dd = 0.0;           ///< d(d omega)
    double cartan = 0.0;       ///< Cartan formula vs component formula
    double commutation = 0.0;  ///< d L_u omega - L_u d omega
    double leibniz = 0.0;      ///< L_u(a ^ b) - L_u a ^ b - a ^ L_u b
    double lemma1 = 0.0;       ///< worst lemma1_check over k
    double max() const;
};

struct IdentitySuite {
    std::vector<IdentityRow> rows;
    double max_discrepancy = 0.0;
};
IdentitySuite identity_suite(std::span<const int> dims, int seeds, LemmaMode lemma_mode = LemmaMode::standard);
nlohmann::json identity_json(const IdentitySuite& s);

/// One frozen-in run: kinematic or constrained solver at N^3 with the flow
/// map integrated alongside, then the pullback errors of every component
/// vorticity and of their sum.
struct FrozenOptions {
    SolverConfig config;        ///< dims are overridden by N
    int snapshot_stride = 4;    ///< solver steps between velocity snapshots
    int substeps_per_n = 8;     ///< particle steps = N / substeps_per_n (at least 4)
    Interpolation scheme = Interpolation::lagrange4;  ///< used for advection and pullback
    bool wrong_velocity = false;  ///< advect with u1 and u2 swapped (negative control)
};

struct FrozenRun {
    int N = 0;
    int solver_steps = 0;
    int particle_steps = 0;
    double min_determinant = 0.0;
    std::vector<PullbackError> components;  ///< one per plan pair
    PullbackError total;
    double seconds = 0.0;
};

FrozenRun frozen_in_run(int N, const FrozenOptions& options);

/// Frozen-in errors from a stored snapshot directory (first to last snapshot).
FrozenRun frozen_in_from_history(const VelocityHistory& history, int particle_steps,
                                 Interpolation scheme = Interpolation::lagrange4);

struct VerificationReport {
    std::string scenario;
    std::vector<FrozenRun> runs;
    std::vector<ConvergenceFit> fits;  ///< per component, by normalized L2 error
    ConvergenceFit total_fit;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// frozen_in_run at each resolution plus order fits.
VerificationReport convergence_study(const FrozenOptions& options, std::span<const int> resolutions);

nlohmann::json frozen_run_json(const FrozenRun& r);

}  // namespace rsflow
