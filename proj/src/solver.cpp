#include "rsflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rsflow/analytic.hpp"
#include "rsflow/derivative.hpp"
#include "rsflow/errors.hpp"
#include "rsflow/random.hpp"
#include "rsflow/rsf.hpp"
#include "rsflow/rsff_io.hpp"

namespace rsflow {

SolverMode parse_solver_mode(const std::string& s) {
    if (s == "constrained") return SolverMode::constrained;
    if (s == "free") return SolverMode::free;
    if (s == "kinematic_tg") return SolverMode::kinematic_tg;
    throw ContractError("unknown solver mode '" + s + "' (expected constrained, free or kinematic_tg)");
}

std::string to_string(SolverMode m) {
    switch (m) {
        case SolverMode::constrained: return "constrained";
        case SolverMode::free: return "free";
        case SolverMode::kinematic_tg: return "kinematic_tg";
    }
    return "?";
}

void SolverConfig::validate() const {
    if (!(c > 0.0)) throw ContractError("config: c must be > 0");
    if (!(nu >= 0.0)) throw ContractError("config: nu must be >= 0");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ContractError("config: cfl must lie in (0, 1)");
    if (!(t_end >= 0.0)) throw ContractError("config: t_end must be >= 0");
    if (snapshot_stride < 1) throw ContractError("config: snapshot_stride must be >= 1");
    if (kmax < 1) throw ContractError("config: kmax must be >= 1");
    if (!(amplitude >= 0.0)) throw ContractError("config: amplitude must be >= 0");
    if (dims.size() != 3 || length.size() != 3) throw ContractError("config: dims and length need 3 entries");
    for (int n : dims)
        if (n < kMinGridPoints) throw ContractError("config: every dims entry must be >= 8");
    for (double l : length)
        if (!(l > 0.0)) throw ContractError("config: length entries must be > 0");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out{};
    is >> out;
    if (!is || !is.eof()) {
        is >> std::ws;
        if (!is.eof() || is.fail()) throw ContractError("config: bad value '" + v + "' for key " + key);
    }
    return out;
}

template <class T>
std::vector<T> parse_triple(const std::string& key, const std::string& v) {
    std::vector<T> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
    if (out.size() == 1) out.assign(3, out[0]);
    if (out.size() != 3) throw ContractError("config: " + key + " needs 1 or 3 values");
    return out;
}

}  // namespace

SolverConfig parse_config(std::istream& in) {
    SolverConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ContractError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "mode") c.mode = parse_solver_mode(val);
        else if (key == "c") c.c = parse_number<double>(key, val);
        else if (key == "nu") c.nu = parse_number<double>(key, val);
        else if (key == "cfl") c.cfl = parse_number<double>(key, val);
        else if (key == "t_end") c.t_end = parse_number<double>(key, val);
        else if (key == "snapshot_stride") c.snapshot_stride = parse_number<int>(key, val);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, val);
        else if (key == "kmax") c.kmax = parse_number<int>(key, val);
        else if (key == "amplitude") c.amplitude = parse_number<double>(key, val);
        else if (key == "dims") c.dims = parse_triple<int>(key, val);
        else if (key == "length") c.length = parse_triple<double>(key, val);
        else throw ContractError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

SolverConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open config " + path.string());
    return parse_config(in);
}

void FlowState::axpy(double s, const FlowState& k) {
    for (int c = 0; c < 2; ++c) u_h[c].add_scaled(s, k.u_h[c]);
    u3.add_scaled(s, k.u3);
    rho.add_scaled(s, k.rho);
}

ScalarField extrude(const ScalarField& f2, const Grid& grid3) {
    const std::size_t n3 = static_cast<std::size_t>(grid3.dims(2));
    if (f2.size() * n3 != grid3.size()) throw ContractError("extrude: grid mismatch");
    std::vector<double> v(grid3.size());
    auto src = f2.values();
    for (std::size_t i = 0; i < src.size(); ++i) std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(i * n3), n3, src[i]);
    return ScalarField(grid3, std::move(v));
}

ScalarField x3_average(const ScalarField& f3, const Grid& grid2) {
    const std::size_t n3 = static_cast<std::size_t>(f3.grid().dims(2));
    if (grid2.size() * n3 != f3.size()) throw ContractError("x3_average: grid mismatch");
    std::vector<double> v(grid2.size());
    auto src = f3.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n3; ++k) s += src[i * n3 + k];
        v[i] = s / static_cast<double>(n3);
    }
    return ScalarField(grid2, std::move(v));
}

namespace {

FlowState empty_state(const Grid& grid3, bool rho3d) {
    FlowState s;
    s.grid3 = grid3;
    s.grid2 = grid3.leading(2);
    s.u_h = VectorField(s.grid2, 2);
    s.u3 = ScalarField(grid3);
    s.rho = ScalarField(rho3d ? grid3 : s.grid2, 1.0);
    return s;
}

void require_3d(const Grid& g) {
    if (g.dim() != 3) throw ContractError("solver: the flow grid must be three-dimensional");
}

}  // namespace

FlowState init_random(const Grid& grid3, std::uint64_t seed, int kmax, double amplitude, SolverMode mode) {
    require_3d(grid3);
    if (kmax < 1) throw ContractError("init_random: kmax must be >= 1");
    FlowState s = empty_state(grid3, mode == SolverMode::free);
    if (amplitude == 0.0) return s;
    Rng rh(seed, 10), rv(seed, 11), rr(seed, 12);
    for (int c = 0; c < 2; ++c) s.u_h[c] = TrigSeries::band_limited(2, 2, kmax, amplitude, rh).sample(s.grid2);
    s.u3 = TrigSeries::band_limited(3, 3, kmax, amplitude, rv).sample(grid3);
    const Grid& rg = s.rho.grid();
    ScalarField pert = TrigSeries::band_limited(rg.dim(), rg.dim(), kmax, amplitude, rr).sample(rg);
    for (std::size_t i = 0; i < pert.size(); ++i) {
        double r = 1.0 + pert[i];
        if (r < 0.2) {
            r = 0.2;
            ++s.rho_clipped;
        }
        s.rho[i] = r;
    }
    return s;
}

FlowState init_kinematic_tg(const Grid& grid3, std::uint64_t seed, int kmax, double amplitude) {
    require_3d(grid3);
    FlowState s = empty_state(grid3, false);
    s.u_h = analytic_registry("taylor_green_2d", {.dim = 2}).sample(s.grid2);
    if (amplitude != 0.0) {
        Rng rv(seed, 11);
        s.u3 = TrigSeries::band_limited(3, 3, kmax, amplitude, rv).sample(grid3);
    }
    return s;
}

FlowState initial_state(const SolverConfig& config) {
    config.validate();
    const Grid g(config.dims, config.length);
    if (config.mode == SolverMode::kinematic_tg) return init_kinematic_tg(g, config.seed, config.kmax, config.amplitude);
    return init_random(g, config.seed, config.kmax, config.amplitude, config.mode);
}

namespace {

/// out[i] -= a[i] * b[i / ratio] * ... helpers over flat arrays, with the
/// horizontal (2D) operands indexed by i / n3.
void check_density(const ScalarField& rho) {
    auto v = rho.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0)) throw NumericalError("rhs: rho <= 0 at node " + std::to_string(i));
}

ScalarField log_field(const ScalarField& f, double scale) {
    std::vector<double> v(f.size());
    auto src = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = scale * std::log(src[i]);
    return ScalarField(f.grid(), std::move(v));
}

/// Tendency of u3: -(u1 d1 u3 + u2 d2 u3 + u3 d3 u3) - d3 Pi + nu lap u3.
ScalarField u3_tendency(const FlowState& s, const ScalarField* dPi3, double nu) {
    const ScalarField d1 = partial_derivative(s.u3, 0);
    const ScalarField d2 = partial_derivative(s.u3, 1);
    const ScalarField d3 = partial_derivative(s.u3, 2);
    const std::size_t n3 = static_cast<std::size_t>(s.grid3.dims(2));
    auto u1 = s.u_h[0].values();
    auto u2 = s.u_h[1].values();
    auto w = s.u3.values();
    std::vector<double> out(s.grid3.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::size_t h = i / n3;
        out[i] = -(u1[h] * d1[i] + u2[h] * d2[i] + w[i] * d3[i]);
    }
    if (dPi3)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= (*dPi3)[i];
    ScalarField t(s.grid3, std::move(out));
    if (nu > 0.0) t.add_scaled(nu, laplacian(s.u3));
    return t;
}

/// Tendency of u_h given the horizontal pressure gradient on grid2.
VectorField uh_tendency(const FlowState& s, const ScalarField& dPi1, const ScalarField& dPi2, double nu) {
    VectorField t(s.grid2, 2);
    const auto& u1 = s.u_h[0];
    const auto& u2 = s.u_h[1];
    for (int c = 0; c < 2; ++c) {
        const ScalarField a = partial_derivative(s.u_h[c], 0);
        const ScalarField b = partial_derivative(s.u_h[c], 1);
        const ScalarField& dp = c == 0 ? dPi1 : dPi2;
        std::vector<double> v(s.grid2.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = -(u1[i] * a[i] + u2[i] * b[i]) - dp[i];
        t[c] = ScalarField(s.grid2, std::move(v));
        if (nu > 0.0) t[c].add_scaled(nu, laplacian(s.u_h[c]));
    }
    return t;
}

}  // namespace

FlowState rhs(const FlowState& s, const SolverConfig& config) {
    FlowState k;
    k.grid3 = s.grid3;
    k.grid2 = s.grid2;
    k.time = s.time;
    const double c2 = config.c * config.c;
    switch (config.mode) {
        case SolverMode::kinematic_tg: {
            k.u_h = VectorField(s.grid2, 2);
            k.rho = ScalarField(s.rho.grid());
            k.u3 = u3_tendency(s, nullptr, 0.0);
            break;
        }
        case SolverMode::constrained: {
            check_density(s.rho);
            const ScalarField Pi = log_field(s.rho, c2);
            k.u_h = uh_tendency(s, partial_derivative(Pi, 0), partial_derivative(Pi, 1), config.nu);
            k.u3 = u3_tendency(s, nullptr, config.nu);
            const ScalarField f1 = s.rho * s.u_h[0];
            const ScalarField f2 = s.rho * s.u_h[1];
            k.rho = -(partial_derivative(f1, 0) + partial_derivative(f2, 1));
            break;
        }
        case SolverMode::free: {
            check_density(s.rho);
            const ScalarField Pi = log_field(s.rho, c2);
            const ScalarField g1 = x3_average(partial_derivative(Pi, 0), s.grid2);
            const ScalarField g2 = x3_average(partial_derivative(Pi, 1), s.grid2);
            const ScalarField dPi3 = partial_derivative(Pi, 2);
            k.u_h = uh_tendency(s, g1, g2, config.nu);
            k.u3 = u3_tendency(s, &dPi3, config.nu);
            const ScalarField f1 = s.rho * extrude(s.u_h[0], s.grid3);
            const ScalarField f2 = s.rho * extrude(s.u_h[1], s.grid3);
            const ScalarField f3 = s.rho * s.u3;
            k.rho = -(partial_derivative(f1, 0) + partial_derivative(f2, 1) + partial_derivative(f3, 2));
            break;
        }
    }
    return k;
}

FlowState step_rk4(const FlowState& s, const SolverConfig& config, double dt) {
    const FlowState k1 = rhs(s, config);
    FlowState y = s;
    y.axpy(0.5 * dt, k1);
    const FlowState k2 = rhs(y, config);
    y = s;
    y.axpy(0.5 * dt, k2);
    const FlowState k3 = rhs(y, config);
    y = s;
    y.axpy(dt, k3);
    const FlowState k4 = rhs(y, config);
    FlowState out = s;
    out.axpy(dt / 6.0, k1);
    out.axpy(dt / 3.0, k2);
    out.axpy(dt / 3.0, k3);
    out.axpy(dt / 6.0, k4);
    out.time = s.time + dt;
    out.u_h[0].require_finite("step_rk4 u1");
    out.u_h[1].require_finite("step_rk4 u2");
    out.u3.require_finite("step_rk4 u3");
    out.rho.require_finite("step_rk4 rho");
    return out;
}

namespace {

double max_speed(const FlowState& s) {
    const std::size_t n3 = static_cast<std::size_t>(s.grid3.dims(2));
    auto u1 = s.u_h[0].values();
    auto u2 = s.u_h[1].values();
    auto w = s.u3.values();
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t h = i / n3;
        m = std::max(m, u1[h] * u1[h] + u2[h] * u2[h] + w[i] * w[i]);
    }
    return std::sqrt(m);
}

// No acoustic waves in the kinematic mode.
double signal_speed(const FlowState& s, const SolverConfig& config) {
    return max_speed(s) + (config.mode == SolverMode::kinematic_tg ? 0.0 : config.c);
}

}  // namespace

double cfl_dt(const FlowState& s, const SolverConfig& config) {
    return config.cfl * s.grid3.min_spacing() / signal_speed(s, config);
}

VectorField assemble_velocity(const FlowState& s) {
    return VectorField(s.grid3, {extrude(s.u_h[0], s.grid3), extrude(s.u_h[1], s.grid3), s.u3});
}

VectorField snapshot_field(const FlowState& s) {
    ScalarField rho3 = s.rho.grid().dim() == 3 ? s.rho : extrude(s.rho, s.grid3);
    return VectorField(s.grid3, {extrude(s.u_h[0], s.grid3), extrude(s.u_h[1], s.grid3), s.u3, std::move(rho3)});
}

double rsf_deviation(const FlowState& s) { return check_rsf(assemble_velocity(s), zero_pattern(3)); }

Diagnostics diagnostics(const FlowState& s, const SolverConfig& config) {
    Diagnostics d;
    d.time = s.time;
    const Grid& g3 = s.grid3;
    const std::size_t n3 = static_cast<std::size_t>(g3.dims(2));
    const bool rho3d = s.rho.grid().dim() == 3;
    auto u1 = s.u_h[0].values();
    auto u2 = s.u_h[1].values();
    auto w = s.u3.values();
    auto r = s.rho.values();
    double e = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const std::size_t h = i / n3;
        const double rho = rho3d ? r[i] : r[h];
        e += rho * (u1[h] * u1[h] + u2[h] * u2[h] + w[i] * w[i]);
    }
    d.energy = 0.5 * e * g3.cell_volume();
    double eh = 0.0;
    for (std::size_t h = 0; h < u1.size(); ++h) eh += u1[h] * u1[h] + u2[h] * u2[h];
    d.energy_h = 0.5 * eh * s.grid2.cell_volume();
    d.mass = rho3d ? s.rho.integral() : s.rho.integral() * g3.length(2);
    d.rho_min = s.rho.min();
    d.rho_max = s.rho.max();
    d.umax = max_speed(s);
    d.rsf_dev = rsf_deviation(s);
    d.max_du3_dx3 = partial_derivative(s.u3, 2).max_abs();
    if (config.mode == SolverMode::free) {
        const ScalarField Pi = log_field(s.rho, config.c * config.c);
        for (int a = 0; a < 2; ++a) {
            const ScalarField g = partial_derivative(Pi, a);
            d.pressure_residual = std::max(d.pressure_residual, (g - extrude(x3_average(g, s.grid2), g3)).max_abs());
        }
    }
    return d;
}

std::string diagnostics_csv_row(const Diagnostics& d) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", d.time, d.energy, d.mass, d.rho_min,
                  d.rho_max, d.umax, d.rsf_dev, d.pressure_residual);
    return buf;
}

double fixed_step(const FlowState& initial, const SolverConfig& config) {
    if (config.t_end == 0.0) return 0.0;
    const double dt0 = cfl_dt(initial, config);
    const double stride = config.snapshot_stride;
    const double n = std::ceil(config.t_end / dt0 / stride - 1e-9) * stride;
    return config.t_end / std::max(stride, n);
}

RunResult run_simulation(const SolverConfig& config, FlowState state, const SnapshotObserver& observer) {
    config.validate();
    RunResult res;
    res.dt = fixed_step(state, config);
    res.steps = res.dt > 0.0 ? static_cast<int>(std::llround(config.t_end / res.dt)) : 0;
    const double t0 = state.time;
    const double hmin = state.grid3.min_spacing();
    int snap = 0;
    auto emit = [&](const FlowState& s) {
        Diagnostics d = diagnostics(s, config);
        res.diagnostics.push_back(d);
        if (observer) observer(snap, s, d);
        ++snap;
        return d;
    };
    emit(state);
    for (int n = 1; n <= res.steps; ++n) {
        auto where = [&] {
            return " at step " + std::to_string(n) + " (t = " + std::to_string(state.time) + ")";
        };
        const double courant = res.dt * signal_speed(state, config) / hmin;
        if (courant > 1.0) throw NumericalError("simulation: Courant number " + std::to_string(courant) + " above 1" + where());
        try {
            state = step_rk4(state, config, res.dt);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + where());
        }
        state.time = t0 + n * res.dt;
        if (state.rho.min() <= 0.0) throw NumericalError("simulation: rho <= 0" + where());
        if (n % config.snapshot_stride == 0 || n == res.steps) {
            const Diagnostics d = emit(state);
            if (d.max_du3_dx3 > kSteepeningLimit)
                throw NumericalError("simulation: |d u3/d x3| = " + std::to_string(d.max_du3_dx3) +
                                     " exceeds the steepening limit" + where());
        }
    }
    res.final_state = std::move(state);
    return res;
}

std::string snapshot_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%04d.rsff", index);
    return buf;
}

RunResult simulate_to_directory(const SolverConfig& config, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    std::ofstream csv(out / "diagnostics.csv");
    if (!csv) throw std::runtime_error("cannot write " + (out / "diagnostics.csv").string());
    csv << kDiagnosticsHeader << '\n';
    return run_simulation(config, initial_state(config), [&](int idx, const FlowState& s, const Diagnostics& d) {
        write_rsff(out / snapshot_name(idx), snapshot_field(s), s.time);
        csv << diagnostics_csv_row(d) << '\n';
    });
}

}  // namespace rsflow
