// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "rsflow/errors.hpp"
#include "rsflow/rsf.hpp"
#include "rsflow/rsff_io.hpp"
#include "rsflow/solver.hpp"
#include "rsflow/verify.hpp"

using namespace rsflow;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / "rsflow_acceptance";
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------- 1

Outcome plan_criterion() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (int d = 3; d <= 12; ++d) {
        const DecompPlan p = decomposition_plan(d);
        ok = ok && p.M == (d + 1) / 2 && p.M <= d * (d - 1) / 2 && static_cast<int>(p.pairs.size()) == p.M;
        for (int i = 0; i < p.M; ++i) {
            const AxisPair& a = p.pairs[static_cast<std::size_t>(i)];
            ok = ok && a.first == 2 * i;
            if (2 * i + 1 < d)
                ok = ok && a.second && *a.second == 2 * i + 1;
            else
                ok = ok && !a.second;
        }
    }
    const double s = seconds_since(t0);
    return {ok && s < 1.0, fmt("d=3..12, M=floor((d+1)/2), pairs (2i-1,2i); %.4f s", s)};
}

// ---------------------------------------------------------------- 2

Outcome identity_criterion() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> dims = {3, 4, 5, 6, 7, 8};
    const IdentitySuite s = identity_suite(dims, 20);
    const double t = seconds_since(t0);
    return {s.max_discrepancy <= 1e-12 && t < 60.0,
            fmt("%zu rows, max discrepancy %.3e (<= 1e-12); %.1f s", s.rows.size(), s.max_discrepancy, t)};
}

// ---------------------------------------------------------------- 3, 6

FrozenOptions frozen_options() {
    FrozenOptions o;
    o.config.mode = SolverMode::kinematic_tg;
    o.config.t_end = 1.0;
    o.config.kmax = 1;
    o.config.seed = 1;
    o.config.amplitude = 0.1;
    o.snapshot_stride = 4;
    o.substeps_per_n = 8;
    return o;
}

Outcome frozen_criterion(const VerificationReport& rep, double seconds) {
    const FrozenRun& fine = rep.runs.back();
    bool ok = seconds <= 600.0;
    std::string orders;
    for (const auto& f : rep.fits) {
        ok = ok && !f.below_floor && f.order() >= 2.5;
        orders += fmt(" %.2f", f.order());
    }
    for (const auto& c : fine.components) ok = ok && c.l2 <= 1e-4 && c.l2_rel <= 1e-4;
    return {ok, fmt("orders (Omega_h, Omega-Omega_h):%s (>= 2.5); N=128 L2 %.2e, %.2e, normalized %.2e, %.2e (<= 1e-4); %.0f s",
                    orders.c_str(), fine.components[0].l2, fine.components[1].l2, fine.components[0].l2_rel,
                    fine.components[1].l2_rel, seconds)};
}

Outcome negative_criterion(const FrozenRun& positive) {
    FrozenOptions o = frozen_options();
    o.wrong_velocity = true;
    const FrozenRun wrong = frozen_in_run(positive.N, o);
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < wrong.components.size(); ++i)
        ratio = std::min(ratio, wrong.components[i].l2_rel / positive.components[i].l2_rel);
    ratio = std::min(ratio, wrong.total.l2_rel / positive.total.l2_rel);

    double lemma_ratio = std::numeric_limits<double>::infinity();
    for (int d = 3; d <= 8; ++d)
        for (int k = 1; k < d; ++k)
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const double good = lemma1_check(d, k, seed);
                const double bad = lemma1_check(d, k, seed, LemmaMode::inject_violation);
                // an exactly zero positive case makes any nonzero violation infinitely larger
                const double r = good > 0.0 ? bad / good : (bad > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
                lemma_ratio = std::min(lemma_ratio, r);
            }
    return {ratio >= 1e3 && lemma_ratio >= 1e3,
            fmt("wrong-velocity/positive at N=%d: min ratio %.2e; lemma violation/positive: min ratio %.2e (>= 1e3)",
                positive.N, ratio, lemma_ratio)};
}

// ---------------------------------------------------------------- 4

Outcome linearity_criterion() {
    double worst = 0.0;
    std::size_t samples = 0;
    // solver history, d = 3
    SolverConfig c;
    c.mode = SolverMode::kinematic_tg;
    c.dims = {32, 32, 32};
    c.t_end = 0.5;
    c.kmax = 1;
    c.seed = 1;
    c.snapshot_stride = 2;
    VelocityHistory h;
    run_simulation(c, initial_state(c), [&](int, const FlowState& s, const Diagnostics&) { h.push(s.time, assemble_velocity(s)); });
    {
        const ResidualReport r = residual_pde(h, component_series(h, decomposition_plan(3)));
        worst = std::max(worst, r.max_linearity);
        samples += r.linearity.size();
    }
    // analytic histories in higher dimensions, and random (non-component) pairs
    for (int d : {4, 5}) {
        std::vector<int> dims(static_cast<std::size_t>(d), 12);
        dims[3] = 8;
        if (d == 5) dims[4] = 8;
        const Grid g(dims);
        const VelocityHistory hd = analytic_history(analytic_registry("rsf_shear", {.dim = d}), g, 0.2, 0.05, 4);
        const ResidualReport r = residual_pde(hd, component_series(hd, decomposition_plan(d)));
        worst = std::max(worst, r.max_linearity);
        samples += r.linearity.size();
    }
    {
        const Grid g = Grid::cube(3, 16);
        const VelocityHistory hr = analytic_history(analytic_registry("trig_random", {.dim = 3, .seed = 5}), g, 0.0, 0.1, 4);
        std::vector<std::vector<KForm>> pair(2);
        for (std::size_t k = 0; k < hr.count(); ++k)
            for (std::uint64_t i = 0; i < 2; ++i) {
                const VectorField v = analytic_registry("trig_random", {.dim = 3, .seed = 40 + i}).sample(g, hr.time(k));
                pair[i].push_back(exterior_derivative(form_from_velocity(v)));
            }
        const ResidualReport r = residual_pde(hr, pair);
        worst = std::max(worst, r.max_linearity);
        samples += r.linearity.size();
    }
    return {worst <= 1e-12, fmt("%zu snapshots, max relative |res(sum) - sum res| %.3e (<= 1e-12)", samples, worst)};
}

// ---------------------------------------------------------------- 5

Outcome wedge_criterion() {
    // snapshot spacing 4/N^2 keeps the O(dt^2) and O(h^4) parts at the same order
    const AnalyticField u = analytic_registry("rsf_shear", {.dim = 4});
    const std::vector<int> N = {16, 32, 64};
    std::vector<double> leibniz, direct, factor;
    bool bound = true;
    for (int n : N) {
        const Grid g({n, n, n, 8});
        const VelocityHistory h = analytic_history(u, g, 0.5, 4.0 / (n * n), 3);
        const WedgeReport r = wedge_invariants(h, decomposition_plan(4));
        if (r.trivial || r.samples.empty()) return {false, "wedge report unexpectedly trivial"};
        double l = 0.0, w = 0.0, f = 0.0;
        for (const auto& s : r.samples) {
            bound = bound && s.leibniz <= s.bound * (1.0 + 1e-12);
            l = std::max(l, s.leibniz);
            w = std::max(w, s.direct);
            f = std::max({f, s.residual_i, s.residual_j});
        }
        leibniz.push_back(l);
        direct.push_back(w);
        factor.push_back(f);
    }
    const ConvergenceFit fl = fit_order(N, leibniz), fd = fit_order(N, direct), ff = fit_order(N, factor);
    const bool orders = !fl.below_floor && !fd.below_floor && !ff.below_floor &&
                        std::abs(fl.order() - ff.order()) <= 0.5 && std::abs(fd.order() - ff.order()) <= 0.5;
    return {bound && orders,
            fmt("Leibniz bound %s on every snapshot; wedge order %.2f (expanded), %.2f (direct) vs factor order %.2f "
                "(within 0.5)",
                bound ? "holds" : "violated", fl.order(), fd.order(), ff.order())};
}

// ---------------------------------------------------------------- 7

bool same_files(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::directory_iterator(a)) fa.push_back(e.path().filename());
    for (const auto& e : fs::directory_iterator(b)) fb.push_back(e.path().filename());
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb || fa.empty()) return false;
    for (const auto& n : fa) {
        std::ifstream x(a / n, std::ios::binary), y(b / n, std::ios::binary);
        const std::string sx{std::istreambuf_iterator<char>(x), {}}, sy{std::istreambuf_iterator<char>(y), {}};
        if (sx != sy) return false;
    }
    return true;
}

Outcome health_criterion() {
    // rest state
    bool rest = true;
    for (SolverMode m : {SolverMode::constrained, SolverMode::free, SolverMode::kinematic_tg}) {
        SolverConfig c;
        c.mode = m;
        c.dims = {16, 16, 16};
        c.amplitude = 0.0;
        c.t_end = 0.5;
        c.snapshot_stride = 100;
        FlowState s0 = initial_state(c);
        if (m == SolverMode::kinematic_tg)
            for (int a = 0; a < 2; ++a) s0.u_h[a] = ScalarField(s0.grid2, 0.0);
        const RunResult r = run_simulation(c, s0);
        const FlowState& s1 = r.final_state;
        for (int a = 0; a < 2; ++a) rest = rest && max_abs_difference(s1.u_h[a], s0.u_h[a]) == 0.0;
        rest = rest && max_abs_difference(s1.u3, s0.u3) == 0.0 && max_abs_difference(s1.rho, s0.rho) == 0.0;
    }
    // mass drift on a 64^2 constrained run
    SolverConfig mc;
    mc.mode = SolverMode::constrained;
    mc.dims = {64, 64, 8};
    mc.t_end = 1.0;
    mc.seed = 1;
    mc.snapshot_stride = 10;
    const RunResult mr = run_simulation(mc, initial_state(mc));
    const double m0 = mr.diagnostics.front().mass;
    double drift = 0.0;
    for (const auto& d : mr.diagnostics) drift = std::max(drift, std::abs(d.mass - m0) / m0 / std::max(d.time, 1e-300));
    // acoustic frequency at 128 points
    const double eps = 1e-4;
    SolverConfig ac;
    const Grid g({128, 8, 8});
    FlowState s = init_random(g, 0, 1, 0.0);
    s.u_h[0] = ScalarField::sample(s.grid2, [eps](std::span<const double> x) { return eps * std::sin(x[0]); });
    const double dt = 0.4 * g.min_spacing() / (eps + ac.c);
    const std::size_t probe = s.grid2.flat_index(std::vector<int>{32, 0});
    std::vector<double> crossings;
    double prev = s.u_h[0][probe], t = 0.0;
    while (t < 4.0 * kTwoPi && crossings.size() < 7) {
        s = step_rk4(s, ac, dt);
        t += dt;
        const double cur = s.u_h[0][probe];
        if ((prev > 0.0) != (cur > 0.0)) crossings.push_back(t - dt * cur / (cur - prev));
        prev = cur;
    }
    double freq_err = 1.0;
    if (crossings.size() >= 3) {
        const double half = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
        freq_err = std::abs(std::numbers::pi / half - ac.c) / ac.c;
    }
    // byte reproducibility
    SolverConfig rc;
    rc.mode = SolverMode::constrained;
    rc.dims = {24, 24, 24};
    rc.t_end = 0.5;
    rc.seed = 11;
    rc.snapshot_stride = 3;
    const fs::path a = scratch_dir() / "repro_a", b = scratch_dir() / "repro_b";
    fs::remove_all(a);
    fs::remove_all(b);
    simulate_to_directory(rc, a);
    simulate_to_directory(rc, b);
    const bool repro = same_files(a, b);
    fs::remove_all(a);
    fs::remove_all(b);
    const bool ok = rest && drift <= 1e-6 && freq_err <= 0.01 && repro;
    return {ok, fmt("rest exact: %s; mass drift %.2e /unit time (<= 1e-6); acoustic frequency error %.3f%% (<= 1%%); "
                    "byte-reproducible: %s",
                    rest ? "yes" : "no", drift, 100.0 * freq_err, repro ? "yes" : "no")};
}

// ---------------------------------------------------------------- 8

/// Largest difference between any x3 slice of component c and the first slice.
double cross_slice_deviation(const VectorField& f, int c) {
    const Grid& g = f.grid();
    const std::size_t n3 = static_cast<std::size_t>(g.dims(2));
    const std::size_t planes = g.size() / n3;
    const auto& v = f[c].values();
    double dev = 0.0;
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t k = 1; k < n3; ++k) dev = std::max(dev, std::abs(v[p * n3 + k] - v[p * n3]));
    return dev;
}

Outcome slice_criterion() {
    SolverConfig c;
    c.mode = SolverMode::constrained;
    c.dims = {64, 64, 64};
    c.t_end = 1.0;
    c.seed = 2024;
    c.snapshot_stride = 1000;
    const fs::path dir = scratch_dir() / "slices";
    fs::remove_all(dir);
    simulate_to_directory(c, dir);
    std::vector<fs::path> snaps;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".rsff") snaps.push_back(e.path());
    std::sort(snaps.begin(), snaps.end());
    const FieldFile last = read_rsff(snaps.back());
    const double d1 = cross_slice_deviation(last.field, 0), d2 = cross_slice_deviation(last.field, 1);
    const double d3 = cross_slice_deviation(last.field, 2), a3 = last.field[2].max_abs();
    fs::remove_all(dir);
    const bool ok = d1 <= 1e-12 && d2 <= 1e-12 && d3 >= 1e-2 * a3;
    return {ok, fmt("64^3 constrained at t=%.2f: u1, u2 cross-slice %.1e, %.1e (<= 1e-12); u3 %.2e = %.2f of max|u3| (>= 0.01)",
                    last.time, d1, d2, d3, d3 / a3)};
}

// ---------------------------------------------------------------- 9

Outcome canonical_criterion() {
    double worst = 0.0;
    for (int d = 2; d <= 8; ++d) {
        const RoundTrip r = canonical_round_trip(d, 100, 7);
        worst = std::max({worst, r.rate_error, r.defect});
    }
    return {worst <= 1e-10, fmt("d=2..8, 100 trials each: worst rate/structure error %.3e (<= 1e-10)", worst)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int k, const char* name, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[criterion %d] %s %s: %s\n", k, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };

    report(1, "decomposition plan", plan_criterion);
    report(2, "identity suite", identity_criterion);

    VerificationReport study;
    double study_seconds = 0.0;
    report(3, "frozen-in convergence", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<int> N = {32, 64, 128};
        study = convergence_study(frozen_options(), N);
        study_seconds = seconds_since(t0);
        return frozen_criterion(study, study_seconds);
    });
    report(4, "operator linearity", linearity_criterion);
    report(5, "wedge invariants (d=4)", wedge_criterion);
    report(6, "negative controls", [&] {
        if (study.runs.size() < 2) return Outcome{false, "no positive run available"};
        return negative_criterion(study.runs[1]);
    });
    report(7, "solver health", health_criterion);
    report(8, "2D/3D slice structure", slice_criterion);
    report(9, "canonical round trip", canonical_criterion);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
