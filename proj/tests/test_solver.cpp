#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "rsflow/analytic.hpp"
#include "rsflow/derivative.hpp"
#include "rsflow/errors.hpp"
#include "rsflow/rsf.hpp"
#include "rsflow/solver.hpp"

using namespace rsflow;

namespace {

SolverConfig small_config(SolverMode mode) {
    SolverConfig c;
    c.mode = mode;
    c.dims = {16, 16, 8};
    c.t_end = 0.2;
    c.snapshot_stride = 5;
    return c;
}

bool all_zero(const FlowState& k) {
    return k.u_h[0].is_zero() && k.u_h[1].is_zero() && k.u3.is_zero() && k.rho.is_zero();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rsflow_test_solver_" + name);
    std::filesystem::remove_all(p);
    return p;
}

FlowState acoustic_state(int n, double eps) {
    const Grid g({n, 8, 8}, {kTwoPi, kTwoPi, kTwoPi});
    FlowState s = init_random(g, 0, 1, 0.0);
    s.u_h[0] = ScalarField::sample(s.grid2, [eps](std::span<const double> x) { return eps * std::sin(x[0]); });
    return s;
}

}  // namespace

TEST_CASE("config parsing") {
    std::istringstream in(
        "# comment\n"
        "mode = free\n"
        "c=2.0  # sound speed\n"
        "dims = 16\n"
        "length = 1,2,3\n"
        "seed = 42\n");
    const SolverConfig c = parse_config(in);
    CHECK(c.mode == SolverMode::free);
    CHECK(c.c == 2.0);
    CHECK(c.dims == std::vector<int>{16, 16, 16});
    CHECK(c.length == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(c.seed == 42);
    CHECK(c.cfl == 0.4);

    auto bad = [](const char* text) {
        std::istringstream s(text);
        return parse_config(s);
    };
    CHECK_THROWS_AS(bad("colour = red\n"), ContractError);
    CHECK_THROWS_AS(bad("c = 0\n"), ContractError);
    CHECK_THROWS_AS(bad("cfl = 1.0\n"), ContractError);
    CHECK_THROWS_AS(bad("mode = spectral\n"), ContractError);
    CHECK_THROWS_AS(bad("dims = 16,16\n"), ContractError);
    CHECK_THROWS_AS(bad("c = fast\n"), ContractError);
    CHECK_THROWS_AS(bad("just text\n"), ContractError);
    CHECK_THROWS_AS(bad("dims = 4\n"), ContractError);
}

TEST_CASE("extrude and x3_average are inverse on x3-independent data") {
    const Grid g3({8, 10, 12}, {1.0, 2.0, 3.0});
    const Grid g2 = g3.leading(2);
    const ScalarField f = ScalarField::sample(g2, [](std::span<const double> x) { return std::sin(x[0]) + x[1]; });
    const ScalarField e = extrude(f, g3);
    CHECK(partial_derivative(e, 2).is_zero());
    CHECK(max_abs_difference(x3_average(e, g2), f) < 1e-15);
}

TEST_CASE("init_random") {
    const Grid g = Grid::cube(3, 16);
    SUBCASE("amplitude 0 is rest") {
        const FlowState s = init_random(g, 3, 2, 0.0);
        CHECK(s.u_h[0].is_zero());
        CHECK(s.u_h[1].is_zero());
        CHECK(s.u3.is_zero());
        CHECK(s.rho.min() == 1.0);
        CHECK(s.rho.max() == 1.0);
    }
    SUBCASE("deterministic") {
        const FlowState a = init_random(g, 9, 2, 0.1);
        const FlowState b = init_random(g, 9, 2, 0.1);
        CHECK(max_abs_difference(a.u3, b.u3) == 0.0);
        CHECK(max_abs_difference(a.u_h[0], b.u_h[0]) == 0.0);
        CHECK(max_abs_difference(a.rho, b.rho) == 0.0);
        const FlowState c = init_random(g, 10, 2, 0.1);
        CHECK(max_abs_difference(a.u3, c.u3) > 0.0);
    }
    SUBCASE("seed 7: RSF by construction, horizontally compressible") {
        const FlowState s = init_random(g, 7, 2, 0.1);
        CHECK(check_rsf(assemble_velocity(s), zero_pattern(3)) == 0.0);
        CHECK(divergence(s.u_h).max_abs() > 1e-3);
        CHECK(s.u3.max_abs() > 0.0);
        CHECK(partial_derivative(s.u3, 2).max_abs() > 0.0);
        CHECK(s.rho_clipped == 0);
        CHECK(s.rho.grid().dim() == 2);
    }
    SUBCASE("free mode carries a 3D density") {
        const FlowState s = init_random(g, 7, 2, 0.1, SolverMode::free);
        CHECK(s.rho.grid().dim() == 3);
        CHECK(partial_derivative(s.rho, 2).max_abs() > 0.0);
    }
    SUBCASE("large amplitude clips the density") {
        const FlowState s = init_random(g, 7, 2, 5.0);
        CHECK(s.rho_clipped > 0);
        CHECK(s.rho.min() == doctest::Approx(0.2));
    }
    CHECK_THROWS_AS(init_random(g, 1, 0, 0.1), ContractError);
}

TEST_CASE("rest state is an exact fixed point of every mode") {
    for (SolverMode m : {SolverMode::constrained, SolverMode::free}) {
        SolverConfig c = small_config(m);
        c.amplitude = 0.0;
        const FlowState s = initial_state(c);
        CHECK(all_zero(rhs(s, c)));
        const FlowState t = step_rk4(s, c, 0.05);
        CHECK(t.u_h[0].is_zero());
        CHECK(t.u3.is_zero());
        CHECK(t.rho.min() == 1.0);
        CHECK(t.rho.max() == 1.0);
    }
    // kinematic_tg with u3 = 0 has nothing to advect
    SolverConfig c = small_config(SolverMode::kinematic_tg);
    c.amplitude = 0.0;
    const FlowState s = initial_state(c);
    CHECK(all_zero(rhs(s, c)));
    const FlowState t = step_rk4(s, c, 0.05);
    CHECK(t.u3.is_zero());
    CHECK(max_abs_difference(t.u_h[0], s.u_h[0]) == 0.0);
}

TEST_CASE("rhs rejects non-positive density") {
    SolverConfig c = small_config(SolverMode::constrained);
    FlowState s = initial_state(c);
    s.rho[5] = 0.0;
    CHECK_THROWS_AS(rhs(s, c), NumericalError);
}

TEST_CASE("rhs against an independent pointwise evaluation") {
    // Single-mode data: the tendency at each node is recomputed from exact
    // derivatives and compared with the discrete one (truncation only).
    const int n = 64;
    const Grid g({n, n, n}, {kTwoPi, kTwoPi, kTwoPi});
    FlowState s = init_random(g, 0, 1, 0.0);
    s.u_h[0] = ScalarField::sample(s.grid2, [](std::span<const double> x) { return 0.3 * std::sin(x[1]); });
    s.u_h[1] = ScalarField::sample(s.grid2, [](std::span<const double> x) { return 0.2 * std::cos(x[0]); });
    s.rho = ScalarField::sample(s.grid2, [](std::span<const double> x) { return 1.0 + 0.1 * std::cos(x[0] + x[1]); });
    s.u3 = ScalarField::sample(g, [](std::span<const double> x) { return 0.5 * std::sin(x[2]) + 0.1 * std::cos(x[0]); });
    SolverConfig c;
    c.c = 1.5;
    const FlowState k = rhs(s, c);
    double e1 = 0.0, e3 = 0.0, er = 0.0;
    for (std::size_t i = 0; i < s.grid2.size(); ++i) {
        std::array<double, 2> x{};
        s.grid2.node_point(i, x);
        const double u = 0.3 * std::sin(x[1]), v = 0.2 * std::cos(x[0]);
        const double r = 1.0 + 0.1 * std::cos(x[0] + x[1]), r1 = -0.1 * std::sin(x[0] + x[1]);
        const double du1 = -(v * 0.3 * std::cos(x[1])) - c.c * c.c * r1 / r;
        const double drho = -(r1 * u + r1 * v);
        e1 = std::max(e1, std::abs(k.u_h[0][i] - du1));
        er = std::max(er, std::abs(k.rho[i] - drho));
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::array<double, 3> x{};
        g.node_point(i, x);
        const double u = 0.3 * std::sin(x[1]);
        const double w = 0.5 * std::sin(x[2]) + 0.1 * std::cos(x[0]);
        const double du3 = -(u * -0.1 * std::sin(x[0]) + w * 0.5 * std::cos(x[2]));
        e3 = std::max(e3, std::abs(k.u3[i] - du3));
    }
    CHECK(e1 < 1e-5);
    CHECK(er < 1e-5);
    CHECK(e3 < 1e-5);
}

TEST_CASE("acoustic frequency matches ck within 1% at 128 points") {
    const double eps = 1e-4;
    SolverConfig c;
    c.c = 1.0;
    FlowState s = acoustic_state(128, eps);
    const double dt = 0.4 * s.grid3.min_spacing() / (eps + c.c);
    const std::size_t probe = s.grid2.flat_index(std::vector<int>{32, 0});  // x1 = pi/2
    std::vector<double> crossings;
    double prev = s.u_h[0][probe];
    double t = 0.0;
    while (t < 4.0 * kTwoPi && crossings.size() < 7) {
        s = step_rk4(s, c, dt);
        t += dt;
        const double cur = s.u_h[0][probe];
        if ((prev > 0.0) != (cur > 0.0)) crossings.push_back(t - dt * cur / (cur - prev));
        prev = cur;
    }
    REQUIRE(crossings.size() >= 5);
    const double half_period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    const double omega = std::numbers::pi / half_period;
    CHECK(std::abs(omega - c.c * 1.0) / (c.c * 1.0) < 0.01);
}

TEST_CASE("constrained run: mass conserved, RSF pattern exact") {
    SolverConfig c;
    c.mode = SolverMode::constrained;
    c.dims = {64, 64, 8};
    c.t_end = 1.0;
    c.seed = 1;
    c.amplitude = 0.1;
    c.snapshot_stride = 20;
    const RunResult r = run_simulation(c, initial_state(c));
    REQUIRE(r.diagnostics.size() >= 2);
    const double m0 = r.diagnostics.front().mass;
    double drift = 0.0, dev = 0.0;
    for (const auto& d : r.diagnostics) {
        drift = std::max(drift, std::abs(d.mass - m0) / m0);
        dev = std::max(dev, d.rsf_dev);
    }
    CHECK(drift <= 1e-6);
    CHECK(dev <= 1e-12);
    CHECK(r.diagnostics.back().time == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.final_state.rho.min() > 0.0);
}

TEST_CASE("kinematic_tg: steady horizontal field, residual at truncation level") {
    SolverConfig c = small_config(SolverMode::kinematic_tg);
    c.dims = {32, 32, 16};
    c.t_end = 0.5;
    const RunResult r = run_simulation(c, initial_state(c));
    for (const auto& d : r.diagnostics) {
        CHECK(d.energy_h == r.diagnostics.front().energy_h);
        CHECK(d.rsf_dev == 0.0);
    }
    // u_h . grad_h u_h + grad_h Pi for the Taylor-Green pair
    auto residual = [](int n) {
        const Grid g2 = Grid::cube(2, n);
        const VectorField u = analytic_registry("taylor_green_2d", {.dim = 2}).sample(g2);
        const ScalarField p = analytic_registry("taylor_green_pressure", {.dim = 2}).sample(g2)[0];
        double m = 0.0;
        for (int a = 0; a < 2; ++a) {
            ScalarField res = partial_derivative(p, a);
            res += u[0] * partial_derivative(u[a], 0);
            res += u[1] * partial_derivative(u[a], 1);
            m = std::max(m, res.max_abs());
        }
        return m;
    };
    const double r16 = residual(16), r32 = residual(32);
    CHECK(r32 < 1e-3);
    CHECK(std::log2(r16 / r32) > 3.5);
}

TEST_CASE("RK4 self-convergence on the kinematic flow") {
    SolverConfig c = small_config(SolverMode::kinematic_tg);
    c.dims = {16, 16, 16};
    c.amplitude = 0.3;
    const FlowState s0 = initial_state(c);
    const double T = 0.5;
    auto integrate = [&](int steps) {
        FlowState s = s0;
        for (int i = 0; i < steps; ++i) s = step_rk4(s, c, T / steps);
        return s.u3;
    };
    const int n = 8;
    const ScalarField ref = integrate(16 * n);
    const double e1 = max_abs_difference(integrate(n), ref);
    const double e2 = max_abs_difference(integrate(2 * n), ref);
    MESSAGE("errors " << e1 << " " << e2 << " ratio " << e1 / e2);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("free mode logs a nonzero pressure residual") {
    SolverConfig c = small_config(SolverMode::free);
    c.seed = 4;
    c.t_end = 0.1;
    const RunResult r = run_simulation(c, initial_state(c));
    for (const auto& d : r.diagnostics) CHECK(d.pressure_residual > 0.0);
    // mass is conserved by the full 3D flux form as well
    CHECK(std::abs(r.diagnostics.back().mass - r.diagnostics.front().mass) / r.diagnostics.front().mass < 1e-12);
}

TEST_CASE("snapshots are byte-reproducible") {
    SolverConfig c = small_config(SolverMode::constrained);
    c.seed = 11;
    const auto a = scratch_dir("a"), b = scratch_dir("b");
    const RunResult ra = simulate_to_directory(c, a);
    simulate_to_directory(c, b);
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(a)) {
        ++files;
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(files == static_cast<int>(ra.diagnostics.size()) + 1);
    CHECK(std::filesystem::exists(a / "snap_0000.rsff"));
    const std::string csv = slurp(a / "diagnostics.csv");
    CHECK(csv.rfind(std::string(kDiagnosticsHeader) + "\n", 0) == 0);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST_CASE("steepening and Courant guards abort with a message") {
    SolverConfig c = small_config(SolverMode::kinematic_tg);
    c.dims = {16, 16, 16};
    c.amplitude = 3.0;
    c.t_end = 5.0;
    c.snapshot_stride = 1;
    try {
        run_simulation(c, initial_state(c));
        FAIL("expected abort");
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("step") != std::string::npos);
    }
}
