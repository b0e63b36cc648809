#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rsflow/analytic.hpp"
#include "rsflow/derivative.hpp"
#include "rsflow/errors.hpp"
#include "rsflow/interpolate.hpp"
#include "rsflow/rsff_io.hpp"

using namespace rsflow;

namespace {

double max_error(const ScalarField& f, double (*exact)(std::span<const double>)) {
    double e = 0.0;
    std::vector<double> x(static_cast<std::size_t>(f.grid().dim()));
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.grid().node_point(i, x);
        e = std::max(e, std::abs(f[i] - exact(x)));
    }
    return e;
}

// Divergence written against raw index arithmetic, independent of the
// library's stencil loops.
ScalarField reference_divergence(const VectorField& u) {
    const Grid& g = u.grid();
    ScalarField out(g);
    std::vector<int> idx(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.unravel(i, idx);
        double s = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            auto at = [&](int off) {
                auto j = idx;
                j[static_cast<std::size_t>(a)] += off;
                return u[a][g.flat_index(j)];
            };
            s += (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * g.spacing(a));
        }
        out[i] = s;
    }
    return out;
}

}  // namespace

TEST_CASE("grid invariants") {
    Grid g({8, 16, 32});
    CHECK(g.size() == 8u * 16u * 32u);
    for (int a = 0; a < 3; ++a) CHECK(g.spacing(a) == doctest::Approx(kTwoPi / g.dims(a)));
    CHECK(g.stride(0) == 16u * 32u);
    CHECK_THROWS_AS(Grid({8, 7}), ContractError);
    std::vector<int> idx{-1, 17, 32};
    CHECK(g.flat_index(idx) == g.flat_index(std::vector<int>{7, 1, 0}));
}

TEST_CASE("partial_derivative of sin converges at fourth order") {
    auto err = [](int n) {
        const ScalarField f = ScalarField::sample(Grid::cube(1, n), [](auto x) { return std::sin(x[0]); });
        return max_error(partial_derivative(f, 0), [](std::span<const double> x) { return std::cos(x[0]); });
    };
    const double e64 = err(64), e128 = err(128);
    CHECK(e64 <= 1e-5);
    CHECK(e64 / e128 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("partial_derivative exact zeros") {
    const Grid g = Grid::cube(2, 16);
    const ScalarField c(g, 3.25);
    CHECK(partial_derivative(c, 0).max_abs() == 0.0);
    CHECK(partial_derivative(c, 1, Scheme::order2).max_abs() == 0.0);
    const ScalarField bump = ScalarField::sample(g, [](auto x) { return std::pow(std::sin(0.5 * x[0]), 2); });
    CHECK(partial_derivative(bump, 1).max_abs() == 0.0);
    CHECK_THROWS_AS(partial_derivative(bump, 2), ContractError);
    CHECK_THROWS_AS(partial_derivative(bump, -1), ContractError);
}

TEST_CASE("product of sinusoids: fourth-order convergence") {
    auto err = [](int n) {
        const ScalarField f =
            ScalarField::sample(Grid::cube(2, n), [](auto x) { return std::sin(2.0 * x[0]) * std::cos(x[1]); });
        return max_error(partial_derivative(f, 0),
                         [](std::span<const double> x) { return 2.0 * std::cos(2.0 * x[0]) * std::cos(x[1]); });
    };
    const double r = err(32) / err(64);
    CHECK(r == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("partial derivatives commute on band-limited fields") {
    for (auto [d, kmax] : {std::pair{2, 4}, std::pair{3, 2}}) {
        AnalyticParams p;
        p.dim = d;
        p.ncomp = 1;
        p.kmax = kmax;
        p.seed = 11;
        const ScalarField f = analytic_registry("band_limited_random", p).sample(Grid::cube(d, 64))[0];
        const ScalarField ab = partial_derivative(partial_derivative(f, 0), 1);
        const ScalarField ba = partial_derivative(partial_derivative(f, 1), 0);
        CHECK(max_abs_difference(ab, ba) <= 1e-8);
    }
}

TEST_CASE("gradient_tensor layout: row is the derivative direction") {
    const Grid g = Grid::cube(2, 64);
    const VectorField u = analytic_registry("rigid_rotation", {.dim = 2}).sample(g);
    const TensorField G = gradient_tensor(u);
    CHECK(max_error(G(0, 1), [](std::span<const double> x) { return std::cos(x[0]); }) <= 1e-5);
    CHECK(max_error(G(1, 0), [](std::span<const double> x) { return -std::cos(x[1]); }) <= 1e-5);
    CHECK(G(0, 0).max_abs() == 0.0);
    CHECK(G(1, 1).max_abs() == 0.0);

    const VectorField c(g, {ScalarField(g, 1.0), ScalarField(g, -2.0)});
    CHECK(gradient_tensor(c).max_abs() == 0.0);
    CHECK_THROWS_AS(gradient_tensor(VectorField(Grid::cube(3, 8), 2)), ContractError);
}

TEST_CASE("trace of the gradient tensor equals an independent divergence") {
    const Grid g = Grid::cube(3, 16);
    const VectorField u = analytic_registry("band_limited_random", {.dim = 3, .seed = 5, .kmax = 2}).sample(g);
    const TensorField G = gradient_tensor(u);
    const ScalarField trace = G(0, 0) + G(1, 1) + G(2, 2);
    const ScalarField ref = reference_divergence(u);
    CHECK(max_abs_difference(trace, ref) <= 1e-12 * std::max(1.0, ref.max_abs()));
    CHECK(max_abs_difference(divergence(u), ref) <= 1e-12 * std::max(1.0, ref.max_abs()));
}

TEST_CASE("divergence examples") {
    const Grid g = Grid::cube(3, 32);
    const VectorField u(g, {ScalarField::sample(g, [](auto x) { return std::sin(x[0]); }), ScalarField(g),
                            ScalarField(g)});
    CHECK(max_error(divergence(u), [](std::span<const double> x) { return std::cos(x[0]); }) <= 1e-4);
    const VectorField c(g, {ScalarField(g, 1.0), ScalarField(g, 2.0), ScalarField(g, 3.0)});
    CHECK(divergence(c).max_abs() == 0.0);

    // (-d2 psi, d1 psi) is solenoidal; discrete operators along different axes commute.
    const Grid g2 = Grid::cube(2, 32);
    const ScalarField psi = ScalarField::sample(g2, [](auto x) { return std::sin(x[0]) * std::cos(2 * x[1]); });
    const VectorField w(g2, {-partial_derivative(psi, 1), partial_derivative(psi, 0)});
    CHECK(divergence(w).max_abs() <= 1e-12);
    CHECK_THROWS_AS(divergence(VectorField(g, 2)), ContractError);
}

TEST_CASE("interpolation") {
    const Grid g = Grid::cube(2, 64);
    const ScalarField f = ScalarField::sample(g, [](auto x) { return std::sin(x[0]) + 0.5 * std::cos(3 * x[1]); });
    std::vector<double> x(2);
    for (std::size_t i = 0; i < g.size(); i += 37) {
        g.node_point(i, x);
        CHECK(interpolate(f, x) == f[i]);
    }
    const ScalarField s = ScalarField::sample(g, [](auto y) { return std::sin(y[0]); });
    double worst = 0.0;
    for (double p : {0.1, 1.234, 2.9, 4.4444, 6.2}) {
        const std::vector<double> pt{p, 0.77};
        worst = std::max(worst, std::abs(interpolate(s, pt) - std::sin(p)));
    }
    CHECK(worst <= 1e-5);
    const std::vector<double> inside{1.3, 2.1}, outside{1.3 + 3 * kTwoPi, 2.1 - kTwoPi};
    CHECK(interpolate(f, outside) == doctest::Approx(interpolate(f, inside)).epsilon(1e-12));

    // exact for per-axis cubics on the stencil (polynomial in the local coordinate)
    const ScalarField lin = ScalarField::sample(Grid::cube(1, 16), [](auto y) { return 2.0 * y[0]; });
    const std::vector<double> q{3.0};
    CHECK(interpolate(lin, q) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("interpolation order: nearest is first order, lagrange4 is fourth") {
    auto err = [](int n, Interpolation scheme) {
        const ScalarField f = ScalarField::sample(Grid::cube(1, n), [](auto x) { return std::sin(x[0]); });
        double e = 0.0;
        for (int k = 0; k < 200; ++k) {
            const std::vector<double> p{0.0314159 * k + 0.013};
            e = std::max(e, std::abs(interpolate(f, p, scheme) - std::sin(p[0])));
        }
        return e;
    };
    CHECK(std::log2(err(32, Interpolation::lagrange4) / err(64, Interpolation::lagrange4)) > 3.5);
    CHECK(std::log2(err(32, Interpolation::nearest) / err(64, Interpolation::nearest)) ==
          doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("analytic registry: Taylor-Green") {
    const AnalyticField tg = analytic_registry("taylor_green_2d");
    const std::vector<double> origin{0.0, 0.0};
    const auto v = tg.evaluate(origin);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);

    const std::vector<double> pts[] = {{0.3, 1.9}, {2.2, 4.1}, {5.5, 0.01}};
    for (const auto& p : pts) {
        const auto j = tg.jets(p);
        CHECK(std::abs(j[0].gradient(0) + j[1].gradient(1)) <= 1e-15);
        // steady Euler: u . grad u + grad Pi = 0
        std::vector<Jet> xj{Jet::variable(p[0], 0, 2), Jet::variable(p[1], 1, 2)};
        const Jet pi = taylor_green_pressure<Jet>(xj);
        for (int c = 0; c < 2; ++c) {
            const double adv = j[0].value() * j[c].gradient(0) + j[1].value() * j[c].gradient(1);
            CHECK(std::abs(adv + pi.gradient(c)) <= 1e-15);
        }
    }
    CHECK_THROWS_AS(analytic_registry("no_such_field"), ContractError);
}

TEST_CASE("analytic derivative evaluators agree with finite differences at order >= 3.5") {
    const AnalyticField f = analytic_registry("trig_random", {.dim = 3, .seed = 3, .kmax = 2});
    auto err = [&](int n) {
        const Grid g = Grid::cube(3, n);
        const VectorField s = f.sample(g);
        double e = 0.0;
        std::vector<double> x(3);
        for (int axis = 0; axis < 3; ++axis) {
            const ScalarField d = partial_derivative(s[1], axis);
            for (std::size_t i = 0; i < g.size(); i += 7) {
                g.node_point(i, x);
                e = std::max(e, std::abs(d[i] - f.derivative(x, 0.0, axis)[1]));
            }
        }
        return e;
    };
    const double e16 = err(16), e32 = err(32), e64 = err(64);
    CHECK(std::log2(e16 / e32) >= 3.5);
    CHECK(std::log2(e32 / e64) >= 3.5);
}

TEST_CASE("jets: chain rule and order tracking") {
    const Jet x = Jet::variable(0.7, 0, 2);
    const Jet y = Jet::variable(-0.4, 1, 2);
    const Jet f = sin(x * y);
    CHECK(f.gradient(0) == doctest::Approx(std::cos(0.7 * -0.4) * -0.4));
    CHECK(f.hessian(0, 1) == doctest::Approx(std::cos(0.28) - 0.28 * std::sin(0.28)));
    const Jet fx = derivative(f, 0);
    CHECK(fx.order() == 1);
    CHECK_THROWS_AS(derivative(derivative(fx, 0), 1), ContractError);
}

TEST_CASE("RSFF round trip and malformed input") {
    const Grid g({8, 10}, {1.0, 2.5});
    const VectorField u = analytic_registry("band_limited_random", {.dim = 2, .ncomp = 3, .seed = 9}).sample(g);
    std::stringstream buf;
    write_rsff(buf, u, 0.125);
    const std::string bytes = buf.str();
    CHECK(bytes.substr(0, 4) == "RSFF");
    CHECK(bytes.size() == 4 + 4 * 3 + 4 * 2 + 8 * 2 + 8 + 3 * 80 * 8);
    const FieldFile back = read_rsff(buf);
    CHECK(back.time == 0.125);
    CHECK(back.field.grid() == g);
    for (int c = 0; c < 3; ++c) CHECK(max_abs_difference(back.field[c], u[c]) == 0.0);

    std::stringstream bad("RSFX....");
    CHECK_THROWS_AS(read_rsff(bad), ContractError);
    std::stringstream truncated(bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(read_rsff(truncated), ContractError);
}
