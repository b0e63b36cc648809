#include "rsflow/analytic.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <string>

#include "rsflow/errors.hpp"

namespace rsflow {
namespace {

template <class T>
T phase(std::span<const int> k, std::span<const T> x) {
    T p = 0.0 * x[0];
    for (std::size_t a = 0; a < k.size(); ++a)
        if (k[a] != 0) p += static_cast<double>(k[a]) * x[a];
    return p;
}

}  // namespace

TrigSeries::TrigSeries(int dim, std::vector<TrigMode> modes) : dim_(dim), modes_(std::move(modes)) {
    for (const auto& m : modes_)
        if (static_cast<int>(m.k.size()) != dim_) throw ContractError("TrigSeries: wavevector dimension mismatch");
}

TrigSeries TrigSeries::random_modes(int dim, int depends_on, int kmax, int modes, double amplitude, Rng& rng) {
    if (depends_on < 0) depends_on = dim;
    if (kmax < 1) throw ContractError("TrigSeries: kmax must be >= 1");
    std::vector<TrigMode> out;
    if (depends_on == 0) return TrigSeries(dim, {});
    for (int m = 0; m < modes; ++m) {
        TrigMode mode;
        mode.k.assign(static_cast<std::size_t>(dim), 0);
        bool nonzero = false;
        while (!nonzero) {
            for (int a = 0; a < depends_on; ++a) {
                mode.k[static_cast<std::size_t>(a)] = rng.integer(-kmax, kmax);
                nonzero = nonzero || mode.k[static_cast<std::size_t>(a)] != 0;
            }
        }
        const double amp = rng.uniform(-amplitude, amplitude);
        const double ph = rng.uniform(0.0, kTwoPi);
        mode.cos_coeff = amp * std::cos(ph);
        mode.sin_coeff = -amp * std::sin(ph);
        out.push_back(std::move(mode));
    }
    return TrigSeries(dim, std::move(out));
}

TrigSeries TrigSeries::band_limited(int dim, int depends_on, int kmax, double amplitude, Rng& rng) {
    if (depends_on < 0) depends_on = dim;
    if (kmax < 1) throw ContractError("TrigSeries: kmax must be >= 1");
    std::vector<std::vector<int>> ks;
    std::vector<int> k(static_cast<std::size_t>(dim), 0);
    // Odometer over [-kmax, kmax]^depends_on, keeping the half-space where
    // the first nonzero component is positive.
    for (int a = 0; a < depends_on; ++a) k[static_cast<std::size_t>(a)] = -kmax;
    while (true) {
        int first = 0;
        for (int a = 0; a < depends_on && first == 0; ++a) first = k[static_cast<std::size_t>(a)];
        if (first > 0) ks.push_back(k);
        int a = depends_on - 1;
        while (a >= 0 && k[static_cast<std::size_t>(a)] == kmax) k[static_cast<std::size_t>(a--)] = -kmax;
        if (a < 0) break;
        ++k[static_cast<std::size_t>(a)];
    }
    const double scale = ks.empty() ? 0.0 : amplitude / std::sqrt(static_cast<double>(ks.size()));
    std::vector<TrigMode> modes;
    modes.reserve(ks.size());
    for (auto& kv : ks) {
        TrigMode m;
        m.k = std::move(kv);
        m.cos_coeff = scale * rng.uniform(-1.0, 1.0);
        m.sin_coeff = scale * rng.uniform(-1.0, 1.0);
        modes.push_back(std::move(m));
    }
    return TrigSeries(dim, std::move(modes));
}

double TrigSeries::operator()(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& m : modes_) {
        const double p = phase<double>(m.k, x);
        s += m.cos_coeff * std::cos(p) + m.sin_coeff * std::sin(p);
    }
    return s;
}

Jet TrigSeries::operator()(std::span<const Jet> x) const {
    Jet s = Jet::constant(0.0, x[0].nvar(), x[0].order());
    for (const auto& m : modes_) {
        const Jet p = phase<Jet>(m.k, x);
        s += m.cos_coeff * cos(p) + m.sin_coeff * sin(p);
    }
    return s;
}

ScalarField TrigSeries::sample(const Grid& grid) const {
    if (grid.dim() != dim_) throw ContractError("TrigSeries::sample: grid dimension mismatch");
    ScalarField out(grid);
    std::vector<std::complex<double>> prod, next;
    for (const auto& m : modes_) {
        // exp(i k.x) as an outer product of per-axis exponentials.
        prod.assign(1, {1.0, 0.0});
        for (int a = 0; a < dim_; ++a) {
            const int n = grid.dims(a);
            const int ka = m.k[static_cast<std::size_t>(a)];
            next.resize(prod.size() * static_cast<std::size_t>(n));
            for (std::size_t p = 0; p < prod.size(); ++p)
                for (int i = 0; i < n; ++i) {
                    const double ph = ka * grid.coordinate(a, i);
                    next[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
                        prod[p] * std::complex<double>(std::cos(ph), std::sin(ph));
                }
            prod.swap(next);
        }
        auto v = out.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += m.cos_coeff * prod[i].real() + m.sin_coeff * prod[i].imag();
    }
    return out;
}

AnalyticField::AnalyticField(std::string name, int dim, int ncomp, DoubleEval eval, JetEval jet_eval,
                             GridSampler sampler)
    : name_(std::move(name)),
      dim_(dim),
      ncomp_(ncomp),
      eval_(std::move(eval)),
      jet_eval_(std::move(jet_eval)),
      sampler_(std::move(sampler)) {}

std::vector<double> AnalyticField::evaluate(std::span<const double> point, double t) const {
    if (static_cast<int>(point.size()) != dim_) throw ContractError(name_ + ": point dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(ncomp_));
    eval_(point, t, out);
    return out;
}

std::vector<double> AnalyticField::derivative(std::span<const double> point, double t, int axis) const {
    const auto j = jets(point, t);
    std::vector<double> out(j.size());
    for (std::size_t c = 0; c < j.size(); ++c) out[c] = j[c].gradient(axis);
    return out;
}

std::vector<Jet> AnalyticField::jets(std::span<const double> point, double t) const {
    if (static_cast<int>(point.size()) != dim_) throw ContractError(name_ + ": point dimension mismatch");
    std::vector<Jet> x;
    x.reserve(point.size());
    for (int a = 0; a < dim_; ++a) x.push_back(Jet::variable(point[static_cast<std::size_t>(a)], a, dim_));
    return jets(x, t);
}

std::vector<Jet> AnalyticField::jets(std::span<const Jet> point, double t) const {
    if (static_cast<int>(point.size()) != dim_) throw ContractError(name_ + ": point dimension mismatch");
    std::vector<Jet> out(static_cast<std::size_t>(ncomp_));
    jet_eval_(point, t, out);
    return out;
}

VectorField AnalyticField::sample(const Grid& grid, double t) const {
    if (grid.dim() != dim_) throw ContractError(name_ + ": grid dimension mismatch");
    if (sampler_) return sampler_(grid, t);
    VectorField out(grid, ncomp_);
    std::vector<double> x(static_cast<std::size_t>(dim_)), v(static_cast<std::size_t>(ncomp_));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.node_point(i, x);
        eval_(x, t, v);
        for (int c = 0; c < ncomp_; ++c) out[c][i] = v[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < ncomp_; ++c) out[c].require_finite(name_.c_str());
    return out;
}

namespace {

AnalyticField series_field(std::string name, int dim, std::vector<TrigSeries> comps) {
    const int ncomp = static_cast<int>(comps.size());
    auto shared = std::make_shared<const std::vector<TrigSeries>>(std::move(comps));
    return AnalyticField(
        std::move(name), dim, ncomp,
        [shared](std::span<const double> x, double, std::span<double> out) {
            for (std::size_t c = 0; c < shared->size(); ++c) out[c] = (*shared)[c](x);
        },
        [shared](std::span<const Jet> x, double, std::span<Jet> out) {
            for (std::size_t c = 0; c < shared->size(); ++c) out[c] = (*shared)[c](x);
        },
        [shared, dim](const Grid& grid, double) {
            if (grid.dim() != dim) throw ContractError("series field: grid dimension mismatch");
            std::vector<ScalarField> cs;
            for (const auto& s : *shared) cs.push_back(s.sample(grid));
            return VectorField(grid, std::move(cs));
        });
}

// Exact ideal Euler solutions whose velocity gradient has the real Schur
// zero pattern. The horizontal part is steady Taylor-Green with
// streamfunction psi = sin x1 sin x2; the remaining components are
// functions of psi (steady, since u_h . grad psi = 0) or sheared profiles
// A(x_j - t G(psi)) carried by u_j = G(psi), so every component satisfies
// D_t u = -grad Pi with the two-dimensional Taylor-Green pressure.
template <class T>
void rsf_shear_eval(int dim, std::span<const T> x, double t, std::span<T> out) {
    const T s1 = sin(x[0]), c1 = cos(x[0]), s2 = sin(x[1]), c2 = cos(x[1]);
    const T psi = s1 * s2;
    out[0] = s1 * c2;
    out[1] = -(c1 * s2);
    const T g = 0.5 * psi + 0.25;
    if (dim == 3) {
        out[2] = g;
        return;
    }
    if (dim == 4) {
        out[2] = g;
        out[3] = 0.5 * sin(x[2] - t * g);
        return;
    }
    const T k = -0.3 * psi + 0.1;
    out[2] = g;
    out[3] = k;
    out[4] = 0.5 * sin(x[2] - t * g) + 0.3 * cos(x[3] - t * k);
}

}  // namespace

AnalyticField analytic_registry(std::string_view name, const AnalyticParams& p) {
    const int dim = p.dim;
    const int ncomp = p.ncomp < 0 ? dim : p.ncomp;
    const int depends = p.depends_on < 0 ? dim : p.depends_on;
    if (name == "taylor_green_2d") {
        if (dim < 2) throw ContractError("taylor_green_2d needs dim >= 2");
        return AnalyticField::from_generic(std::string(name), dim, 2, [](auto x, double, auto out) {
            out[0] = sin(x[0]) * cos(x[1]);
            out[1] = -(cos(x[0]) * sin(x[1]));
        });
    }
    if (name == "taylor_green_pressure") {
        if (dim < 2) throw ContractError("taylor_green_pressure needs dim >= 2");
        return AnalyticField::from_generic(std::string(name), dim, 1, [](auto x, double, auto out) {
            out[0] = 0.25 * (cos(2.0 * x[0]) + cos(2.0 * x[1]));
        });
    }
    if (name == "rigid_rotation") {
        if (dim < 2) throw ContractError("rigid_rotation needs dim >= 2");
        const double amp = p.amplitude;
        return AnalyticField::from_generic(std::string(name), dim, dim, [amp](auto x, double, auto out) {
            out[0] = -amp * sin(x[1]);
            out[1] = amp * sin(x[0]);
            for (std::size_t c = 2; c < out.size(); ++c) out[c] = 0.0 * x[0];
        });
    }
    if (name == "trig_random") {
        Rng rng(p.seed, 1);
        std::vector<TrigSeries> comps;
        for (int c = 0; c < ncomp; ++c)
            comps.push_back(TrigSeries::random_modes(dim, depends, p.kmax, p.modes, p.amplitude, rng));
        return series_field(std::string(name), dim, std::move(comps));
    }
    if (name == "band_limited_random") {
        Rng rng(p.seed, 2);
        std::vector<TrigSeries> comps;
        for (int c = 0; c < ncomp; ++c)
            comps.push_back(TrigSeries::band_limited(dim, depends, p.kmax, p.amplitude, rng));
        return series_field(std::string(name), dim, std::move(comps));
    }
    if (name == "rsf_shear") {
        if (dim < 3 || dim > 5) throw ContractError("rsf_shear is defined for 3 <= dim <= 5");
        return AnalyticField::from_generic(std::string(name), dim, dim, [dim](auto x, double t, auto out) {
            rsf_shear_eval(dim, x, t, out);
        });
    }
    throw ContractError("analytic_registry: unknown field '" + std::string(name) + "'");
}

}  // namespace rsflow
