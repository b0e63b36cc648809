#include "rsflow/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rsflow/derivative.hpp"
#include "rsflow/errors.hpp"
#include "rsflow/rsff_io.hpp"

namespace rsflow {

// ---------------------------------------------------------------- history

void VelocityHistory::push(double time, VectorField u) {
    if (u.ncomp() != u.grid().dim()) throw ContractError("VelocityHistory: velocity needs d components");
    const std::size_t n = count();
    if (n == 0) {
        grid_ = u.grid();
        t_first_ = time;
    } else {
        require_same_grid(u.grid(), grid_, "VelocityHistory");
        if (n == 1) {
            spacing_ = time - t_first_;
            if (!(spacing_ > 0.0)) throw ContractError("VelocityHistory: times must increase");
        } else if (std::abs(time - this->time(n)) > 1e-9 * spacing_) {
            throw ContractError("VelocityHistory: snapshot spacing is not uniform");
        }
    }
    snaps_.push_back({time, std::move(u)});
}

const VelocitySnapshot& VelocityHistory::operator[](std::size_t index) const {
    if (index < first_ || index >= count())
        throw ContractError("VelocityHistory: snapshot " + std::to_string(index) + " is not retained");
    return snaps_[index - first_];
}

std::size_t VelocityHistory::index_of(double t) const {
    if (empty()) throw ContractError("VelocityHistory: empty");
    if (count() == 1) {
        if (t == t_first_) return 0;
        throw ContractError("VelocityHistory: no snapshot at the requested time");
    }
    const double s = (t - t_first_) / spacing_;
    const double r = std::nearbyint(s);
    if (std::abs(s - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(count()))
        throw ContractError("VelocityHistory: no snapshot at the requested time");
    return static_cast<std::size_t>(r);
}

void VelocityHistory::release_before(std::size_t index) {
    while (first_ < index && !snaps_.empty()) {
        snaps_.pop_front();
        ++first_;
    }
}

VelocityHistory analytic_history(const AnalyticField& u, const Grid& grid, double t_start, double spacing, int count) {
    if (u.ncomp() != grid.dim()) throw ContractError("analytic_history: velocity needs d components");
    VelocityHistory h;
    for (int k = 0; k < count; ++k) {
        const double t = t_start + k * spacing;
        h.push(t, u.sample(grid, t));
    }
    return h;
}

VelocityHistory load_snapshot_history(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ContractError("snapshot directory " + dir.string() + " not found");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.starts_with("snap_") && e.path().extension() == ".rsff") files.push_back(e.path());
    }
    if (files.empty()) throw ContractError("no snap_*.rsff files in " + dir.string());
    std::sort(files.begin(), files.end());
    VelocityHistory h;
    for (const auto& f : files) {
        FieldFile ff = read_rsff(f);
        const int d = ff.field.grid().dim();
        if (ff.field.ncomp() < d) throw ContractError(f.string() + ": fewer components than dimensions");
        std::vector<ScalarField> comps(ff.field.components().begin(), ff.field.components().begin() + d);
        h.push(ff.time, VectorField(ff.field.grid(), std::move(comps)));
    }
    return h;
}

TimeStencil time_stencil(double t, double t_first, double spacing, std::size_t nsnap) {
    TimeStencil ts;
    if (nsnap == 0) throw ContractError("time_stencil: no snapshots");
    if (nsnap == 1) {
        ts.count = 1;
        ts.weight[0] = 1.0;
        return ts;
    }
    const double s = (t - t_first) / spacing;
    const auto last = static_cast<long>(nsnap) - 2;
    const long k = std::clamp(static_cast<long>(std::floor(s)), 0L, last);
    ts.count = static_cast<int>(std::min<std::size_t>(4, nsnap));
    const long first = std::clamp(k - 1, 0L, static_cast<long>(nsnap) - ts.count);
    ts.first = static_cast<std::size_t>(first);
    const double x = s - static_cast<double>(first);
    for (int j = 0; j < ts.count; ++j) {
        double w = 1.0;
        for (int i = 0; i < ts.count; ++i)
            if (i != j) w *= (x - i) / static_cast<double>(j - i);
        ts.weight[static_cast<std::size_t>(j)] = w;
    }
    return ts;
}

// ---------------------------------------------------------------- flow map

FlowMapIntegrator::FlowMapIntegrator(double t0, double t1, int steps, Interpolation scheme)
    : t0_(t0), t1_(t1), steps_(steps), scheme_(scheme) {
    if (steps < 1) throw ContractError("FlowMapIntegrator: steps must be >= 1");
    if (!(t1 >= t0)) throw ContractError("FlowMapIntegrator: t1 must be >= t0");
}

void FlowMapIntegrator::init_particles(const Grid& g) {
    const int d = g.dim();
    const auto du = static_cast<std::size_t>(d);
    state_.assign(du + du * du, std::vector<double>(g.size(), 0.0));
    std::vector<double> x(du);
    for (std::size_t n = 0; n < g.size(); ++n) {
        g.node_point(n, x);
        for (std::size_t a = 0; a < du; ++a) state_[a][n] = x[a];
    }
    for (std::size_t a = 0; a < du; ++a) std::fill(state_[du + a * du + a].begin(), state_[du + a * du + a].end(), 1.0);
}

void FlowMapIntegrator::push(double time, VectorField u) {
    if (history_.empty()) {
        if (time > t0_ + 1e-12 * std::max(1.0, std::abs(t0_)))
            throw ContractError("FlowMapIntegrator: first snapshot is after t0");
        init_particles(u.grid());
    }
    history_.push(time, std::move(u));
    try_advance(false);
}

std::size_t FlowMapIntegrator::required_snapshot(double t) const {
    if (history_.count() < 2) return std::numeric_limits<std::size_t>::max();
    const long k = std::max(0L, static_cast<long>(std::floor((t - history_.start_time()) / history_.spacing())));
    return static_cast<std::size_t>(std::max(k - 1, 0L) + 3);
}

const FlowMapIntegrator::StageFields& FlowMapIntegrator::fields_at(double t, std::size_t nsnap) {
    for (const auto& f : cache_)
        if (f.time == t) return f;
    const TimeStencil ts = time_stencil(t, history_.start_time(), history_.spacing(), nsnap);
    const Grid& g = history_.grid();
    const int d = g.dim();
    VectorField u(g, d);
    for (int j = 0; j < ts.count; ++j) {
        const VectorField& s = history_[ts.first + static_cast<std::size_t>(j)].u;
        for (int a = 0; a < d; ++a) u[a].add_scaled(ts.weight[static_cast<std::size_t>(j)], s[a]);
    }
    TensorField grad = gradient_tensor(u);
    while (cache_.size() >= 3) cache_.pop_front();
    cache_.push_back({t, std::move(u), std::move(grad)});
    return cache_.back();
}

void FlowMapIntegrator::step(double t, double h, std::size_t nsnap) {
    const double tm = t + 0.5 * h;
    const double te = t0_ + (t1_ - t0_) * static_cast<double>(done_ + 1) / steps_;
    const StageFields* stage[3] = {&fields_at(t, nsnap), &fields_at(tm, nsnap), &fields_at(te, nsnap)};
    const Grid& g = history_.grid();
    const int d = g.dim();
    const auto du = static_cast<std::size_t>(d);
    const std::size_t nv = du + du * du;

    std::vector<const double*> fields[3];
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < d; ++a) fields[s].push_back(stage[s]->u[a].values().data());
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) fields[s].push_back(stage[s]->g(r, c).values().data());
    }

    SeparableStencil stencil;
    std::vector<double> y(nv), y0(nv), k(nv), acc(nv), gv(du * du), det_buf(du * du), vals(nv);
    auto rhs = [&](int s, const std::vector<double>& yy, std::vector<double>& out) {
        stencil.reset(g, std::span<const double>(yy.data(), du), scheme_);
        const auto& f = fields[s];
        stencil.apply_many(f, vals);
        for (std::size_t a = 0; a < du; ++a) out[a] = vals[a];
        for (std::size_t q = 0; q < du * du; ++q) gv[q] = vals[du + q];
        // dJ/dt = J G
        for (std::size_t r = 0; r < du; ++r)
            for (std::size_t c = 0; c < du; ++c) {
                double sum = 0.0;
                for (std::size_t m = 0; m < du; ++m) sum += yy[du + r * du + m] * gv[m * du + c];
                out[du + r * du + c] = sum;
            }
    };

    const std::size_t np = g.size();
    for (std::size_t n = 0; n < np; ++n) {
        for (std::size_t v = 0; v < nv; ++v) y0[v] = state_[v][n];
        rhs(0, y0, k);
        for (std::size_t v = 0; v < nv; ++v) {
            acc[v] = k[v];
            y[v] = y0[v] + 0.5 * h * k[v];
        }
        rhs(1, y, k);
        for (std::size_t v = 0; v < nv; ++v) {
            acc[v] += 2.0 * k[v];
            y[v] = y0[v] + 0.5 * h * k[v];
        }
        rhs(1, y, k);
        for (std::size_t v = 0; v < nv; ++v) {
            acc[v] += 2.0 * k[v];
            y[v] = y0[v] + h * k[v];
        }
        rhs(2, y, k);
        for (std::size_t v = 0; v < nv; ++v) state_[v][n] = y0[v] + (h / 6.0) * (acc[v] + k[v]);

        for (std::size_t q = 0; q < du * du; ++q) det_buf[q] = state_[du + q][n];
        const double det = small_determinant(det_buf, d);
        if (!(det > 0.0)) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "flow map: det J = %.3e at node %zu, t = %.6g", det, n, te);
            throw NumericalError(msg);
        }
        min_det_ = std::min(min_det_, det);
    }
    ++done_;
}

void FlowMapIntegrator::try_advance(bool final) {
    const std::size_t nsnap = history_.count();
    while (done_ < steps_) {
        const double t = t0_ + (t1_ - t0_) * static_cast<double>(done_) / steps_;
        const double te = t0_ + (t1_ - t0_) * static_cast<double>(done_ + 1) / steps_;
        if (!final && required_snapshot(te) >= nsnap) return;
        step(t, te - t, nsnap);
        const double tn = t0_ + (t1_ - t0_) * static_cast<double>(done_) / steps_;
        history_.release_before(time_stencil(tn, history_.start_time(), history_.spacing(), nsnap).first);
    }
}

DiscreteMap FlowMapIntegrator::finish() {
    if (history_.empty()) throw ContractError("FlowMapIntegrator: no snapshots");
    const double tol = 1e-9 * std::max(history_.spacing(), 1e-300);
    const double t_last = history_.time(history_.count() - 1);
    if (t1_ > t_last + tol && t1_ > t0_) throw ContractError("FlowMapIntegrator: snapshots end before t1");
    if (history_.count() == 1 && t1_ > t0_) throw ContractError("FlowMapIntegrator: need two snapshots");
    if (t1_ > t0_) try_advance(true);
    const Grid g = history_.grid();
    const int d = g.dim();
    const auto du = static_cast<std::size_t>(d);
    VectorField images(g, d);
    TensorField jac(g, d, d);
    for (int a = 0; a < d; ++a) images[a] = ScalarField(g, std::move(state_[static_cast<std::size_t>(a)]));
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            jac(r, c) = ScalarField(g, std::move(state_[du + static_cast<std::size_t>(r * d + c)]));
    state_.clear();
    cache_.clear();
    return DiscreteMap(std::move(images), std::move(jac));
}

DiscreteMap advect_flowmap(const VelocityHistory& history, double t0, double t1, int steps, Interpolation scheme) {
    if (history.empty()) throw ContractError("advect_flowmap: empty history");
    const double first = history.time(history.oldest());
    const double last = history.time(history.count() - 1);
    const double tol = 1e-9 * std::max(history.spacing(), 1e-300);
    if (t0 < first - tol || t1 > last + tol) throw ContractError("advect_flowmap: [t0, t1] outside the history");
    FlowMapIntegrator it(t0, t1, steps, scheme);
    for (std::size_t i = history.oldest(); i < history.count(); ++i) it.push(history[i].time, history[i].u);
    return it.finish();
}

// ---------------------------------------------------------------- errors

FormNorms form_norms(const KForm& w) {
    FormNorms n;
    double sq = 0.0;
    for (const auto& [I, c] : w.terms()) {
        n.linf = std::max(n.linf, c.max_abs());
        double s = 0.0;
        for (double v : c.values()) s += v * v;
        sq += s * c.grid().cell_volume();
    }
    n.l2 = std::sqrt(sq);
    return n;
}

namespace {

double safe_ratio(double num, double den) {
    if (den > 0.0) return num / den;
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

PullbackError pullback_error(const KForm& omega_t1, const DiscreteMap& map, const KForm& omega_t0,
                             Interpolation scheme) {
    if (omega_t1.degree() != omega_t0.degree() || omega_t1.dim() != omega_t0.dim())
        throw ContractError("pullback_error: forms differ in degree or dimension");
    const KForm diff = pullback(map, omega_t1, scheme) - omega_t0;
    const FormNorms e = form_norms(diff);
    const FormNorms r = form_norms(omega_t0);
    return {e.linf, e.l2, safe_ratio(e.linf, r.linf), safe_ratio(e.l2, r.l2)};
}

// ---------------------------------------------------------------- residuals

std::vector<ResidualSample> residual_pde(const VelocityHistory& history, std::span<const KForm> series) {
    if (history.oldest() != 0 || series.size() != history.count())
        throw ContractError("residual_pde: series not aligned with the history");
    if (series.size() < 3) throw ContractError("residual_pde: need at least 3 snapshots");
    const double inv = 1.0 / (2.0 * history.spacing());
    double inv_h = 0.0;
    for (int a = 0; a < history.grid().dim(); ++a) inv_h = std::max(inv_h, 1.0 / history.grid().spacing(a));
    std::vector<ResidualSample> out;
    for (std::size_t k = 1; k + 1 < series.size(); ++k) {
        const KForm dt = inv * (series[k + 1] - series[k - 1]);
        const KForm lie = lie_derivative_cartan(history[k].u, series[k]);
        ResidualSample s;
        s.index = k;
        s.time = history[k].time;
        s.residual = dt + lie;
        const FormNorms n = form_norms(s.residual);
        s.linf = n.linf;
        s.l2 = n.l2;
        s.dt_linf = dt.max_abs();
        s.lie_linf = lie.max_abs();
        double umax = 0.0;
        for (int a = 0; a < history[k].u.ncomp(); ++a) umax = std::max(umax, history[k].u[a].max_abs());
        s.scale = (series[k + 1].max_abs() + series[k - 1].max_abs()) * inv + umax * series[k].max_abs() * inv_h;
        out.push_back(std::move(s));
    }
    return out;
}

ResidualReport residual_pde(const VelocityHistory& history, const std::vector<std::vector<KForm>>& components) {
    if (components.empty()) throw ContractError("residual_pde: no components");
    ResidualReport rep;
    std::vector<KForm> total = components.front();
    for (std::size_t i = 1; i < components.size(); ++i) {
        if (components[i].size() != total.size()) throw ContractError("residual_pde: component series differ in length");
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += components[i][k];
    }
    for (const auto& c : components) rep.components.push_back(residual_pde(history, c));
    rep.sum = residual_pde(history, total);
    for (std::size_t s = 0; s < rep.sum.size(); ++s) {
        KForm acc = rep.components.front()[s].residual;
        double scale = rep.components.front()[s].scale;
        for (std::size_t i = 1; i < rep.components.size(); ++i) {
            acc += rep.components[i][s].residual;
            scale += rep.components[i][s].scale;
        }
        const double num = max_abs_difference(rep.sum[s].residual, acc);
        const double rel = safe_ratio(num, std::max(scale, rep.sum[s].scale));
        rep.linearity.push_back(rel);
        rep.max_linearity = std::max(rep.max_linearity, rel);
    }
    return rep;
}

std::vector<std::vector<KForm>> component_series(const VelocityHistory& history, const DecompPlan& plan) {
    std::vector<std::vector<KForm>> out(plan.pairs.size());
    for (std::size_t k = history.oldest(); k < history.count(); ++k) {
        auto om = component_vorticities(history[k].u, plan);
        for (std::size_t i = 0; i < om.size(); ++i) out[i].push_back(std::move(om[i]));
    }
    return out;
}

// ---------------------------------------------------------------- identities

namespace {

constexpr int kIdentityPoints = 4;

std::vector<Jet> point_jets(int d, Rng& rng) {
    std::vector<Jet> x;
    for (int a = 0; a < d; ++a) x.push_back(Jet::variable(rng.uniform(0.0, kTwoPi), a, d));
    return x;
}

/// Random form whose coefficients depend on the leading @p depends axes,
/// supported on tuples drawn from the leading @p axes axes.
JetForm random_form(int d, int degree, int axes, int depends, Rng& rng, std::span<const Jet> x) {
    JetForm w(d, degree);
    for (const IndexTuple& t : all_tuples(axes, degree)) {
        const TrigSeries s = TrigSeries::random_modes(d, depends, 2, 3, 1.0, rng);
        w.set(t, s(x));
    }
    return w;
}

std::vector<Jet> random_velocity(int d, int ncomp, int depends, Rng& rng, std::span<const Jet> x) {
    std::vector<Jet> u;
    for (int c = 0; c < ncomp; ++c) u.push_back(TrigSeries::random_modes(d, depends, 2, 3, 1.0, rng)(x));
    return u;
}

}  // namespace

double lemma1_check(int d, int k, std::uint64_t seed, LemmaMode mode) {
    if (d < 3 || d > kMaxJetVars) throw ContractError("lemma1_check: d must be in [3, 8]");
    if (k < 1 || k >= d) throw ContractError("lemma1_check: k must be in [1, d)");
    Rng rng(seed, 100 + static_cast<std::uint64_t>(d * 16 + k));
    double worst = 0.0;
    for (int p = 0; p < kIdentityPoints; ++p) {
        const auto x = point_jets(d, rng);
        std::vector<Jet> u = random_velocity(d, k, k, rng, x);
        for (int c = k; c < d; ++c) {
            if (mode == LemmaMode::constant_extension)
                u.push_back(Jet::constant(rng.uniform(-1.0, 1.0), d));
            else
                u.push_back(TrigSeries::random_modes(d, d, 2, 3, 1.0, rng)(x));
        }
        const int degree = rng.integer(1, k);
        JetForm w = random_form(d, degree, k, k, rng, x);
        if (mode == LemmaMode::inject_violation) {
            const IndexTuple first = w.terms().begin()->first;
            w.set(first, *w.find(first) + 0.5 * sin(x[static_cast<std::size_t>(k)]));
        }
        const std::span<const Jet> full(u);
        const JetForm a = lie_derivative_cartan(full, w);
        const JetForm b = lie_derivative_cartan(full.first(static_cast<std::size_t>(k)), w);
        worst = std::max(worst, max_abs_difference(a, b));
    }
    return worst;
}

double IdentityRow::max() const { return std::max({dd, cartan, commutation, leibniz, lemma1}); }

IdentitySuite identity_suite(std::span<const int> dims, int seeds, LemmaMode lemma_mode) {
    if (seeds < 1) throw ContractError("identity_suite: seeds must be >= 1");
    IdentitySuite suite;
    for (int d : dims) {
        if (d < 3 || d > kMaxJetVars) throw ContractError("identity_suite: d must be in [3, 8]");
        for (int s = 0; s < seeds; ++s) {
            IdentityRow row;
            row.d = d;
            row.seed = static_cast<std::uint64_t>(s);
            Rng rng(row.seed, 200 + static_cast<std::uint64_t>(d));
            for (int p = 0; p < kIdentityPoints; ++p) {
                const auto x = point_jets(d, rng);
                const auto u = random_velocity(d, d, d, rng, x);
                const std::span<const Jet> us(u);
                const JetForm w = random_form(d, rng.integer(1, d - 1), d, d, rng, x);
                const JetForm a = random_form(d, 1, d, d, rng, x);
                const JetForm b = random_form(d, rng.integer(1, d - 2), d, d, rng, x);
                row.dd = std::max(row.dd, exterior_derivative(exterior_derivative(w)).max_abs());
                row.cartan = std::max(row.cartan, max_abs_difference(lie_derivative_cartan(us, w),
                                                                     lie_derivative_components(us, w)));
                row.commutation = std::max(row.commutation,
                                           max_abs_difference(exterior_derivative(lie_derivative_components(us, w)),
                                                              lie_derivative_components(us, exterior_derivative(w))));
                const JetForm lhs = lie_derivative_components(us, wedge(a, b));
                const JetForm rhs =
                    wedge(lie_derivative_components(us, a), b) + wedge(a, lie_derivative_components(us, b));
                row.leibniz = std::max(row.leibniz, max_abs_difference(lhs, rhs));
            }
            for (int k = 1; k < d; ++k) row.lemma1 = std::max(row.lemma1, lemma1_check(d, k, row.seed, lemma_mode));
            suite.max_discrepancy = std::max(suite.max_discrepancy, row.max());
            suite.rows.push_back(row);
        }
    }
    return suite;
}

nlohmann::json identity_json(const IdentitySuite& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"d", r.d},
                        {"seed", r.seed},
                        {"dd", r.dd},
                        {"cartan", r.cartan},
                        {"commutation", r.commutation},
                        {"leibniz", r.leibniz},
                        {"lemma1", r.lemma1}});
    return {{"max_discrepancy", s.max_discrepancy}, {"rows", rows}};
}

// ---------------------------------------------------------------- wedge

WedgeReport wedge_invariants(const VelocityHistory& history, const DecompPlan& plan, int i, int j) {
    WedgeReport rep;
    rep.i = i;
    rep.j = j;
    const int np = static_cast<int>(plan.pairs.size());
    if (i < 0 || j < 0 || i >= np || j >= np) throw ContractError("wedge_invariants: component index out of range");
    if (plan.d < 4) {
        rep.trivial = true;
        return rep;
    }
    const auto series = component_series(history, plan);
    const auto& si = series[static_cast<std::size_t>(i)];
    const auto& sj = series[static_cast<std::size_t>(j)];
    if (si.front().degree() + sj.front().degree() > plan.d) {
        rep.trivial = true;
        return rep;
    }
    std::vector<KForm> w;
    for (std::size_t k = 0; k < si.size(); ++k) w.push_back(wedge(si[k], sj[k]));
    const auto ri = residual_pde(history, si);
    const auto rj = residual_pde(history, sj);
    const auto rw = residual_pde(history, w);
    for (std::size_t s = 0; s < rw.size(); ++s) {
        const std::size_t k = rw[s].index;
        WedgeSample ws;
        ws.index = k;
        ws.time = rw[s].time;
        ws.direct = rw[s].linf;
        ws.residual_i = ri[s].linf;
        ws.residual_j = rj[s].linf;
        ws.leibniz = (wedge(ri[s].residual, sj[k]) + wedge(si[k], rj[s].residual)).max_abs();
        ws.bound = sj[k].max_abs() * ri[s].linf + si[k].max_abs() * rj[s].linf;
        rep.samples.push_back(ws);
    }
    return rep;
}

// ---------------------------------------------------------------- fits

void require_nested(std::span<const int> resolutions) {
    if (resolutions.size() < 3) throw ContractError("convergence: need at least 3 resolutions");
    for (std::size_t i = 0; i + 1 < resolutions.size(); ++i) {
        const int a = resolutions[i], b = resolutions[i + 1];
        if (a < 1 || b <= a || b % a != 0)
            throw ContractError("convergence: resolutions must increase, each dividing the next");
    }
}

ConvergenceFit fit_order(std::span<const int> resolutions, std::span<const double> errors, double floor) {
    if (resolutions.size() != errors.size()) throw ContractError("fit_order: size mismatch");
    ConvergenceFit f;
    f.resolutions.assign(resolutions.begin(), resolutions.end());
    f.errors.assign(errors.begin(), errors.end());
    if (errors.size() < 3) {
        f.slope = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    for (double e : errors)
        if (!(e > floor) || !std::isfinite(e)) f.below_floor = true;
    if (f.below_floor) {
        f.slope = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const double x = std::log2(static_cast<double>(resolutions[i]));
        const double y = std::log2(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return f;
}

// ---------------------------------------------------------------- scenarios

namespace {

FrozenRun finish_run(int N, const DiscreteMap& map, const std::vector<KForm>& w0, const std::vector<KForm>& w1,
                     Interpolation scheme) {
    FrozenRun r;
    r.N = N;
    r.min_determinant = map.min_abs_determinant();
    KForm s0 = w0.front(), s1 = w1.front();
    for (std::size_t i = 0; i < w0.size(); ++i) {
        r.components.push_back(pullback_error(w1[i], map, w0[i], scheme));
        if (i > 0) {
            s0 += w0[i];
            s1 += w1[i];
        }
    }
    r.total = pullback_error(s1, map, s0, scheme);
    return r;
}

}  // namespace

FrozenRun frozen_in_run(int N, const FrozenOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SolverConfig config = options.config;
    config.dims = {N, N, N};
    config.snapshot_stride = options.snapshot_stride;
    config.validate();
    const DecompPlan plan = decomposition_plan(3);
    FlowState initial = initial_state(config);
    const auto w0 = component_vorticities(assemble_velocity(initial), plan);
    const int psteps = std::max(4, N / std::max(1, options.substeps_per_n));
    FlowMapIntegrator flow(initial.time, initial.time + config.t_end, psteps, options.scheme);
    const RunResult res = run_simulation(config, std::move(initial), [&](int, const FlowState& s, const Diagnostics&) {
        VectorField u = assemble_velocity(s);
        if (options.wrong_velocity) std::swap(u[0], u[1]);
        flow.push(s.time, std::move(u));
    });
    const auto w1 = component_vorticities(assemble_velocity(res.final_state), plan);
    const DiscreteMap map = flow.finish();
    FrozenRun r = finish_run(N, map, w0, w1, options.scheme);
    r.solver_steps = res.steps;
    r.particle_steps = psteps;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

FrozenRun frozen_in_from_history(const VelocityHistory& history, int particle_steps, Interpolation scheme) {
    if (history.count() < 2 || history.oldest() != 0) throw ContractError("frozen_in_from_history: need a full history of >= 2 snapshots");
    const auto start = std::chrono::steady_clock::now();
    const int d = history.grid().dim();
    const DecompPlan plan = decomposition_plan(d);
    const std::size_t last = history.count() - 1;
    const auto w0 = component_vorticities(history[0].u, plan);
    const auto w1 = component_vorticities(history[last].u, plan);
    const DiscreteMap map = advect_flowmap(history, history[0].time, history[last].time, particle_steps, scheme);
    FrozenRun r = finish_run(history.grid().dims(0), map, w0, w1, scheme);
    r.particle_steps = particle_steps;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

VerificationReport convergence_study(const FrozenOptions& options, std::span<const int> resolutions) {
    require_nested(resolutions);
    VerificationReport rep;
    rep.scenario = to_string(options.config.mode) + (options.wrong_velocity ? "_wrong_velocity" : "");
    for (int N : resolutions) rep.runs.push_back(frozen_in_run(N, options));
    const std::size_t nc = rep.runs.front().components.size();
    for (std::size_t c = 0; c < nc; ++c) {
        std::vector<double> e;
        for (const auto& r : rep.runs) e.push_back(r.components[c].l2_rel);
        rep.fits.push_back(fit_order(resolutions, e));
    }
    std::vector<double> e;
    for (const auto& r : rep.runs) e.push_back(r.total.l2_rel);
    rep.total_fit = fit_order(resolutions, e);
    return rep;
}

namespace {

nlohmann::json error_json(const PullbackError& e) {
    return {{"linf", e.linf}, {"l2", e.l2}, {"linf_rel", e.linf_rel}, {"l2_rel", e.l2_rel}};
}

nlohmann::json fit_json(const ConvergenceFit& f) {
    nlohmann::json j = {{"resolutions", f.resolutions}, {"errors", f.errors}, {"below_floor", f.below_floor}};
    if (f.below_floor || !std::isfinite(f.slope)) {
        j["slope"] = nullptr;
        j["order"] = nullptr;
    } else {
        j["slope"] = f.slope;
        j["order"] = f.order();
    }
    return j;
}

}  // namespace

nlohmann::json frozen_run_json(const FrozenRun& r) {
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t i = 0; i < r.components.size(); ++i) {
        nlohmann::json c = error_json(r.components[i]);
        c["component"] = i + 1;
        comps.push_back(c);
    }
    return {{"N", r.N},
            {"solver_steps", r.solver_steps},
            {"particle_steps", r.particle_steps},
            {"min_determinant", r.min_determinant},
            {"components", comps},
            {"total", error_json(r.total)},
            {"seconds", r.seconds}};
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json runs_j = nlohmann::json::array();
    for (const auto& r : runs) runs_j.push_back(frozen_run_json(r));
    nlohmann::json fits_j = nlohmann::json::array();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        nlohmann::json f = fit_json(fits[i]);
        f["component"] = i + 1;
        fits_j.push_back(f);
    }
    return {{"scenario", scenario}, {"runs", runs_j}, {"fits", fits_j}, {"total_fit", fit_json(total_fit)}};
}

std::string VerificationReport::to_csv() const {
    std::ostringstream out;
    out << "N,component,linf,l2,linf_rel,l2_rel\n";
    char buf[256];
    auto row = [&](int N, const std::string& name, const PullbackError& e) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.10e,%.10e,%.10e,%.10e\n", N, name.c_str(), e.linf, e.l2, e.linf_rel,
                      e.l2_rel);
        out << buf;
    };
    for (const auto& r : runs) {
        for (std::size_t i = 0; i < r.components.size(); ++i) row(r.N, std::to_string(i + 1), r.components[i]);
        row(r.N, "total", r.total);
    }
    return out.str();
}

}  // namespace rsflow
