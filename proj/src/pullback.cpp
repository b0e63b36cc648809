#include "rsflow/pullback.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace rsflow {

double small_determinant(std::span<double> m, int k) {
    if (k == 0) return 1.0;
    if (k == 1) return m[0];
    if (k == 2) return m[0] * m[3] - m[1] * m[2];
    double det = 1.0;
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(m[static_cast<std::size_t>(r * k + col)]) > std::abs(m[static_cast<std::size_t>(piv * k + col)]))
                piv = r;
        const double p = m[static_cast<std::size_t>(piv * k + col)];
        if (p == 0.0) return 0.0;
        if (piv != col) {
            for (int c = 0; c < k; ++c)
                std::swap(m[static_cast<std::size_t>(piv * k + c)], m[static_cast<std::size_t>(col * k + c)]);
            det = -det;
        }
        det *= p;
        for (int r = col + 1; r < k; ++r) {
            const double f = m[static_cast<std::size_t>(r * k + col)] / p;
            for (int c = col + 1; c < k; ++c)
                m[static_cast<std::size_t>(r * k + c)] -= f * m[static_cast<std::size_t>(col * k + c)];
        }
    }
    return det;
}

DiscreteMap::DiscreteMap(VectorField images, TensorField jacobian)
    : images_(std::move(images)), jacobian_(std::move(jacobian)) {
    const Grid& g = images_.grid();
    const int d = g.dim();
    if (images_.ncomp() != d) throw ContractError("DiscreteMap: images need d components");
    if (jacobian_.rows() != d || jacobian_.cols() != d) throw ContractError("DiscreteMap: jacobian must be d x d");
    require_same_grid(jacobian_.grid(), g, "DiscreteMap");
    if (d > kMaxJetVars) throw ContractError("DiscreteMap: dimension above 8");
    std::array<double, kMaxJetVars * kMaxJetVars> m{};
    min_abs_det_ = INFINITY;
    for (std::size_t n = 0; n < g.size(); ++n) {
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m[static_cast<std::size_t>(r * d + c)] = jacobian_(r, c)[n];
        const double det = small_determinant(std::span<double>(m.data(), static_cast<std::size_t>(d * d)), d);
        if (!std::isfinite(det) || det == 0.0)
            throw NumericalError("DiscreteMap: singular jacobian at node " + std::to_string(n));
        min_abs_det_ = std::min(min_abs_det_, std::abs(det));
    }
}

DiscreteMap DiscreteMap::identity(const Grid& grid) {
    const int d = grid.dim();
    VectorField images(grid, d);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t n = 0; n < grid.size(); ++n) {
        grid.node_point(n, x);
        for (int a = 0; a < d; ++a) images[a][n] = x[static_cast<std::size_t>(a)];
    }
    TensorField jac(grid, d, d);
    for (int a = 0; a < d; ++a) jac(a, a) = ScalarField(grid, 1.0);
    return DiscreteMap(std::move(images), std::move(jac));
}

DiscreteMap DiscreteMap::from_analytic(const Grid& grid, const AnalyticField& phi, double t) {
    const int d = grid.dim();
    if (phi.dim() != d || phi.ncomp() != d) throw ContractError("DiscreteMap::from_analytic: map must be d -> d");
    VectorField images(grid, d);
    TensorField jac(grid, d, d);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t n = 0; n < grid.size(); ++n) {
        grid.node_point(n, x);
        const auto j = phi.jets(x, t);
        for (int c = 0; c < d; ++c) {
            images[c][n] = j[static_cast<std::size_t>(c)].value();
            for (int r = 0; r < d; ++r) jac(r, c)[n] = j[static_cast<std::size_t>(c)].gradient(r);
        }
    }
    return DiscreteMap(std::move(images), std::move(jac));
}

KForm pullback(const DiscreteMap& phi, const KForm& omega, Interpolation scheme) {
    const Grid& g = phi.grid();
    const int d = g.dim();
    const int k = omega.degree();
    if (omega.dim() != d) throw ContractError("pullback: dimension mismatch");
    KForm out(d, k);
    if (k > d) return out;

    std::vector<const IndexTuple*> src_tuples;
    std::vector<const double*> src_data;
    for (const auto& [J, c] : omega.terms()) {
        require_same_grid(c.grid(), g, "pullback");
        src_tuples.push_back(&J);
        src_data.push_back(c.values().data());
    }
    const auto targets = all_tuples(d, k);
    std::vector<std::vector<double>> acc(targets.size(), std::vector<double>(g.size(), 0.0));

    SeparableStencil stencil;
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> vals(src_data.size());
    std::array<double, kMaxJetVars * kMaxJetVars> jac{};
    std::array<double, kMaxJetVars * kMaxJetVars> minor{};
    const auto ks = static_cast<std::size_t>(k);
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (src_data.empty()) break;
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = phi.images()[a][n];
        stencil.reset(g, x, scheme);
        stencil.apply_many(src_data, vals);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) jac[static_cast<std::size_t>(r * d + c)] = phi.jacobian()(r, c)[n];
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const IndexTuple& I = targets[t];
            double sum = 0.0;
            for (std::size_t s = 0; s < src_tuples.size(); ++s) {
                const IndexTuple& J = *src_tuples[s];
                for (std::size_t i = 0; i < ks; ++i)
                    for (std::size_t j = 0; j < ks; ++j)
                        minor[i * ks + j] = jac[static_cast<std::size_t>(I[static_cast<int>(i)] * d + J[static_cast<int>(j)])];
                sum += vals[s] * small_determinant(std::span<double>(minor.data(), ks * ks), k);
            }
            acc[t][n] = sum;
        }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) out.set(targets[t], ScalarField(g, std::move(acc[t])));
    return out;
}

}  // namespace rsflow
