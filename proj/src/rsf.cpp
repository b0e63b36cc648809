#include "rsflow/rsf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "rsflow/derivative.hpp"

namespace rsflow {

void require_permutation(std::span<const int> order, int d) {
    if (static_cast<int>(order.size()) != d) throw ContractError("permutation must list every axis exactly once");
    std::vector<int> s(order.begin(), order.end());
    std::sort(s.begin(), s.end());
    for (int i = 0; i < d; ++i)
        if (s[static_cast<std::size_t>(i)] != i) throw ContractError("permutation must list every axis exactly once");
}

namespace {

std::vector<int> resolve_order(int d, std::span<const int> order) {
    if (order.empty()) {
        std::vector<int> id(static_cast<std::size_t>(d));
        std::iota(id.begin(), id.end(), 0);
        return id;
    }
    require_permutation(order, d);
    return {order.begin(), order.end()};
}

}  // namespace

DecompPlan decomposition_plan(int d, std::span<const int> order) {
    if (d < 3) throw ContractError("decomposition_plan: the decomposition is defined for d >= 3");
    const auto ord = resolve_order(d, order);
    DecompPlan plan;
    plan.d = d;
    plan.M = (d + 1) / 2;
    for (int i = 0; i < plan.M; ++i) {
        AxisPair p{ord[static_cast<std::size_t>(2 * i)], std::nullopt};
        if (2 * i + 1 < d) p.second = ord[static_cast<std::size_t>(2 * i + 1)];
        plan.pairs.push_back(p);
    }
    return plan;
}

std::string plan_text(const DecompPlan& plan) {
    std::string s = "M=" + std::to_string(plan.M) + ": ";
    for (std::size_t i = 0; i < plan.pairs.size(); ++i) {
        if (i) s += "|";
        s += "(u" + std::to_string(plan.pairs[i].first + 1);
        if (plan.pairs[i].second) s += ",u" + std::to_string(*plan.pairs[i].second + 1);
        s += ")";
    }
    return s;
}

nlohmann::json plan_json(const DecompPlan& plan) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : plan.pairs) {
        nlohmann::json second = p.second ? nlohmann::json(*p.second + 1) : nlohmann::json(nullptr);
        pairs.push_back(nlohmann::json::array({p.first + 1, second}));
    }
    return {{"d", plan.d}, {"M", plan.M}, {"pairs", pairs}};
}

ZeroPattern zero_pattern(int d, std::span<const int> order) {
    if (d < 3) throw ContractError("zero_pattern: d must be >= 3");
    const auto ord = resolve_order(d, order);
    ZeroPattern z;
    z.d = d;
    z.block.assign(static_cast<std::size_t>(d), 0);
    for (int pos = 0; pos < d; ++pos) z.block[static_cast<std::size_t>(ord[static_cast<std::size_t>(pos)])] = pos / 2;
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r)
            if (z.block[static_cast<std::size_t>(r)] > z.block[static_cast<std::size_t>(c)]) z.required_zero.emplace_back(c, r);
    return z;
}

std::vector<double> rsf_violations(const VectorField& u, const ZeroPattern& pattern) {
    if (u.grid().dim() != pattern.d || u.ncomp() != pattern.d)
        throw ContractError("check_rsf: velocity must have d components on a d-dimensional grid");
    std::vector<double> v;
    v.reserve(pattern.required_zero.size());
    for (const auto& [c, r] : pattern.required_zero) v.push_back(partial_derivative(u[c], r).max_abs());
    return v;
}

double check_rsf(const VectorField& u, const ZeroPattern& pattern) {
    const auto v = rsf_violations(u, pattern);
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

std::pair<TensorField, TensorField> sym_antisym_split(const TensorField& G) {
    if (G.rows() != G.cols()) throw ContractError("sym_antisym_split: tensor must be square");
    const int n = G.rows();
    TensorField D(G.grid(), n, n), A(G.grid(), n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            D(r, c) = 0.5 * (G(r, c) + G(c, r));
            A(r, c) = 0.5 * (G(r, c) - G(c, r));
        }
    return {std::move(D), std::move(A)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sym_antisym_split(const Eigen::MatrixXd& G) {
    if (G.rows() != G.cols()) throw ContractError("sym_antisym_split: matrix must be square");
    const Eigen::MatrixXd Gt = G.transpose();
    return {0.5 * (G + Gt), 0.5 * (G - Gt)};
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& S0) {
    if (S0.rows() != S0.cols()) throw ContractError("jacobi_eigen: matrix must be square");
    const Eigen::Index n = S0.rows();
    Eigen::MatrixXd S = S0;
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    const double norm = S.norm();
    SymmetricEigen out;
    auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = 0; q < n; ++q)
                if (p != q) s += S(p, q) * S(p, q);
        return std::sqrt(s);
    };
    constexpr int kMaxSweeps = 30;
    int sweep = 0;
    // One sweep past the threshold: convergence is quadratic, and the extra
    // sweep takes eigenvectors of close eigenvalues to rounding accuracy.
    bool polished = false;
    while (!polished) {
        if (off_norm() <= 1e-13 * norm) polished = true;
        if (!polished && sweep == kMaxSweeps) throw NumericalError("jacobi_eigen: no convergence after 30 sweeps");
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = S(p, q);
                if (apq == 0.0) continue;
                const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
    }
    out.values = S.diagonal();
    out.vectors = std::move(V);
    out.sweeps = sweep;
    return out;
}

namespace {

struct Block {
    double theta;
    Eigen::VectorXd q1, q2;
};

struct Canon {
    std::vector<Block> blocks;
    std::vector<Eigen::VectorXd> kernel;
};

/// Removes the components of v along the chosen columns (twice, for stability).
void orthogonalize(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& chosen) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : chosen) v -= q.dot(v) * q;
}

/// Orthonormal basis of a subspace from its projector applied to e_1, e_2, ...
std::vector<Eigen::VectorXd> natural_basis_in(const Eigen::MatrixXd& P, Eigen::Index want,
                                              std::vector<Eigen::VectorXd> chosen = {}) {
    std::vector<Eigen::VectorXd> out;
    const Eigen::Index n = P.rows();
    for (Eigen::Index j = 0; j < n && static_cast<Eigen::Index>(out.size()) < want; ++j) {
        Eigen::VectorXd w = P.col(j);
        orthogonalize(w, chosen);
        const double len = w.norm();
        if (len < 1e-6) continue;
        w /= len;
        chosen.push_back(w);
        out.push_back(w);
    }
    return out;
}

/// All rates in the space are (numerically) equal and nonzero: pair each
/// natural-basis direction q1 with q2 = A q1 / |A q1|.
Canon uniform_planes(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    Canon out;
    std::vector<Eigen::VectorXd> chosen;
    for (Eigen::Index j = 0; j < n && static_cast<Eigen::Index>(chosen.size()) + 1 < n; ++j) {
        Eigen::VectorXd w = Eigen::VectorXd::Unit(n, j);
        orthogonalize(w, chosen);
        const double len = w.norm();
        if (len < 1e-6) continue;
        Eigen::VectorXd q1 = w / len;
        Eigen::VectorXd v = A * q1;
        chosen.push_back(q1);
        orthogonalize(v, chosen);
        const double theta = v.norm();
        if (theta == 0.0) {
            out.kernel.push_back(q1);
            continue;
        }
        Eigen::VectorXd q2 = v / theta;
        chosen.push_back(q2);
        out.blocks.push_back({q2.dot(A * q1), q1, q2});
    }
    if (static_cast<Eigen::Index>(chosen.size()) < n) {
        auto rest = natural_basis_in(Eigen::MatrixXd::Identity(n, n), n - static_cast<Eigen::Index>(chosen.size()), chosen);
        for (auto& r : rest) out.kernel.push_back(std::move(r));
    }
    return out;
}

Canon canonical_recursive(const Eigen::MatrixXd& A, double kernel_floor) {
    const Eigen::Index n = A.rows();
    const double norm = A.norm();
    Canon out;
    if (n == 0) return out;
    if (norm <= kernel_floor) {
        out.kernel = natural_basis_in(Eigen::MatrixXd::Identity(n, n), n);
        return out;
    }
    // Scaled A^T A: eigenvalues theta^2 / ||A||^2 in [0, 1], each twice.
    const Eigen::MatrixXd S = (A.transpose() * A) / (norm * norm);
    const SymmetricEigen eig = jacobi_eigen(S);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return eig.values(a) > eig.values(b); });

    constexpr double kClusterGap = 1e-12;
    std::vector<std::vector<Eigen::Index>> clusters;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i == 0 || eig.values(idx[i - 1]) - eig.values(idx[i]) > kClusterGap) clusters.emplace_back();
        clusters.back().push_back(idx[i]);
    }
    if (clusters.size() == 1) return uniform_planes(A);

    for (const auto& cl : clusters) {
        const auto m = static_cast<Eigen::Index>(cl.size());
        Eigen::MatrixXd Vc(n, m);
        for (Eigen::Index j = 0; j < m; ++j) Vc.col(j) = eig.vectors.col(cl[static_cast<std::size_t>(j)]);
        // Restrict A to the invariant subspace and solve the smaller problem.
        const Eigen::MatrixXd B = Vc.transpose() * A * Vc;
        const Eigen::MatrixXd Bs = 0.5 * (B - B.transpose());
        Canon sub = canonical_recursive(Bs, kernel_floor);
        for (auto& b : sub.blocks) out.blocks.push_back({b.theta, Vc * b.q1, Vc * b.q2});
        if (!sub.kernel.empty()) {
            // Kernel directions: natural-basis Gram-Schmidt inside the subspace.
            const Eigen::MatrixXd Pk = [&] {
                Eigen::MatrixXd K(n, static_cast<Eigen::Index>(sub.kernel.size()));
                for (std::size_t j = 0; j < sub.kernel.size(); ++j) K.col(static_cast<Eigen::Index>(j)) = Vc * sub.kernel[j];
                return Eigen::MatrixXd(K * K.transpose());
            }();
            for (auto& k : natural_basis_in(Pk, static_cast<Eigen::Index>(sub.kernel.size()))) out.kernel.push_back(std::move(k));
        }
    }
    return out;
}

}  // namespace

CanonicalRotation canonical_antisymmetric(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw ContractError("canonical_antisymmetric: matrix must be square");
    const Eigen::Index n = A.rows();
    if (n < 1) throw ContractError("canonical_antisymmetric: empty matrix");
    if (!A.allFinite()) throw ContractError("canonical_antisymmetric: non-finite entries");
    const double norm = A.norm();
    if ((A + A.transpose()).norm() > 1e-12 * std::max(1.0, norm))
        throw ContractError("canonical_antisymmetric: matrix is not antisymmetric");

    Canon c = canonical_recursive(0.5 * (A - A.transpose()), 1e-13 * norm);
    std::stable_sort(c.blocks.begin(), c.blocks.end(), [](const Block& a, const Block& b) { return a.theta > b.theta; });

    CanonicalRotation out;
    out.Q.resize(n, n);
    Eigen::Index col = 0;
    for (const auto& b : c.blocks) {
        out.Q.col(col) = b.q1;
        out.Q.col(col + 1) = b.q2;
        out.rates.push_back(b.theta);
        out.planes.emplace_back(static_cast<int>(col), static_cast<int>(col + 1));
        col += 2;
    }
    for (const auto& k : c.kernel) out.Q.col(col++) = k;
    if (col != n) throw NumericalError("canonical_antisymmetric: failed to complete an orthonormal basis");
    for (Eigen::Index p = static_cast<Eigen::Index>(out.planes.size()); p < n / 2; ++p) {
        out.rates.push_back(0.0);
        out.planes.emplace_back(static_cast<int>(2 * p), static_cast<int>(2 * p + 1));
    }
    return out;
}

Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
    Eigen::MatrixXd M(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) M(r, c) = rng.uniform(-1.0, 1.0);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

Eigen::MatrixXd block_antisymmetric(int d, std::span<const double> rates) {
    if (static_cast<int>(rates.size()) > d / 2) throw ContractError("block_antisymmetric: too many rates");
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const auto a = static_cast<Eigen::Index>(2 * i);
        B(a + 1, a) = rates[i];
        B(a, a + 1) = -rates[i];
    }
    return B;
}

RoundTrip canonical_round_trip(int d, int trials, std::uint64_t seed) {
    if (d < 2) throw ContractError("canonical_round_trip: d must be >= 2");
    Rng rng(seed, 300 + static_cast<std::uint64_t>(d));
    RoundTrip out{d, trials, 0.0, 0.0};
    for (int t = 0; t < trials; ++t) {
        std::vector<double> rates(static_cast<std::size_t>(d / 2));
        for (double& r : rates) r = rng.uniform(0.1, 3.0);
        const Eigen::MatrixXd R = random_orthogonal(d, rng);
        const Eigen::MatrixXd A = R * block_antisymmetric(d, rates) * R.transpose();
        const CanonicalRotation c = canonical_antisymmetric(A);
        std::sort(rates.begin(), rates.end(), std::greater<>());
        for (std::size_t i = 0; i < rates.size(); ++i)
            out.rate_error = std::max(out.rate_error, std::abs(c.rates[i] - rates[i]));
        Eigen::MatrixXd T = c.Q.transpose() * A * c.Q;
        for (std::size_t i = 0; i < c.planes.size(); ++i) {
            const auto [a, b] = c.planes[i];
            T(b, a) -= c.rates[i];
            T(a, b) += c.rates[i];
        }
        out.defect = std::max(out.defect, T.cwiseAbs().maxCoeff());
    }
    return out;
}

nlohmann::json canonical_json(const CanonicalRotation& c) {
    nlohmann::json planes = nlohmann::json::array();
    for (const auto& [a, b] : c.planes) planes.push_back({a + 1, b + 1});
    std::vector<double> q;
    for (Eigen::Index r = 0; r < c.Q.rows(); ++r)
        for (Eigen::Index k = 0; k < c.Q.cols(); ++k) q.push_back(c.Q(r, k));
    return {{"d", c.Q.rows()}, {"rates", c.rates}, {"planes", planes}, {"Q", q}};
}

Eigen::MatrixXd tensor_at(const TensorField& T, std::size_t node) {
    Eigen::MatrixXd m(T.rows(), T.cols());
    for (int r = 0; r < T.rows(); ++r)
        for (int c = 0; c < T.cols(); ++c) m(r, c) = T(r, c)[node];
    return m;
}

}  // namespace rsflow
