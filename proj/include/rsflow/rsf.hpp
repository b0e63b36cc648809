/// @file rsf.hpp
/// @brief Real Schur flow structure: decomposition plans, zero patterns,
/// D/A splitting and the canonical form of antisymmetric matrices.
///
/// Axes are 0-based here. A plan pairs axes (0,1), (2,3), ... in RSF
/// order; for odd d the last pair has no partner. An optional permutation
/// relabels which physical axis sits at each RSF position.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rsflow/exterior.hpp"
#include "rsflow/random.hpp"

namespace rsflow {

struct AxisPair {
    int first;
    std::optional<int> second;  ///< empty for the padded partner of odd d
};

struct DecompPlan {
    int d = 0;
    int M = 0;
    std::vector<AxisPair> pairs;
};

/// @p order lists the physical axis at each RSF position (identity when empty).
DecompPlan decomposition_plan(int d, std::span<const int> order = {});

/// "M=2: (u1,u2)|(u3)"
std::string plan_text(const DecompPlan& plan);
/// {"d", "M", "pairs": [[1,2],[3,null]]} with 1-based axes.
nlohmann::json plan_json(const DecompPlan& plan);

/// Checks that @p order is a permutation of 0..d-1; throws ContractError otherwise.
void require_permutation(std::span<const int> order, int d);

/// U_i = u_a dx_a + u_b dx_b for each plan pair.
template <class C>
std::vector<BasicKForm<C>> component_velocity_forms(std::span<const C> u, const DecompPlan& plan) {
    if (static_cast<int>(u.size()) != plan.d) throw ContractError("component_velocity_forms: need d velocity components");
    std::vector<BasicKForm<C>> out;
    out.reserve(plan.pairs.size());
    for (const auto& p : plan.pairs) {
        BasicKForm<C> U(plan.d, 1);
        U.set(IndexTuple{p.first}, u[static_cast<std::size_t>(p.first)]);
        if (p.second) U.set(IndexTuple{*p.second}, u[static_cast<std::size_t>(*p.second)]);
        out.push_back(std::move(U));
    }
    return out;
}

/// Omega_i = d U_i.
template <class C>
std::vector<BasicKForm<C>> component_vorticities(std::span<const C> u, const DecompPlan& plan) {
    auto U = component_velocity_forms(u, plan);
    std::vector<BasicKForm<C>> out;
    out.reserve(U.size());
    for (const auto& Ui : U) out.push_back(exterior_derivative(Ui));
    return out;
}

inline std::vector<KForm> component_velocity_forms(const VectorField& u, const DecompPlan& plan) {
    if (u.grid().dim() != plan.d) throw ContractError("component_velocity_forms: grid dimension mismatch");
    return component_velocity_forms(u.components(), plan);
}
inline std::vector<KForm> component_vorticities(const VectorField& u, const DecompPlan& plan) {
    if (u.grid().dim() != plan.d) throw ContractError("component_vorticities: grid dimension mismatch");
    return component_vorticities(u.components(), plan);
}

/// Entries (component c, derivative axis r) that vanish for an RSF field:
/// those with block(r) > block(c), blocks being consecutive plan pairs.
struct ZeroPattern {
    int d = 0;
    std::vector<int> block;                          ///< block index per physical axis
    std::vector<std::pair<int, int>> required_zero;  ///< (c, r), sorted
};

ZeroPattern zero_pattern(int d, std::span<const int> order = {});

/// max over required-zero entries of max |d u_c / d x_r|.
double check_rsf(const VectorField& u, const ZeroPattern& pattern);
/// Same, one value per required-zero entry (pattern order).
std::vector<double> rsf_violations(const VectorField& u, const ZeroPattern& pattern);

/// D = (G + G^T)/2, A = (G - G^T)/2.
std::pair<TensorField, TensorField> sym_antisym_split(const TensorField& G);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sym_antisym_split(const Eigen::MatrixXd& G);

/// Orthogonal Q with Q^T A Q block diagonal, blocks [[0, -theta], [theta, 0]].
struct CanonicalRotation {
    Eigen::MatrixXd Q;
    std::vector<double> rates;              ///< floor(d/2) entries, descending, >= 0
    std::vector<std::pair<int, int>> planes;  ///< column pairs of Q, one per rate
};

/// Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi
/// (30 sweeps at most, off-diagonal norm <= 1e-13 of the Frobenius norm).
/// Throws NumericalError when the sweep cap is hit.
struct SymmetricEigen {
    Eigen::VectorXd values;   ///< unsorted, matching columns of vectors
    Eigen::MatrixXd vectors;
    int sweeps = 0;
};
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& S);

/// Throws ContractError unless ||A + A^T||_F <= 1e-12 max(1, ||A||_F).
CanonicalRotation canonical_antisymmetric(const Eigen::MatrixXd& A);

/// {"d", "rates", "planes": [[1,2],...], "Q": row-major}
nlohmann::json canonical_json(const CanonicalRotation& c);

/// Haar-ish random orthogonal matrix (QR of a uniform random matrix).
Eigen::MatrixXd random_orthogonal(int d, Rng& rng);
/// Canonical block matrix: B(2i+1, 2i) = rates[i], B(2i, 2i+1) = -rates[i].
Eigen::MatrixXd block_antisymmetric(int d, std::span<const double> rates);

struct RoundTrip {
    int d = 0;
    int trials = 0;
    double rate_error = 0.0;  ///< worst |recovered - planted| rate
    double defect = 0.0;      ///< worst entry of Q^T A Q off its canonical form
};
/// Plants rates in [0.1, 3) in random orthogonal frames and recovers them.
RoundTrip canonical_round_trip(int d, int trials, std::uint64_t seed);

/// Matrix of a tensor field at one node.
Eigen::MatrixXd tensor_at(const TensorField& T, std::size_t node);

}  // namespace rsflow
