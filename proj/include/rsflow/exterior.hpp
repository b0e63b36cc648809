/// @file exterior.hpp
/// @brief Exterior derivative, wedge, interior product and Lie derivatives.
///
/// Every operator is written once over the coefficient type C, which must
/// provide derivative(C, axis), +=, -=, *, and scaling by a double. The
/// grid instantiation (KForm) differentiates with 4th-order stencils; the
/// Jet instantiation (JetForm) differentiates exactly.
///
/// Sign conventions: d(f dx_I) places dx_a in front and sorts, so the
/// coefficient of dx_m^dx_n in dU is d_m u_n - d_n u_m. Interior products
/// contract the first slot.
#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "rsflow/derivative.hpp"
#include "rsflow/kform.hpp"

namespace rsflow {

inline ScalarField derivative(const ScalarField& f, int axis) { return partial_derivative(f, axis, Scheme::order4); }

namespace detail {

template <class C>
void check_velocity(std::span<const C> u, int dim, const char* where) {
    if (static_cast<int>(u.size()) > dim) throw ContractError(std::string(where) + ": more velocity components than dimensions");
    for (const C& c : u)
        if (coefficient_dim(c) != dim) throw ContractError(std::string(where) + ": velocity dimension mismatch");
}

/// Lazily computed d u_j / d x_a.
template <class C>
class VelocityGradient {
public:
    VelocityGradient(std::span<const C> u, int dim) : u_(u), dim_(dim), cache_(u.size() * static_cast<std::size_t>(dim)) {}

    const C& operator()(int j, int a) {
        auto& slot = cache_[static_cast<std::size_t>(j * dim_ + a)];
        if (!slot) slot = derivative(u_[static_cast<std::size_t>(j)], a);
        return *slot;
    }

private:
    std::span<const C> u_;
    int dim_;
    std::vector<std::optional<C>> cache_;
};

}  // namespace detail

/// U = sum_i u_i dx_i over the supplied components.
template <class C>
BasicKForm<C> form_from_velocity(std::span<const C> u, int dim) {
    detail::check_velocity(u, dim, "form_from_velocity");
    BasicKForm<C> U(dim, 1);
    for (std::size_t i = 0; i < u.size(); ++i) U.set(IndexTuple{static_cast<int>(i)}, u[i]);
    return U;
}

/// d omega. A top-degree form maps to the empty (d+1)-form.
template <class C>
BasicKForm<C> exterior_derivative(const BasicKForm<C>& w) {
    const int d = w.dim();
    BasicKForm<C> out(d, w.degree() + 1);
    if (w.degree() >= d) return out;
    for (const auto& [I, c] : w.terms()) {
        for (int a = 0; a < d; ++a) {
            if (I.contains(a)) continue;
            std::vector<int> axes = I.axes();
            const auto pos = std::lower_bound(axes.begin(), axes.end(), a) - axes.begin();
            axes.insert(axes.begin() + pos, a);
            out.add(IndexTuple(std::move(axes)), derivative(c, a), pos % 2 ? -1 : 1);
        }
    }
    return out;
}

template <class C>
BasicKForm<C> wedge(const BasicKForm<C>& a, const BasicKForm<C>& b) {
    if (a.dim() != b.dim()) throw ContractError("wedge: dimension mismatch");
    BasicKForm<C> out(a.dim(), a.degree() + b.degree());
    if (out.degree() > out.dim()) return out;
    for (const auto& [I, ca] : a.terms()) {
        for (const auto& [J, cb] : b.terms()) {
            std::vector<int> axes = I.axes();
            axes.insert(axes.end(), J.axes().begin(), J.axes().end());
            auto merged = IndexTuple::canonical(std::move(axes));
            if (!merged) continue;
            out.add(merged->first, ca * cb, merged->second);
        }
    }
    return out;
}

/// iota_u omega; components of u beyond u.size() count as zero.
template <class C>
BasicKForm<C> interior_product(std::span<const C> u, const BasicKForm<C>& w) {
    if (w.degree() < 1) throw ContractError("interior_product: degree-0 form");
    detail::check_velocity(u, w.dim(), "interior_product");
    BasicKForm<C> out(w.dim(), w.degree() - 1);
    const int ncomp = static_cast<int>(u.size());
    for (const auto& [I, c] : w.terms()) {
        for (int m = 0; m < I.degree(); ++m) {
            if (I[m] >= ncomp) continue;
            out.add(I.without_slot(m), u[static_cast<std::size_t>(I[m])] * c, m % 2 ? -1 : 1);
        }
    }
    return out;
}

/// L_u omega = iota_u d omega + d iota_u omega.
template <class C>
BasicKForm<C> lie_derivative_cartan(std::span<const C> u, const BasicKForm<C>& w) {
    detail::check_velocity(u, w.dim(), "lie_derivative_cartan");
    BasicKForm<C> out(w.dim(), w.degree());
    if (w.degree() < w.dim()) out += interior_product(u, exterior_derivative(w));
    if (w.degree() >= 1) out += exterior_derivative(interior_product(u, w));
    return out;
}

/// L_u omega from the coordinate transport law
/// (L_u w)_I = u^k d_k w_I + sum_m w_{I[m -> k]} d_{i_m} u^k.
template <class C>
BasicKForm<C> lie_derivative_components(std::span<const C> u, const BasicKForm<C>& w) {
    const int d = w.dim();
    detail::check_velocity(u, d, "lie_derivative_components");
    const int ncomp = static_cast<int>(u.size());
    detail::VelocityGradient<C> grad(u, d);
    BasicKForm<C> out(d, w.degree());
    for (const auto& [J, c] : w.terms()) {
        for (int k = 0; k < ncomp; ++k) out.add(J, u[static_cast<std::size_t>(k)] * derivative(c, k));
        // Slot m of J carries axis j; it feeds every tuple with that slot
        // replaced by a, weighted by d_a u^j.
        for (int m = 0; m < J.degree(); ++m) {
            const int j = J[m];
            if (j >= ncomp) continue;
            for (int a = 0; a < d; ++a) {
                std::vector<int> axes = J.axes();
                axes[static_cast<std::size_t>(m)] = a;
                auto target = IndexTuple::canonical(std::move(axes));
                if (!target) continue;
                out.add(target->first, c * grad(j, a), target->second);
            }
        }
    }
    return out;
}

// Grid conveniences taking a VectorField velocity.

inline KForm form_from_velocity(const VectorField& u) { return form_from_velocity(u.components(), u.grid().dim()); }
inline KForm interior_product(const VectorField& u, const KForm& w) { return interior_product(u.components(), w); }
inline KForm lie_derivative_cartan(const VectorField& u, const KForm& w) { return lie_derivative_cartan(u.components(), w); }
inline KForm lie_derivative_components(const VectorField& u, const KForm& w) {
    return lie_derivative_components(u.components(), w);
}

/// d components with dx_i coefficients (absent tuples become zero fields).
VectorField velocity_from_form(const KForm& U, const Grid& grid);

/// Antisymmetric d x d field with entry (m, n) = coefficient of dx_m^dx_n / 2
/// for m < n. For Omega = dU this equals A = (G - G^T)/2 with G(r, c) = d_r u_c.
TensorField antisym_matrix_rep(const KForm& omega, const Grid& grid);

/// The grid shared by every coefficient, or nothing for an empty form.
std::optional<Grid> form_grid(const KForm& w);

}  // namespace rsflow
