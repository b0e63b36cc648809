/// @file jet.hpp
/// @brief Second-order multivariate Taylor jets (forward-mode AD).
///
/// A Jet holds a value, gradient and Hessian of a function at one point.
/// Evaluating a closed-form field with Jet arguments yields its exact
/// derivatives up to rounding, so exterior-calculus identities can be
/// checked at machine precision. Differentiating a jet lowers its order;
/// using a quantity beyond its known order throws.
#pragma once

#include <array>
#include <cmath>

#include "rsflow/errors.hpp"

namespace rsflow {

inline constexpr int kMaxJetVars = 8;

class Jet {
public:
    Jet() = default;

    static Jet constant(double v, int nvar, int order = 2) {
        check_nvar(nvar);
        Jet j;
        j.nvar_ = nvar;
        j.order_ = order;
        j.v_ = v;
        return j;
    }

    /// The coordinate function x_axis with value @p v.
    static Jet variable(double v, int axis, int nvar, int order = 2) {
        Jet j = constant(v, nvar, order);
        if (axis < 0 || axis >= nvar) throw ContractError("Jet::variable: axis out of range");
        j.g_[static_cast<std::size_t>(axis)] = 1.0;
        return j;
    }

    int nvar() const { return nvar_; }
    int order() const { return order_; }
    double value() const { return v_; }
    double gradient(int a) const {
        require_order(1);
        return g_[static_cast<std::size_t>(a)];
    }
    double hessian(int a, int b) const {
        require_order(2);
        return h_[idx(a, b)];
    }

    /// Partial derivative along @p axis; one order lower.
    friend Jet derivative(const Jet& f, int axis) {
        f.require_order(1);
        if (axis < 0 || axis >= f.nvar_) throw ContractError("derivative(Jet): axis out of range");
        Jet r;
        r.nvar_ = f.nvar_;
        r.order_ = f.order_ - 1;
        r.v_ = f.g_[static_cast<std::size_t>(axis)];
        if (r.order_ >= 1)
            for (int b = 0; b < f.nvar_; ++b) r.g_[static_cast<std::size_t>(b)] = f.h_[idx(axis, b)];
        return r;
    }

    Jet& operator+=(const Jet& o) {
        merge_shape(o);
        v_ += o.v_;
        for (int a = 0; a < nvar_; ++a) g_[static_cast<std::size_t>(a)] += o.g_[static_cast<std::size_t>(a)];
        for (int a = 0; a < nvar_; ++a)
            for (int b = 0; b < nvar_; ++b) h_[idx(a, b)] += o.h_[idx(a, b)];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        merge_shape(o);
        v_ -= o.v_;
        for (int a = 0; a < nvar_; ++a) g_[static_cast<std::size_t>(a)] -= o.g_[static_cast<std::size_t>(a)];
        for (int a = 0; a < nvar_; ++a)
            for (int b = 0; b < nvar_; ++b) h_[idx(a, b)] -= o.h_[idx(a, b)];
        return *this;
    }
    Jet& operator*=(double s) {
        v_ *= s;
        for (auto& x : g_) x *= s;
        for (auto& x : h_) x *= s;
        return *this;
    }
    Jet& operator+=(double s) {
        v_ += s;
        return *this;
    }
    Jet& operator*=(const Jet& o) {
        *this = *this * o;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a += -s; }
    friend Jet operator-(Jet a) { return a *= -1.0; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        r.nvar_ = a.nvar_;
        r.order_ = a.order_ < b.order_ ? a.order_ : b.order_;
        if (a.nvar_ != b.nvar_) throw ContractError("Jet: variable count mismatch");
        const int n = a.nvar_;
        r.v_ = a.v_ * b.v_;
        for (int i = 0; i < n; ++i) {
            const auto si = static_cast<std::size_t>(i);
            r.g_[si] = a.v_ * b.g_[si] + b.v_ * a.g_[si];
        }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const auto si = static_cast<std::size_t>(i), sk = static_cast<std::size_t>(k);
                r.h_[idx(i, k)] =
                    a.v_ * b.h_[idx(i, k)] + b.v_ * a.h_[idx(i, k)] + a.g_[si] * b.g_[sk] + b.g_[si] * a.g_[sk];
            }
        return r;
    }

    /// f(jet) given f, f', f'' at the value.
    Jet compose(double f0, double f1, double f2) const {
        Jet r;
        r.nvar_ = nvar_;
        r.order_ = order_;
        r.v_ = f0;
        for (int i = 0; i < nvar_; ++i) r.g_[static_cast<std::size_t>(i)] = f1 * g_[static_cast<std::size_t>(i)];
        for (int i = 0; i < nvar_; ++i)
            for (int k = 0; k < nvar_; ++k)
                r.h_[idx(i, k)] =
                    f1 * h_[idx(i, k)] + f2 * g_[static_cast<std::size_t>(i)] * g_[static_cast<std::size_t>(k)];
        return r;
    }

    friend Jet sin(const Jet& x) {
        const double s = std::sin(x.v_), c = std::cos(x.v_);
        return x.compose(s, c, -s);
    }
    friend Jet cos(const Jet& x) {
        const double s = std::sin(x.v_), c = std::cos(x.v_);
        return x.compose(c, -s, -c);
    }
    friend Jet exp(const Jet& x) {
        const double e = std::exp(x.v_);
        return x.compose(e, e, e);
    }

private:
    static constexpr std::size_t idx(int a, int b) { return static_cast<std::size_t>(a * kMaxJetVars + b); }

    static void check_nvar(int nvar) {
        if (nvar < 1 || nvar > kMaxJetVars) throw ContractError("Jet: variable count must be in [1, 8]");
    }

    void require_order(int k) const {
        if (order_ < k) throw ContractError("Jet: derivative requested beyond the jet's order");
    }

    void merge_shape(const Jet& o) {
        if (nvar_ == 0) {
            nvar_ = o.nvar_;
            order_ = o.order_;
        }
        if (o.nvar_ != nvar_) throw ContractError("Jet: variable count mismatch");
        if (o.order_ < order_) order_ = o.order_;
    }

    int nvar_ = 0;
    int order_ = 0;
    double v_ = 0.0;
    std::array<double, kMaxJetVars> g_{};
    std::array<double, kMaxJetVars * kMaxJetVars> h_{};
};

using std::cos;
using std::exp;
using std::sin;

}  // namespace rsflow
