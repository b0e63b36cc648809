/// @file kform.hpp
/// @brief Differential k-forms with sparse coefficient storage.
///
/// A form stores one coefficient per strictly increasing index tuple;
/// absent tuples are zero. The coefficient type is either a sampled
/// ScalarField (grid forms) or a Jet (a form evaluated at one point with
/// exact derivatives). Axes are 0-based in code and printed 1-based.
#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsflow/errors.hpp"
#include "rsflow/field.hpp"
#include "rsflow/jet.hpp"

namespace rsflow {

class IndexTuple {
public:
    IndexTuple() = default;
    /// @p axes must be strictly increasing and non-negative.
    explicit IndexTuple(std::vector<int> axes);
    IndexTuple(std::initializer_list<int> axes) : IndexTuple(std::vector<int>(axes)) {}

    /// Sorts arbitrary axes, returning the tuple and the permutation sign,
    /// or nothing when an axis repeats (the wedge vanishes).
    static std::optional<std::pair<IndexTuple, int>> canonical(std::vector<int> axes);

    int degree() const { return static_cast<int>(axes_.size()); }
    int operator[](int m) const { return axes_[static_cast<std::size_t>(m)]; }
    const std::vector<int>& axes() const { return axes_; }
    bool contains(int axis) const { return std::binary_search(axes_.begin(), axes_.end(), axis); }
    int max_axis() const { return axes_.empty() ? -1 : axes_.back(); }

    /// Tuple with slot @p m removed.
    IndexTuple without_slot(int m) const;

    /// "(1,2)" with 1-based axes.
    std::string to_string() const;

    auto operator<=>(const IndexTuple&) const = default;
    bool operator==(const IndexTuple&) const = default;

private:
    std::vector<int> axes_;
};

/// Every strictly increasing k-tuple over axes 0..d-1, lexicographic.
std::vector<IndexTuple> all_tuples(int d, int k);

inline int coefficient_dim(const ScalarField& f) { return f.grid().dim(); }
inline int coefficient_dim(const Jet& j) { return j.nvar(); }
inline double coefficient_max_abs(const ScalarField& f) { return f.max_abs(); }
inline double coefficient_max_abs(const Jet& j) { return std::abs(j.value()); }

template <class C>
class BasicKForm {
public:
    using Terms = std::map<IndexTuple, C>;

    BasicKForm() = default;
    BasicKForm(int dim, int degree) : dim_(dim), degree_(degree) {
        if (dim < 1) throw ContractError("KForm: dimension must be >= 1");
        if (degree < 0) throw ContractError("KForm: negative degree");
    }

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    const Terms& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    const C* find(const IndexTuple& t) const {
        auto it = terms_.find(t);
        return it == terms_.end() ? nullptr : &it->second;
    }

    void set(const IndexTuple& t, C c) {
        check_tuple(t, c);
        terms_.insert_or_assign(t, std::move(c));
    }

    /// Accumulates sign * c into tuple @p t.
    void add(const IndexTuple& t, C c, int sign = 1) {
        check_tuple(t, c);
        auto it = terms_.find(t);
        if (it == terms_.end()) {
            if (sign < 0) c *= -1.0;
            terms_.emplace(t, std::move(c));
        } else if (sign < 0) {
            it->second -= c;
        } else {
            it->second += c;
        }
    }

    BasicKForm& operator+=(const BasicKForm& o) {
        require_compatible(o);
        for (const auto& [t, c] : o.terms_) add(t, c);
        return *this;
    }
    BasicKForm& operator-=(const BasicKForm& o) {
        require_compatible(o);
        for (const auto& [t, c] : o.terms_) add(t, c, -1);
        return *this;
    }
    BasicKForm& operator*=(double s) {
        for (auto& [t, c] : terms_) c *= s;
        return *this;
    }

    friend BasicKForm operator+(BasicKForm a, const BasicKForm& b) { return a += b; }
    friend BasicKForm operator-(BasicKForm a, const BasicKForm& b) { return a -= b; }
    friend BasicKForm operator*(double s, BasicKForm a) { return a *= s; }

    /// Largest coefficient magnitude over all tuples.
    double max_abs() const {
        double m = 0.0;
        for (const auto& [t, c] : terms_) m = std::max(m, coefficient_max_abs(c));
        return m;
    }

    /// Tuples whose coefficient exceeds @p tol in magnitude somewhere.
    std::vector<IndexTuple> support(double tol = 0.0) const {
        std::vector<IndexTuple> s;
        for (const auto& [t, c] : terms_)
            if (coefficient_max_abs(c) > tol) s.push_back(t);
        return s;
    }

private:
    void check_tuple(const IndexTuple& t, const C& c) const {
        if (t.degree() != degree_)
            throw ContractError("KForm: tuple " + t.to_string() + " does not match degree " + std::to_string(degree_));
        if (t.max_axis() >= dim_) throw ContractError("KForm: tuple " + t.to_string() + " exceeds the dimension");
        if (coefficient_dim(c) != dim_) throw ContractError("KForm: coefficient dimension mismatch");
    }
    void require_compatible(const BasicKForm& o) const {
        if (o.dim_ != dim_ || o.degree_ != degree_) throw ContractError("KForm: dimension or degree mismatch");
    }

    int dim_ = 1;
    int degree_ = 0;
    Terms terms_;
};

using KForm = BasicKForm<ScalarField>;
using JetForm = BasicKForm<Jet>;

/// max over tuples of max |a_I - b_I| (absent tuples are zero).
template <class C>
double max_abs_difference(const BasicKForm<C>& a, const BasicKForm<C>& b) {
    return (a - b).max_abs();
}

}  // namespace rsflow
