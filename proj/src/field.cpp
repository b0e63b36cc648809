#include "rsflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsflow/errors.hpp"

namespace rsflow {

ScalarField::ScalarField(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(Grid grid, double fill) : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw ContractError("ScalarField: " + std::to_string(values_.size()) + " values for a grid of " +
                            std::to_string(grid_.size()) + " nodes");
    require_finite("ScalarField");
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(std::span<const double>)>& f) {
    ScalarField out(grid);
    std::vector<double> x(static_cast<std::size_t>(grid.dim()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.node_point(i, x);
        out.values_[i] = f(x);
    }
    out.require_finite("ScalarField::sample");
    return out;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s * grid_.cell_volume());
}

double ScalarField::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.cell_volume();
}

void ScalarField::require_finite(const char* where) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw NumericalError(std::string(where) + ": non-finite value at node " + std::to_string(i));
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::*=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::add_scaled(double s, const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::add_scaled");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator-(ScalarField a) {
    for (double& v : a.values()) v = -v;
    return a;
}

double max_abs_difference(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "max_abs_difference");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

VectorField::VectorField(Grid grid, int ncomp) : grid_(std::move(grid)) {
    if (ncomp < 0) throw ContractError("VectorField: negative component count");
    components_.assign(static_cast<std::size_t>(ncomp), ScalarField(grid_));
}

VectorField::VectorField(Grid grid, std::vector<ScalarField> components)
    : grid_(std::move(grid)), components_(std::move(components)) {
    for (const auto& c : components_) require_same_grid(grid_, c.grid(), "VectorField");
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs());
    return m;
}

TensorField::TensorField(Grid grid, int rows, int cols) : grid_(std::move(grid)), rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw ContractError("TensorField: negative shape");
    entries_.assign(static_cast<std::size_t>(rows * cols), ScalarField(grid_));
}

double TensorField::max_abs() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.max_abs());
    return m;
}

}  // namespace rsflow
