/// @file field.hpp
/// @brief Sampled scalar, vector and tensor fields on a periodic Grid.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rsflow/grid.hpp"

namespace rsflow {

class ScalarField {
public:
    ScalarField() = default;
    /// Zero-initialized field.
    explicit ScalarField(Grid grid);
    ScalarField(Grid grid, double fill);
    /// Takes ownership of @p values; throws if the count or finiteness is wrong.
    ScalarField(Grid grid, std::vector<double> values);

    /// Samples f(x) at every node.
    static ScalarField sample(const Grid& grid, const std::function<double(std::span<const double>)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    double max_abs() const;
    double min() const;
    double max() const;
    /// Grid L2 norm: sqrt(sum v^2 * cell volume).
    double l2_norm() const;
    /// Riemann sum over the box.
    double integral() const;
    bool is_zero() const { return max_abs() == 0.0; }
    /// Throws NumericalError on NaN/Inf.
    void require_finite(const char* where) const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(const ScalarField& o);
    ScalarField& operator*=(double s);
    /// this += s * o
    ScalarField& add_scaled(double s, const ScalarField& o);

private:
    Grid grid_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator-(ScalarField a);

/// max |a - b| over nodes.
double max_abs_difference(const ScalarField& a, const ScalarField& b);

class VectorField {
public:
    VectorField() = default;
    /// @p ncomp zero components.
    VectorField(Grid grid, int ncomp);
    VectorField(Grid grid, std::vector<ScalarField> components);

    const Grid& grid() const { return grid_; }
    int ncomp() const { return static_cast<int>(components_.size()); }
    const ScalarField& operator[](int c) const { return components_[static_cast<std::size_t>(c)]; }
    ScalarField& operator[](int c) { return components_[static_cast<std::size_t>(c)]; }
    std::span<const ScalarField> components() const { return components_; }

    double max_abs() const;

private:
    Grid grid_;
    std::vector<ScalarField> components_;
};

/// rows x cols scalar fields; entry(r, c) stored row-major.
class TensorField {
public:
    TensorField() = default;
    TensorField(Grid grid, int rows, int cols);

    const Grid& grid() const { return grid_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const ScalarField& operator()(int r, int c) const { return entries_[index(r, c)]; }
    ScalarField& operator()(int r, int c) { return entries_[index(r, c)]; }

    double max_abs() const;

private:
    std::size_t index(int r, int c) const { return static_cast<std::size_t>(r * cols_ + c); }

    Grid grid_;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<ScalarField> entries_;
};

}  // namespace rsflow
