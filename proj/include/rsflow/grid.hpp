/// @file grid.hpp
/// @brief Uniform periodic d-dimensional grid.
///
/// Storage is row-major with axis 0 slowest. Every axis is periodic, so
/// index arithmetic wraps and coordinates are taken modulo the box length.
#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace rsflow {

/// Smallest per-axis sample count accepted by the derivative stencils.
inline constexpr int kMinGridPoints = 8;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Grid {
public:
    Grid() = default;

    /// @p length defaults to 2*pi per axis when empty.
    explicit Grid(std::vector<int> dims, std::vector<double> length = {});

    static Grid cube(int d, int n, double length = kTwoPi);

    int dim() const { return static_cast<int>(dims_.size()); }
    int dims(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
    std::span<const int> dims() const { return dims_; }
    double length(int axis) const { return length_[static_cast<std::size_t>(axis)]; }
    std::span<const double> lengths() const { return length_; }
    double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    double min_spacing() const;

    std::size_t size() const { return size_; }
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    /// Physical volume of one grid cell.
    double cell_volume() const;

    double coordinate(int axis, int index) const { return index * spacing(axis); }

    std::size_t flat_index(std::span<const int> idx) const;
    /// Inverse of flat_index; @p idx must have dim() entries.
    void unravel(std::size_t flat, std::span<int> idx) const;
    /// Node coordinates of the flat index.
    void node_point(std::size_t flat, std::span<double> x) const;

    /// Grid spanned by the first @p naxes axes (e.g. the horizontal plane).
    Grid leading(int naxes) const;

    bool operator==(const Grid& other) const = default;

private:
    std::vector<int> dims_;
    std::vector<double> length_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Throws ContractError when the grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* where);

}  // namespace rsflow
