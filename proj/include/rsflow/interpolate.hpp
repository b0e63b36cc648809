/// @file interpolate.hpp
/// @brief Periodic tensor-product interpolation of sampled fields.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rsflow/field.hpp"

namespace rsflow {

enum class Interpolation {
    lagrange4,  ///< 4-point Lagrange per axis; exact for per-axis cubics
    linear,     ///< 2-point per axis
    nearest     ///< nearest node; first-order accurate
};

/// Precomputed offsets and weights for one evaluation point. Building a
/// stencil once and applying it to many fields on the same grid is the
/// fast path used by particle advection and pullback.
class InterpolationStencil {
public:
    InterpolationStencil() = default;
    InterpolationStencil(const Grid& grid, std::span<const double> point,
                         Interpolation scheme = Interpolation::lagrange4);

    double apply(const ScalarField& f) const { return apply(f.values().data()); }
    double apply(const double* values) const {
        double s = 0.0;
        for (std::size_t k = 0; k < offsets_.size(); ++k) s += weights_[k] * values[offsets_[k]];
        return s;
    }

    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const double> weights() const { return weights_; }

    /// Rebuilds in place (reuses storage).
    void reset(const Grid& grid, std::span<const double> point, Interpolation scheme);

private:
    std::vector<std::size_t> offsets_;
    std::vector<double> weights_;
};

/// The same stencil kept per axis. Cheaper to build, and applied to many
/// fields at once with the last (contiguous) axis innermost.
class SeparableStencil {
public:
    static constexpr int kMaxDim = 8;

    void reset(const Grid& grid, std::span<const double> point, Interpolation scheme);
    /// out[f] = interpolated value of fields[f] (all sampled on the grid given to reset).
    void apply_many(std::span<const double* const> fields, std::span<double> out) const;

private:
    int dim_ = 0;
    int count_ = 0;
    std::array<std::array<std::size_t, 4>, kMaxDim> offset_{};
    std::array<std::array<double, 4>, kMaxDim> weight_{};
};

/// Value of @p f at an arbitrary point; the point is wrapped into the box.
double interpolate(const ScalarField& f, std::span<const double> point,
                   Interpolation scheme = Interpolation::lagrange4);

}  // namespace rsflow
