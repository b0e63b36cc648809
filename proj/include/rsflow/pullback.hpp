/// @file pullback.hpp
/// @brief Discrete maps and pullback of grid forms.
#pragma once

#include <functional>
#include <span>

#include "rsflow/analytic.hpp"
#include "rsflow/interpolate.hpp"
#include "rsflow/kform.hpp"

namespace rsflow {

/// Determinant of a k x k row-major matrix (k <= 8), destroying @p m.
double small_determinant(std::span<double> m, int k);

/// Node images Phi(a) and Jacobians, jacobian(r, c) = d Phi_c / d a_r.
class DiscreteMap {
public:
    /// Throws NumericalError when a Jacobian determinant is zero or not finite.
    DiscreteMap(VectorField images, TensorField jacobian);

    static DiscreteMap identity(const Grid& grid);
    /// Samples an analytic map (ncomp = d) with exact Jacobians.
    static DiscreteMap from_analytic(const Grid& grid, const AnalyticField& phi, double t = 0.0);

    const Grid& grid() const { return images_.grid(); }
    const VectorField& images() const { return images_; }
    const TensorField& jacobian() const { return jacobian_; }

    /// Smallest |det| over nodes.
    double min_abs_determinant() const { return min_abs_det_; }

private:
    VectorField images_;
    TensorField jacobian_;
    double min_abs_det_ = 0.0;
};

/// (Phi^* omega)_I(a) = sum_J omega_J(Phi(a)) det(dPhi[I rows, J cols]).
/// Coefficients are interpolated at the images; the result stores every
/// tuple of the degree.
KForm pullback(const DiscreteMap& phi, const KForm& omega, Interpolation scheme = Interpolation::lagrange4);

}  // namespace rsflow
