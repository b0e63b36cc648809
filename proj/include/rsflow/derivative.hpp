/// @file derivative.hpp
/// @brief Centered finite differences with periodic wrap.
#pragma once

#include "rsflow/field.hpp"

namespace rsflow {

enum class Scheme { order2, order4 };

/// d f / d x_axis. order4 uses (-f[+2] + 8 f[+1] - 8 f[-1] + f[-2]) / (12 h).
ScalarField partial_derivative(const ScalarField& f, int axis, Scheme scheme = Scheme::order4);

/// Second derivative along one axis (order-4 five-point stencil).
ScalarField second_derivative(const ScalarField& f, int axis);

/// Sum of second derivatives over the given leading axes (all axes when naxes < 0).
ScalarField laplacian(const ScalarField& f, int naxes = -1);

/// entry(r, c) = d u_c / d x_r (row index is the derivative direction).
TensorField gradient_tensor(const VectorField& u, Scheme scheme = Scheme::order4);

ScalarField divergence(const VectorField& u, Scheme scheme = Scheme::order4);

}  // namespace rsflow
