#include "rsflow/derivative.hpp"

#include <string>

#include "rsflow/errors.hpp"

namespace rsflow {
namespace {

void require_axis(const Grid& g, int axis, int width, const char* where) {
    if (axis < 0 || axis >= g.dim())
        throw ContractError(std::string(where) + ": axis " + std::to_string(axis + 1) + " out of range for d=" +
                            std::to_string(g.dim()));
    if (g.dims(axis) < width)
        throw ContractError(std::string(where) + ": grid too small for a " + std::to_string(width) +
                            "-point stencil");
}

// Applies a periodic stencil along one axis. The kernel receives the
// values at offsets -2..+2 (contiguous inner loop over the faster axes).
template <class Kernel>
ScalarField apply_stencil(const ScalarField& f, int axis, Kernel kernel) {
    const Grid& g = f.grid();
    const std::size_t n = static_cast<std::size_t>(g.dims(axis));
    const std::size_t inner = g.stride(axis);
    const std::size_t outer = g.size() / (n * inner);
    ScalarField out(g);
    const double* in = f.values().data();
    double* res = out.values().data();
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = o * n * inner;
        for (std::size_t i = 0; i < n; ++i) {
            const double* m2 = in + base + ((i + n - 2) % n) * inner;
            const double* m1 = in + base + ((i + n - 1) % n) * inner;
            const double* c0 = in + base + i * inner;
            const double* p1 = in + base + ((i + 1) % n) * inner;
            const double* p2 = in + base + ((i + 2) % n) * inner;
            double* r = res + base + i * inner;
            for (std::size_t j = 0; j < inner; ++j) r[j] = kernel(m2[j], m1[j], c0[j], p1[j], p2[j]);
        }
    }
    return out;
}

}  // namespace

ScalarField partial_derivative(const ScalarField& f, int axis, Scheme scheme) {
    const Grid& g = f.grid();
    if (scheme == Scheme::order2) {
        require_axis(g, axis, 3, "partial_derivative");
        const double c = 1.0 / (2.0 * g.spacing(axis));
        return apply_stencil(f, axis, [c](double, double m1, double, double p1, double) { return (p1 - m1) * c; });
    }
    require_axis(g, axis, 5, "partial_derivative");
    const double c = 1.0 / (12.0 * g.spacing(axis));
    // Differences first, so fields constant along the axis give exact zeros.
    return apply_stencil(f, axis, [c](double m2, double m1, double, double p1, double p2) {
        return (8.0 * (p1 - m1) - (p2 - m2)) * c;
    });
}

ScalarField second_derivative(const ScalarField& f, int axis) {
    const Grid& g = f.grid();
    require_axis(g, axis, 5, "second_derivative");
    const double h = g.spacing(axis);
    const double c = 1.0 / (12.0 * h * h);
    return apply_stencil(f, axis, [c](double m2, double m1, double c0, double p1, double p2) {
        return (16.0 * ((p1 - c0) + (m1 - c0)) - ((p2 - c0) + (m2 - c0))) * c;
    });
}

ScalarField laplacian(const ScalarField& f, int naxes) {
    const int n = naxes < 0 ? f.grid().dim() : naxes;
    ScalarField out(f.grid());
    for (int a = 0; a < n; ++a) out += second_derivative(f, a);
    return out;
}

TensorField gradient_tensor(const VectorField& u, Scheme scheme) {
    const int d = u.grid().dim();
    if (u.ncomp() != d)
        throw ContractError("gradient_tensor: " + std::to_string(u.ncomp()) + " components on a " +
                            std::to_string(d) + "-dimensional grid");
    TensorField g(u.grid(), d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) = partial_derivative(u[c], r, scheme);
    return g;
}

ScalarField divergence(const VectorField& u, Scheme scheme) {
    const int d = u.grid().dim();
    if (u.ncomp() != d)
        throw ContractError("divergence: " + std::to_string(u.ncomp()) + " components on a " +
                            std::to_string(d) + "-dimensional grid");
    ScalarField out(u.grid());
    for (int a = 0; a < d; ++a) out += partial_derivative(u[a], a, scheme);
    return out;
}

}  // namespace rsflow
