#include "rsflow/exterior.hpp"

namespace rsflow {

VectorField velocity_from_form(const KForm& U, const Grid& grid) {
    if (U.degree() != 1) throw ContractError("velocity_from_form: degree must be 1");
    if (U.dim() != grid.dim()) throw ContractError("velocity_from_form: dimension mismatch");
    VectorField u(grid, grid.dim());
    for (const auto& [I, c] : U.terms()) {
        require_same_grid(c.grid(), grid, "velocity_from_form");
        u[I[0]] = c;
    }
    return u;
}

TensorField antisym_matrix_rep(const KForm& omega, const Grid& grid) {
    if (omega.degree() != 2) throw ContractError("antisym_matrix_rep: degree must be 2");
    if (omega.dim() != grid.dim()) throw ContractError("antisym_matrix_rep: dimension mismatch");
    const int d = grid.dim();
    TensorField A(grid, d, d);
    for (const auto& [I, c] : omega.terms()) {
        require_same_grid(c.grid(), grid, "antisym_matrix_rep");
        A(I[0], I[1]) = 0.5 * c;
        A(I[1], I[0]) = -0.5 * c;
    }
    return A;
}

std::optional<Grid> form_grid(const KForm& w) {
    if (w.empty()) return std::nullopt;
    return w.terms().begin()->second.grid();
}

}  // namespace rsflow
