#include "rsflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsflow/errors.hpp"

namespace rsflow {

Grid::Grid(std::vector<int> dims, std::vector<double> length)
    : dims_(std::move(dims)), length_(std::move(length)) {
    if (dims_.empty()) throw ContractError("Grid: dimension must be at least 1");
    if (length_.empty()) length_.assign(dims_.size(), kTwoPi);
    if (length_.size() != dims_.size())
        throw ContractError("Grid: length has " + std::to_string(length_.size()) +
                            " entries for " + std::to_string(dims_.size()) + " axes");
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        if (dims_[a] < kMinGridPoints)
            throw ContractError("Grid: axis " + std::to_string(a + 1) + " has " +
                                std::to_string(dims_[a]) + " points; at least " +
                                std::to_string(kMinGridPoints) + " are required");
        if (!(length_[a] > 0.0) || !std::isfinite(length_[a]))
            throw ContractError("Grid: box length must be positive and finite");
    }
    spacing_.resize(dims_.size());
    strides_.resize(dims_.size());
    std::size_t s = 1;
    for (std::size_t a = dims_.size(); a-- > 0;) {
        strides_[a] = s;
        s *= static_cast<std::size_t>(dims_[a]);
        spacing_[a] = length_[a] / dims_[a];
    }
    size_ = s;
}

Grid Grid::cube(int d, int n, double length) {
    return Grid(std::vector<int>(static_cast<std::size_t>(d), n),
                std::vector<double>(static_cast<std::size_t>(d), length));
}

double Grid::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

double Grid::cell_volume() const {
    double v = 1.0;
    for (double h : spacing_) v *= h;
    return v;
}

std::size_t Grid::flat_index(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        int i = idx[a] % dims_[a];
        if (i < 0) i += dims_[a];
        flat += static_cast<std::size_t>(i) * strides_[a];
    }
    return flat;
}

void Grid::unravel(std::size_t flat, std::span<int> idx) const {
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        idx[a] = static_cast<int>(flat / strides_[a]);
        flat %= strides_[a];
    }
}

void Grid::node_point(std::size_t flat, std::span<double> x) const {
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        x[a] = static_cast<double>(flat / strides_[a]) * spacing_[a];
        flat %= strides_[a];
    }
}

Grid Grid::leading(int naxes) const {
    if (naxes < 1 || naxes > dim()) throw ContractError("Grid::leading: axis count out of range");
    return Grid(std::vector<int>(dims_.begin(), dims_.begin() + naxes),
                std::vector<double>(length_.begin(), length_.begin() + naxes));
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw ContractError(std::string(where) + ": fields live on different grids");
}

}  // namespace rsflow
