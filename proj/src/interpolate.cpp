#include "rsflow/interpolate.hpp"

#include <array>
#include <cmath>

#include "rsflow/errors.hpp"

namespace rsflow {
namespace {

// Points closer than this to a node (in index units) are snapped onto it,
// so node coordinates reproduce stored values bit-exactly.
constexpr double kSnapTolerance = 1e-10;

struct AxisWeights {
    int count = 0;
    std::array<std::size_t, 4> index{};
    std::array<double, 4> weight{};
};

AxisWeights axis_weights(double x, double h, int n, Interpolation scheme) {
    double s = x / h;
    s -= std::floor(s / n) * n;
    const double r = std::nearbyint(s);
    if (std::abs(s - r) <= kSnapTolerance) s = r;
    if (s >= n) s -= n;
    const double base = std::floor(s);
    const double t = s - base;
    const int b = static_cast<int>(base);
    auto wrap = [n](int i) { return static_cast<std::size_t>(((i % n) + n) % n); };

    AxisWeights w;
    switch (scheme) {
        case Interpolation::lagrange4:
            w.count = 4;
            for (int k = 0; k < 4; ++k) w.index[static_cast<std::size_t>(k)] = wrap(b - 1 + k);
            w.weight[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
            w.weight[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
            w.weight[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
            w.weight[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
            break;
        case Interpolation::linear:
            w.count = 2;
            w.index[0] = wrap(b);
            w.index[1] = wrap(b + 1);
            w.weight[0] = 1.0 - t;
            w.weight[1] = t;
            break;
        case Interpolation::nearest:
            w.count = 1;
            w.index[0] = wrap(t < 0.5 ? b : b + 1);
            w.weight[0] = 1.0;
            break;
    }
    return w;
}

}  // namespace

InterpolationStencil::InterpolationStencil(const Grid& grid, std::span<const double> point, Interpolation scheme) {
    reset(grid, point, scheme);
}

void InterpolationStencil::reset(const Grid& grid, std::span<const double> point, Interpolation scheme) {
    const int d = grid.dim();
    if (static_cast<int>(point.size()) != d) throw ContractError("interpolate: point dimension mismatch");
    offsets_.assign(1, 0);
    weights_.assign(1, 1.0);
    for (int a = 0; a < d; ++a) {
        const AxisWeights w = axis_weights(point[static_cast<std::size_t>(a)], grid.spacing(a), grid.dims(a), scheme);
        const std::size_t prev = offsets_.size();
        const std::size_t stride = grid.stride(a);
        offsets_.resize(prev * static_cast<std::size_t>(w.count));
        weights_.resize(prev * static_cast<std::size_t>(w.count));
        // Expand from the back so earlier entries are read before being overwritten.
        for (std::size_t p = prev; p-- > 0;) {
            const std::size_t off = offsets_[p];
            const double wt = weights_[p];
            for (int k = w.count; k-- > 0;) {
                const std::size_t dst = p * static_cast<std::size_t>(w.count) + static_cast<std::size_t>(k);
                offsets_[dst] = off + w.index[static_cast<std::size_t>(k)] * stride;
                weights_[dst] = wt * w.weight[static_cast<std::size_t>(k)];
            }
        }
    }
}

void SeparableStencil::reset(const Grid& grid, std::span<const double> point, Interpolation scheme) {
    const int d = grid.dim();
    if (static_cast<int>(point.size()) != d) throw ContractError("interpolate: point dimension mismatch");
    if (d > kMaxDim) throw ContractError("SeparableStencil: dimension above 8");
    dim_ = d;
    for (int a = 0; a < d; ++a) {
        const auto sa = static_cast<std::size_t>(a);
        const AxisWeights w = axis_weights(point[sa], grid.spacing(a), grid.dims(a), scheme);
        count_ = w.count;
        for (int k = 0; k < w.count; ++k) {
            const auto sk = static_cast<std::size_t>(k);
            offset_[sa][sk] = w.index[sk] * grid.stride(a);
            weight_[sa][sk] = w.weight[sk];
        }
    }
}

void SeparableStencil::apply_many(std::span<const double* const> fields, std::span<double> out) const {
    const std::size_t nf = fields.size();
    for (std::size_t f = 0; f < nf; ++f) out[f] = 0.0;
    const int last = dim_ - 1;
    const auto sl = static_cast<std::size_t>(last);
    // Base offsets and weights of every combination of the leading axes.
    std::array<std::size_t, 16384> base;  // 4^7 combinations at most
    std::array<double, 16384> wt;
    std::size_t ncomb = 1;
    base[0] = 0;
    wt[0] = 1.0;
    for (int a = 0; a < last; ++a) {
        const auto sa = static_cast<std::size_t>(a);
        if (ncomb * static_cast<std::size_t>(count_) > base.size()) throw ContractError("SeparableStencil: too many points");
        for (std::size_t c = ncomb; c-- > 0;)
            for (int k = count_; k-- > 0;) {
                const auto sk = static_cast<std::size_t>(k);
                base[c * static_cast<std::size_t>(count_) + sk] = base[c] + offset_[sa][sk];
                wt[c * static_cast<std::size_t>(count_) + sk] = wt[c] * weight_[sa][sk];
            }
        ncomb *= static_cast<std::size_t>(count_);
    }
    const auto& lo = offset_[sl];
    const auto& lw = weight_[sl];
    if (count_ == 4) {
        const std::size_t o0 = lo[0], o1 = lo[1], o2 = lo[2], o3 = lo[3];
        const double w0 = lw[0], w1 = lw[1], w2 = lw[2], w3 = lw[3];
        for (std::size_t f = 0; f < nf; ++f) {
            const double* p = fields[f];
            double acc = 0.0;
            for (std::size_t c = 0; c < ncomb; ++c) {
                const double* row = p + base[c];
                acc += wt[c] * (w0 * row[o0] + w1 * row[o1] + w2 * row[o2] + w3 * row[o3]);
            }
            out[f] = acc;
        }
        return;
    }
    for (std::size_t f = 0; f < nf; ++f) {
        const double* p = fields[f];
        double acc = 0.0;
        for (std::size_t c = 0; c < ncomb; ++c) {
            const double* row = p + base[c];
            double s = 0.0;
            for (int k = 0; k < count_; ++k) s += lw[static_cast<std::size_t>(k)] * row[lo[static_cast<std::size_t>(k)]];
            acc += wt[c] * s;
        }
        out[f] = acc;
    }
}

double interpolate(const ScalarField& f, std::span<const double> point, Interpolation scheme) {
    return InterpolationStencil(f.grid(), point, scheme).apply(f);
}

}  // namespace rsflow
