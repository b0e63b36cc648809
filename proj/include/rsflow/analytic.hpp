/// @file analytic.hpp
/// @brief Closed-form fields with exact derivatives.
///
/// Every analytic field can be evaluated on doubles (values) or on Jets
/// (values plus exact first and second derivatives). The registry supplies
/// the test beds used throughout: Taylor-Green, rigid-rotation analogs,
/// seeded random trigonometric fields and exact real-Schur Euler histories.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsflow/field.hpp"
#include "rsflow/jet.hpp"
#include "rsflow/random.hpp"

namespace rsflow {

/// a cos(k.x) + b sin(k.x)
struct TrigMode {
    std::vector<int> k;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

/// A finite real trigonometric sum in d variables.
class TrigSeries {
public:
    TrigSeries() = default;
    TrigSeries(int dim, std::vector<TrigMode> modes);

    /// @p modes random terms with wavevectors in [-kmax, kmax] restricted to
    /// the first @p depends_on axes, amplitudes uniform in [-amplitude, amplitude].
    static TrigSeries random_modes(int dim, int depends_on, int kmax, int modes, double amplitude, Rng& rng);

    /// Every wavevector with |k_a| <= kmax on the leading @p depends_on axes (one
    /// per +/- pair), coefficients uniform in [-1, 1] * amplitude / sqrt(count).
    static TrigSeries band_limited(int dim, int depends_on, int kmax, double amplitude, Rng& rng);

    int dim() const { return dim_; }
    std::span<const TrigMode> modes() const { return modes_; }

    double operator()(std::span<const double> x) const;
    Jet operator()(std::span<const Jet> x) const;

    /// Fast separable evaluation on every node of @p grid (grid.dim() == dim()).
    ScalarField sample(const Grid& grid) const;

private:
    int dim_ = 0;
    std::vector<TrigMode> modes_;
};

class AnalyticField {
public:
    using DoubleEval = std::function<void(std::span<const double>, double, std::span<double>)>;
    using JetEval = std::function<void(std::span<const Jet>, double, std::span<Jet>)>;
    using GridSampler = std::function<VectorField(const Grid&, double)>;

    AnalyticField(std::string name, int dim, int ncomp, DoubleEval eval, JetEval jet_eval,
                  GridSampler sampler = {});

    /// Builds both evaluators from one generic callable f(x, t, out).
    template <class F>
    static AnalyticField from_generic(std::string name, int dim, int ncomp, F f, GridSampler sampler = {}) {
        return AnalyticField(
            std::move(name), dim, ncomp,
            [f](std::span<const double> x, double t, std::span<double> out) { f(x, t, out); },
            [f](std::span<const Jet> x, double t, std::span<Jet> out) { f(x, t, out); }, std::move(sampler));
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    int ncomp() const { return ncomp_; }

    std::vector<double> evaluate(std::span<const double> point, double t = 0.0) const;
    /// d(component)/d x_axis for every component.
    std::vector<double> derivative(std::span<const double> point, double t, int axis) const;
    /// Order-2 jets of every component at @p point.
    std::vector<Jet> jets(std::span<const double> point, double t = 0.0) const;
    std::vector<Jet> jets(std::span<const Jet> point, double t) const;

    /// Samples every component on @p grid (grid.dim() must equal dim()).
    VectorField sample(const Grid& grid, double t = 0.0) const;

private:
    std::string name_;
    int dim_;
    int ncomp_;
    DoubleEval eval_;
    JetEval jet_eval_;
    GridSampler sampler_;
};

struct AnalyticParams {
    int dim = 2;
    int ncomp = -1;           ///< defaults to dim
    std::uint64_t seed = 0;
    int kmax = 2;
    int modes = 4;            ///< trig_random terms per component
    double amplitude = 1.0;
    int depends_on = -1;      ///< leading axes the field may vary along; defaults to dim
};

/// Known names: taylor_green_2d, taylor_green_pressure, rigid_rotation,
/// trig_random, band_limited_random, rsf_shear. Throws ContractError otherwise.
AnalyticField analytic_registry(std::string_view name, const AnalyticParams& params = {});

/// Pressure of the steady Taylor-Green solution, (cos 2x1 + cos 2x2) / 4.
template <class T>
T taylor_green_pressure(std::span<const T> x) {
    return 0.25 * (cos(2.0 * x[0]) + cos(2.0 * x[1]));
}

}  // namespace rsflow
