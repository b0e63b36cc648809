// rsflow command-line driver.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rsflow/errors.hpp"
#include "rsflow/rsf.hpp"
#include "rsflow/rsff_io.hpp"
#include "rsflow/solver.hpp"
#include "rsflow/verify.hpp"

using namespace rsflow;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;

std::vector<int> to_zero_based(const std::vector<int>& perm) {
    std::vector<int> out;
    for (int a : perm) out.push_back(a - 1);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ContractError("cannot write " + path);
    f << text;
}

int cmd_plan(int d, bool json, const std::vector<int>& perm) {
    if (d < 3) throw ContractError("plan: d must be >= 3 (the decomposition is stated for d >= 3)");
    const auto order = to_zero_based(perm);
    const DecompPlan plan = decomposition_plan(d, order);
    if (json)
        std::cout << plan_json(plan).dump(2) << "\n";
    else
        std::cout << plan_text(plan) << "\n";
    return kPass;
}

int cmd_check_rsf(const std::string& path, const std::vector<int>& perm, double tol) {
    const FieldFile f = read_rsff(std::filesystem::path(path));
    const int d = f.field.grid().dim();
    if (f.field.ncomp() < d) throw ContractError("check-rsf: file has fewer components than dimensions");
    VectorField u(f.field.grid(), d);
    for (int a = 0; a < d; ++a) u[a] = f.field[a];
    const auto order = to_zero_based(perm);
    const ZeroPattern z = zero_pattern(d, order);
    const auto v = rsf_violations(u, z);
    nlohmann::json j;
    j["d"] = d;
    j["time"] = f.time;
    j["max_violation"] = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    auto& entries = j["entries"] = nlohmann::json::array();
    for (std::size_t i = 0; i < v.size(); ++i)
        entries.push_back({{"component", z.required_zero[i].first + 1}, {"axis", z.required_zero[i].second + 1}, {"max_abs", v[i]}});
    std::cout << j.dump(2) << "\n";
    return j["max_violation"].get<double>() <= tol ? kPass : kFail;
}

int cmd_simulate(const std::string& config_path, const std::string& out) {
    const SolverConfig c = load_config(config_path);
    const RunResult r = simulate_to_directory(c, out);
    std::cout << "steps " << r.steps << ", dt " << r.dt << ", t " << r.final_state.time << "\n";
    return kPass;
}

struct FrozenFlags {
    std::string snapshots, config, report, csv;
    std::vector<int> resolutions;
    int particle_steps = 0;
    int stride = 4;
    int substeps = 8;
    double max_error = 1e-4;
    double min_order = 2.5;
    bool wrong_velocity = false;
    bool nearest = false;
};

int cmd_verify_frozen(const FrozenFlags& f) {
    const Interpolation scheme = f.nearest ? Interpolation::nearest : Interpolation::lagrange4;
    nlohmann::json report;
    bool ok = true;
    if (!f.resolutions.empty()) {
        FrozenOptions o;
        if (!f.config.empty()) {
            o.config = load_config(f.config);
        } else {
            o.config.mode = SolverMode::kinematic_tg;
            o.config.t_end = 1.0;
            o.config.kmax = 1;
            o.config.seed = 1;
        }
        o.snapshot_stride = f.stride;
        o.substeps_per_n = f.substeps;
        o.scheme = scheme;
        o.wrong_velocity = f.wrong_velocity;
        const VerificationReport rep = convergence_study(o, f.resolutions);
        report = rep.to_json();
        if (!f.csv.empty()) write_text(f.csv, rep.to_csv());
        for (const auto& fit : rep.fits) {
            std::cout << "order " << (fit.below_floor ? std::nan("") : fit.order()) << "\n";
            ok = ok && !fit.below_floor && fit.order() >= f.min_order;
        }
        for (const auto& c : rep.runs.back().components) ok = ok && c.l2_rel <= f.max_error;
    } else if (!f.snapshots.empty()) {
        const VelocityHistory h = load_snapshot_history(f.snapshots);
        const int N = h.grid().dims(0);
        const int steps = f.particle_steps > 0 ? f.particle_steps : std::max(4, N / std::max(1, f.substeps));
        const FrozenRun r = frozen_in_from_history(h, steps, scheme);
        report = frozen_run_json(r);
        for (const auto& c : r.components) ok = ok && c.l2_rel <= f.max_error;
    } else {
        throw ContractError("verify-frozen: give --snapshots or --resolutions");
    }
    report["pass"] = ok;
    const std::string text = report.dump(2) + "\n";
    if (!f.report.empty())
        write_text(f.report, text);
    else
        std::cout << text;
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kPass : kFail;
}

int cmd_verify_identities(const std::vector<int>& dims, int seeds, bool inject, double tol, const std::string& report) {
    const IdentitySuite s = identity_suite(dims, seeds, inject ? LemmaMode::inject_violation : LemmaMode::standard);
    nlohmann::json j = identity_json(s);
    const bool ok = s.max_discrepancy <= tol;
    j["pass"] = ok;
    if (!report.empty()) write_text(report, j.dump(2) + "\n");
    std::printf("max discrepancy %.3e over %zu rows: %s\n", s.max_discrepancy, s.rows.size(), ok ? "PASS" : "FAIL");
    return ok ? kPass : kFail;
}

int cmd_canonical(const std::vector<double>& entries, int random_d, int trials, std::uint64_t seed, bool gradient,
                  double tol) {
    if (random_d > 0) {
        const RoundTrip r = canonical_round_trip(random_d, trials, seed);
        const bool ok = r.rate_error <= tol && r.defect <= tol;
        std::printf("d=%d trials=%d rate_error=%.3e defect=%.3e %s\n", r.d, r.trials, r.rate_error, r.defect,
                    ok ? "PASS" : "FAIL");
        return ok ? kPass : kFail;
    }
    const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(entries.size()))));
    if (n < 1 || static_cast<std::size_t>(n * n) != entries.size())
        throw ContractError("canonical: --matrix needs d*d row-major entries");
    Eigen::MatrixXd A(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) A(r, c) = entries[static_cast<std::size_t>(r * n + c)];
    nlohmann::json j;
    if (gradient) {
        const auto [D, W] = sym_antisym_split(A);
        A = W;
        j["D_frobenius"] = D.norm();
    }
    j.update(canonical_json(canonical_antisymmetric(A)));
    std::cout << j.dump(2) << "\n";
    return kPass;
}

/// Banded colors, coldest to warmest, spread over the five-entry palette.
std::array<unsigned char, 3> band_color(std::size_t band, std::size_t nbands) {
    static constexpr std::array<std::array<unsigned char, 3>, 5> palette = {{
        {{33, 102, 172}}, {{146, 197, 222}}, {{247, 247, 247}}, {{244, 165, 130}}, {{178, 24, 43}}}};
    if (nbands <= 1) return palette[2];
    const double s = static_cast<double>(band) / static_cast<double>(nbands - 1);
    return palette[static_cast<std::size_t>(std::lround(s * 4.0))];
}

int cmd_slice_image(const std::string& path, const std::string& component, int axis3, const std::string& out,
                    std::vector<double> levels) {
    const FieldFile f = read_rsff(std::filesystem::path(path));
    const Grid& g = f.field.grid();
    if (g.dim() != 3) throw ContractError("slice-image: snapshot must be three-dimensional");
    static const std::vector<std::string> names = {"u1", "u2", "u3", "rho"};
    const auto it = std::find(names.begin(), names.end(), component);
    if (it == names.end()) throw ContractError("slice-image: component must be u1, u2, u3 or rho");
    const int c = static_cast<int>(it - names.begin());
    if (c >= f.field.ncomp()) throw ContractError("slice-image: component missing from the file");
    const auto shape = g.dims();
    if (axis3 < 0 || axis3 >= shape[2]) throw ContractError("slice-image: axis3 index out of range");
    const ScalarField& s = f.field[c];
    if (levels.empty()) {
        // five symmetric bands about the mean, scaled by the deviation amplitude
        double mean = 0.0;
        for (double v : s.values()) mean += v;
        mean /= static_cast<double>(s.values().size());
        double amp = 0.0;
        for (double v : s.values()) amp = std::max(amp, std::abs(v - mean));
        for (double q : {-0.6, -0.2, 0.2, 0.6}) levels.push_back(mean + q * amp);
    }
    if (!std::is_sorted(levels.begin(), levels.end())) throw ContractError("slice-image: levels must increase");
    std::ofstream img(out, std::ios::binary);
    if (!img) throw ContractError("cannot write " + out);
    // rows run along x2 (top = largest), columns along x1
    img << "P6\n" << shape[0] << " " << shape[1] << "\n255\n";
    const std::size_t nbands = levels.size() + 1;
    for (int j = shape[1] - 1; j >= 0; --j)
        for (int i = 0; i < shape[0]; ++i) {
            const std::array<int, 3> idx = {i, j, axis3};
            const double v = s[g.flat_index(idx)];
            const auto band = static_cast<std::size_t>(std::upper_bound(levels.begin(), levels.end(), v) - levels.begin());
            const auto rgb = band_color(band, nbands);
            img.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
    return kPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rsflow: real Schur flow decomposition, simulation and frozen-in verification"};
    app.require_subcommand(1);

    int plan_d = 3;
    bool plan_as_json = false;
    std::vector<int> perm;
    auto* plan = app.add_subcommand("plan", "Print the component decomposition for dimension d");
    plan->add_option("--d", plan_d, "Spatial dimension")->required();
    plan->add_flag("--json", plan_as_json, "JSON output");
    plan->add_option("--permutation", perm, "Physical axis (1-based) at each RSF position")->delimiter(',');

    std::string rsf_file;
    double rsf_tol = 1e-12;
    auto* check = app.add_subcommand("check-rsf", "Check the RSF zero pattern of a velocity snapshot");
    check->add_option("--snapshot", rsf_file, "RSFF file")->required()->check(CLI::ExistingFile);
    check->add_option("--permutation", perm, "Physical axis (1-based) at each RSF position")->delimiter(',');
    check->add_option("--tol", rsf_tol, "Largest tolerated violation");

    std::string config, out_dir;
    auto* sim = app.add_subcommand("simulate", "Run the solver and write snapshots");
    sim->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out_dir, "Output directory")->required();

    FrozenFlags ff;
    auto* frozen = app.add_subcommand("verify-frozen", "Pullback verification of the frozen-in laws");
    frozen->add_option("--snapshots", ff.snapshots, "Snapshot directory from simulate");
    frozen->add_option("--resolutions", ff.resolutions, "Run a convergence study at these N instead")->delimiter(',');
    frozen->add_option("--config", ff.config, "Solver config for the study (default: kinematic_tg, T=1)");
    frozen->add_option("--report", ff.report, "JSON report path (stdout when absent)");
    frozen->add_option("--csv", ff.csv, "CSV table path (study only)");
    frozen->add_option("--particle-steps", ff.particle_steps, "RK4 particle steps (snapshots mode)");
    frozen->add_option("--stride", ff.stride, "Solver steps between snapshots (study)");
    frozen->add_option("--substeps-per-n", ff.substeps, "Particle steps are N / this");
    frozen->add_option("--max-error", ff.max_error, "Largest normalized L2 error at the finest N");
    frozen->add_option("--min-order", ff.min_order, "Smallest fitted order");
    frozen->add_flag("--wrong-velocity", ff.wrong_velocity, "Advect with u1 and u2 swapped (negative control)");
    frozen->add_flag("--nearest", ff.nearest, "Nearest-node interpolation (degraded control)");
    frozen->get_option("--snapshots")->excludes("--resolutions");

    std::vector<int> id_dims = {3, 4, 5, 6, 7, 8};
    int id_seeds = 20;
    bool inject = false;
    double id_tol = 1e-12;
    std::string id_report;
    auto* ids = app.add_subcommand("verify-identities", "Exact-derivative identity suite");
    ids->add_option("--d", id_dims, "Dimensions")->delimiter(',');
    ids->add_option("--seeds", id_seeds, "Seeds per dimension");
    ids->add_flag("--inject-violation", inject, "Break the Lemma-1 hypothesis (negative control)");
    ids->add_option("--tol", id_tol, "Largest tolerated discrepancy");
    ids->add_option("--report", id_report, "JSON report path");

    std::vector<double> matrix;
    int random_d = 0, trials = 100;
    std::uint64_t can_seed = 0;
    bool gradient = false;
    double can_tol = 1e-10;
    auto* can = app.add_subcommand("canonical", "Canonical rotation planes and rates of an antisymmetric matrix");
    can->add_option("--matrix", matrix, "Row-major entries")->delimiter(',');
    can->add_flag("--gradient", gradient, "Input is a velocity gradient; use its antisymmetric part");
    can->add_option("--random", random_d, "Round-trip random trials in this dimension instead");
    can->add_option("--trials", trials, "Number of random trials");
    can->add_option("--seed", can_seed, "Seed for random trials");
    can->add_option("--tol", can_tol, "Round-trip tolerance");

    std::string snap, component = "u1", ppm;
    int axis3 = 0;
    std::vector<double> levels;
    auto* slice = app.add_subcommand("slice-image", "Banded PPM of one x3 slice");
    slice->add_option("--snapshot", snap, "RSFF snapshot")->required()->check(CLI::ExistingFile);
    slice->add_option("--component", component, "u1, u2, u3 or rho");
    slice->add_option("--axis3", axis3, "x3 index of the slice");
    slice->add_option("--out", ppm, "Output PPM")->required();
    slice->add_option("--levels", levels, "Band boundaries")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*plan) return cmd_plan(plan_d, plan_as_json, perm);
        if (*check) return cmd_check_rsf(rsf_file, perm, rsf_tol);
        if (*sim) return cmd_simulate(config, out_dir);
        if (*frozen) return cmd_verify_frozen(ff);
        if (*ids) return cmd_verify_identities(id_dims, id_seeds, inject, id_tol, id_report);
        if (*can) return cmd_canonical(matrix, random_d, trials, can_seed, gradient, can_tol);
        if (*slice) return cmd_slice_image(snap, component, axis3, ppm, levels);
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
