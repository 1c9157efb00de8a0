// Acceptance suite: one criterion per function, each printing a single
// [PASS]/[FAIL] line with the measured numbers. Exit status is the number of
// failed criteria. Run "acceptance" for everything or "acceptance <k>".

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mpnls/curve.hpp"
#include "mpnls/field2d.hpp"
#include "mpnls/reduction.hpp"
#include "mpnls/spectrum.hpp"

using namespace mpnls;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED: ") + what;
    }
};

Linearization1D make_lin(double mu, int n, MapKind kind, double beta_minus,
                         double beta_plus, double half_width = 20.0) {
    ModelSpec model = build_reference_model(mu, 0.1);
    Grid1D grid = make_grid1d(half_width, n);
    FrontProfile front = front_solve(model, grid);
    SpectralMap map = make_spectral_map(kind, beta_minus, beta_plus, model.a_minus);
    return build_linearization(model, front, map);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), format, a, b, c);
    return buf;
}

// ---- criterion 1: front fidelity -------------------------------------------

Outcome criterion_1() {
    Outcome out;
    const auto t0 = clock_type::now();
    ModelSpec model = build_reference_model(0.0, 0.1);
    Grid1D grid = make_grid1d(20.0, 2049);
    FrontProfile front = front_solve(model, grid);
    double worst = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        worst = std::max(worst,
                         std::abs(front.values[i] - std::tanh(grid.nodes[i] / std::sqrt(2.0))));
    }
    const double elapsed = seconds_since(t0);
    out.require(worst < 1e-8, fmt("max|phi - tanh| = %.3e (< 1e-8)", worst));
    out.require(elapsed < 5.0, fmt("runtime %.2f s (< 5 s)", elapsed));
    return out;
}

// ---- criterion 2: analytic spectra ------------------------------------------

Outcome criterion_2() {
    Outcome out;
    Grid1D grid = make_grid1d(20.0, 2049);
    for (double mu : {-0.05, -0.02, 0.0, 0.02, 0.05}) {
        ModelSpec model = build_reference_model(mu, 0.1);
        FrontProfile front = front_solve(model, grid);
        OperatorMatrix d = assemble_D(model, front);
        Eigen::SelfAdjointEigenSolver<Mat> es(d.entries, Eigen::EigenvaluesOnly);
        const double err = std::abs(es.eigenvalues()[0] - mu);
        out.require(err < 1e-5, fmt("|lambda_D(%+.2f) - mu| = %.2e", mu, err));
    }
    ModelSpec model = build_reference_model(0.0, 0.1);
    FrontProfile front = front_solve(model, grid);
    OperatorMatrix c = assemble_C(model, front);
    Eigen::SelfAdjointEigenSolver<Mat> es(c.entries, Eigen::EigenvaluesOnly);
    out.require(std::abs(es.eigenvalues()[0]) < 1e-4,
                fmt("C ground eigenvalue %.2e (|.| < 1e-4)", es.eigenvalues()[0]));
    out.require(std::abs(es.eigenvalues()[1] - 1.5) < 1e-4,
                fmt("C second eigenvalue defect %.2e (< 1e-4)",
                    std::abs(es.eigenvalues()[1] - 1.5)));
    return out;
}

// ---- criterion 3: functional-calculus triangulation -------------------------

Outcome criterion_3() {
    Outcome out;
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(2026);
    std::normal_distribution<double> gauss;
    double worst_ec = 0.0, worst_le = 0.0, worst_lc = 0.0;
    for (double mu : {-0.05, 0.0, 0.05}) {
        for (auto kind : {MapKind::Constant, MapKind::Logistic, MapKind::ShiftedRational}) {
            const double bp = kind == MapKind::Constant ? 1.0 : 2.0;
            Linearization1D lin = make_lin(mu, 101, kind, 1.0, bp, 25.0);
            OperatorMatrix via_contour =
                funcalc_contour(lin.D, lin.map, default_contour(lin.D_eigen), {.n_quad = 256});
            worst_ec = std::max(worst_ec,
                                (lin.SD.entries - via_contour.entries).cwiseAbs().maxCoeff());
            MatVec apply = [&](const Vec& v) { return Vec(lin.D.entries * v); };
            for (int rep = 0; rep < 2; ++rep) {
                Vec v(lin.grid().n);
                for (int i = 0; i < lin.grid().n; ++i) v[i] = gauss(rng);
                LanczosResult lr = apply_funcalc_lanczos(apply, lin.map, v, 80, 1e-10);
                worst_le = std::max(worst_le, (lr.value - lin.SD.entries * v).norm() / v.norm());
                worst_lc =
                    std::max(worst_lc, (lr.value - via_contour.entries * v).norm() / v.norm());
            }
        }
    }
    const double elapsed = seconds_since(t0);
    out.require(worst_ec <= 1e-8, fmt("eig-contour max diff %.2e (<= 1e-8)", worst_ec));
    out.require(worst_le <= 1e-8, fmt("lanczos-eig rel diff %.2e (<= 1e-8)", worst_le));
    out.require(worst_lc <= 1e-8, fmt("lanczos-contour rel diff %.2e (<= 1e-8)", worst_lc));
    out.require(elapsed < 30.0, fmt("runtime %.1f s (< 30 s)", elapsed));
    return out;
}

// ---- criterion 4: kernel and gap --------------------------------------------

Outcome criterion_4() {
    Outcome out;
    for (double mu : {-0.05, -0.02, 0.02, 0.05}) {
        for (auto kind : {MapKind::Constant, MapKind::Logistic, MapKind::ShiftedRational}) {
            const double bp = kind == MapKind::Constant ? 1.0 : 2.0;
            Linearization1D lin = make_lin(mu, 385, kind, 1.0, bp);
            try {
                SpectrumReport rep = full_spectrum(assemble_L(lin), lin);
                const bool ok = rep.kernel_count == 1 && rep.kernel_abs <= 1e-6 &&
                                rep.gap >= 0.05 &&
                                rep.max_complex_real < -lin.map.beta_minus / 2.0 + 1e-6;
                out.require(ok, fmt("mu=%+.2f ", mu) + lin.map.kind_name() +
                                    fmt(": kernel %.1e, gap %.4f", rep.kernel_abs, rep.gap));
            } catch (const std::exception& e) {
                out.require(false, std::string("eigensolve threw: ") + e.what());
            }
        }
    }
    return out;
}

// ---- criterion 5: essential spectrum ----------------------------------------

Outcome criterion_5() {
    Outcome out;
    ModelSpec model = build_reference_model(0.0, 0.1);
    Grid1D grid = make_grid1d(20.0, 129);
    SpectralMap one = make_spectral_map(MapKind::Constant, 1.0, 1.0, model.a_minus);
    EssentialSpectrumCheck chk = essential_spectrum_check(model, one, grid);
    out.require(chk.max_mismatch <= 1e-8,
                fmt("constant filter dispersion mismatch %.2e (<= 1e-8)", chk.max_mismatch));
    SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, model.a_minus);
    EssentialSpectrumCheck chk2 = essential_spectrum_check(model, logistic, grid);
    out.require(chk2.max_mismatch <= 1e-8,
                fmt("logistic filter dispersion mismatch %.2e (<= 1e-8)", chk2.max_mismatch));
    const double ess = lambda_m_ess(model, one);
    out.require(std::abs(ess - 0.5) < 1e-12, fmt("lambda_M,ess = %.12f (= 0.5)", ess));
    return out;
}

// ---- criterion 6: index bookkeeping -----------------------------------------

Outcome criterion_6() {
    Outcome out;
    Linearization1D lin = make_lin(-0.02, 385, MapKind::Constant, 1.0, 1.0);
    Mat dinv = dense_inverse(lin.D);
    const double h = lin.grid().h;
    const double delta = std::min(0.1, std::abs(lin.lambda_D()) / 10.0);

    const int n_d = static_cast<int>((lin.D_eigen.values.array() < 0.0).count());
    out.require(n_d == 1, fmt("n(D) = %g (= 1)", static_cast<double>(n_d)));

    ConstraintSpace cs = constraint_space(lin, 0.0);
    try {
        IndexCount ic = constrained_index(dinv, {cs.s_lambda}, delta, h);
        out.require(ic.n_constraint_matrix == 1,
                    fmt("n(A) = %g (= 1)", static_cast<double>(ic.n_constraint_matrix)));
        out.require(ic.n_formula == 0 && ic.n_direct == 0,
                    fmt("n(D^-1|_S) = %g (= 0, both routes)",
                        static_cast<double>(ic.n_formula)));
    } catch (const std::exception& e) {
        out.require(false, std::string("index computation threw: ") + e.what());
    }

    std::mt19937_64 rng(0xC0FFEE);
    std::normal_distribution<double> gauss;
    int agreed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int nc = 1 + static_cast<int>(rng() % 3);
        std::vector<Vec> cons;
        for (int c = 0; c < nc; ++c) {
            Vec v(lin.grid().n);
            for (int i = 0; i < lin.grid().n; ++i) v[i] = gauss(rng);
            cons.push_back(v);
        }
        try {
            constrained_index(dinv, cons, delta, h);  // throws on route disagreement
            ++agreed;
        } catch (const std::exception&) {
        }
    }
    out.require(agreed == 100, fmt("route agreement on %g/100 seeded cases",
                                   static_cast<double>(agreed)));
    return out;
}

// ---- criterion 7: bilinear ratios -------------------------------------------

Outcome criterion_7() {
    Outcome out;
    for (auto kind : {MapKind::Constant, MapKind::Logistic}) {
        const double bp = kind == MapKind::Constant ? 1.0 : 2.0;
        Linearization1D lin = make_lin(-0.02, 385, kind, 1.0, bp);
        for (double lambda : {0.0, 1.0, 10.0}) {
            try {
                BilinearRatioReport rep = bilinear_ratio_report(lin, lambda, 500, 0x5EED);
                const bool ok = rep.min_filter_ratio >= 1.0 * (1.0 - 1e-6) &&
                                rep.min_inverse_ratio >= 1.0 / (2.0 * bp);
                out.require(ok, lin.map.kind_name() +
                                    fmt(" lambda=%g: min ratios %.6f / %.6f", lambda,
                                        rep.min_filter_ratio, rep.min_inverse_ratio));
            } catch (const std::exception& e) {
                out.require(false, std::string("ratio sampling threw: ") + e.what());
            }
        }
    }
    return out;
}

// ---- criterion 8: bifurcation coefficients ----------------------------------

Outcome criterion_8() {
    Outcome out;
    Grid1D grid = make_grid1d(20.0, 1025);
    SpectralMap one = make_spectral_map(MapKind::Constant, 1.0, 1.0, -0.55);
    SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, -0.55);

    CoefficientReport small = compute_coefficients(0.01, 0.1, one, grid);
    out.require(std::abs(small.alpha1 / 0.01 - 1.08092) <= 0.02 * 1.08092,
                fmt("alpha1(0.01)/mu = %.5f (1.08092 within 2%%)", small.alpha1 / 0.01));
    out.require(std::abs(small.nu - 1.14648) <= 0.02 * 1.14648,
                fmt("nu(0+) = %.5f (1.14648 within 2%%)", small.nu));

    CoefficientReport small_log = compute_coefficients(0.01, 0.1, logistic, grid);
    out.require(std::abs(small_log.nu - 0.76432) <= 0.03 * 0.76432,
                fmt("nu(0+) logistic = %.5f (0.76432 within 3%%)", small_log.nu));

    bool signs = true, positive = true;
    for (double mu : {-0.05, -0.02, 0.02, 0.05}) {
        CoefficientReport rep = compute_coefficients(mu, 0.1, one, grid);
        signs = signs && (rep.alpha1 * mu > 0.0);
        positive = positive && rep.nu > 0.0;
        CoefficientReport rep_log = compute_coefficients(mu, 0.1, logistic, grid);
        signs = signs && (rep_log.alpha1 * mu > 0.0);
        positive = positive && rep_log.nu > 0.0;
    }
    out.require(signs, "sign(alpha1) = sign(mu) across the window");
    out.require(positive, "nu > 0 across |mu| <= 0.05");
    return out;
}

// ---- criterion 9: reduced-flow exactness -------------------------------------

Outcome criterion_9() {
    Outcome out;
    const auto t0 = clock_type::now();
    Grid1D grid = make_grid1d(20.0, 513);
    SpectralMap one = make_spectral_map(MapKind::Constant, 1.0, 1.0, -0.55);

    CoefficientReport shrink = compute_coefficients(0.05, 0.1, one, grid);
    CurveState circle = make_circle(1.5, 0.0, 0.0, 128);
    CurveEvolveOptions opts;
    opts.T_end = 10.0;
    opts.trace_every = 0.5;
    CurveEvolveResult res = evolve(circle, shrink, opts);
    double worst = 0.0;
    for (const auto& row : res.trace) {
        const double r_exact = std::sqrt(2.25 - 2.0 * shrink.alpha1 * row.time);
        worst = std::max(worst, std::abs(row.length / (2.0 * M_PI) - r_exact) / r_exact);
    }
    out.require(worst <= 1e-4, fmt("circle law relative error %.2e (<= 1e-4)", worst));

    CoefficientReport grow = compute_coefficients(-0.04, 0.1, one, grid);
    const double eps2 = grow.epsilon * grow.epsilon;
    const double cutoff = 3.0 * std::sqrt(-grow.alpha1 / (grow.nu * eps2));
    const int m_lo = static_cast<int>(std::floor(cutoff - 1.0));
    const int m_hi = static_cast<int>(std::ceil(cutoff + 1.0));
    auto growth = [&](int mode) {
        CurveState seed =
            perturb_circle_mode(make_circle(3.0, 0.0, 0.0, 512), 0.0, 0.0, mode, 0.01);
        auto amplitude = [&](const CurveState& c) {
            std::complex<double> acc = 0.0;
            const double cx = c.x.mean(), cy = c.y.mean();
            for (int j = 0; j < c.size(); ++j) {
                const double th = std::atan2(c.y[j] - cy, c.x[j] - cx);
                acc += std::hypot(c.x[j] - cx, c.y[j] - cy) *
                       std::exp(std::complex<double>(0.0, -mode * th));
            }
            return 2.0 * std::abs(acc) / c.size();
        };
        const double before = amplitude(seed);
        CurveEvolveOptions mopts;
        mopts.T_end = 1.0;
        mopts.trace_every = 1.0;
        CurveEvolveResult r = evolve(seed, grow, mopts);
        return amplitude(r.final_state) / before;
    };
    const double g_lo = growth(m_lo), g_hi = growth(m_hi);
    out.require(g_lo > 1.0,
                fmt("mode %g below cutoff %.2f grew by %.4f", double(m_lo), cutoff, g_lo));
    out.require(g_hi < 1.0,
                fmt("mode %g above cutoff %.2f shrank to %.4f", double(m_hi), cutoff, g_hi));
    const double elapsed = seconds_since(t0);
    out.require(elapsed < 60.0, fmt("runtime %.1f s (< 60 s)", elapsed));
    return out;
}

// ---- criterion 10: 2D phenomenology ------------------------------------------

struct Run2D {
    std::vector<TraceRow2D> rows;
    double seconds = 0.0;
};

Run2D run_2d(double mu, double t_end, double snapshot_every, const FrontProfile& front) {
    const auto t0 = clock_type::now();
    Grid2D grid = make_grid2d(512);
    ModelSpec model = build_reference_model(mu, 0.1);
    SpectralMap one = make_spectral_map(MapKind::Constant, 1.0, 1.0, model.a_minus);
    CurveState circle = make_circle(3.0, 0.0, 0.0, 256);
    State2D state = init_from_curve(grid, circle, front, 0.1);
    Solver2D solver(grid, model, one, {});
    RunOptions2D run;
    run.t_end = t_end;
    run.snapshot_every = snapshot_every;
    InterfaceTrace trace = run_and_trace(solver, state, run);
    Run2D out;
    out.rows = trace.rows;
    out.seconds = seconds_since(t0);
    return out;
}

// least-squares slope of radius^2 against t, skipping the initial transient
double r2_slope(const std::vector<TraceRow2D>& rows, double t_skip) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& row : rows) {
        if (row.t < t_skip || !(row.radius > 0.0)) continue;
        const double x = row.t, y = row.radius * row.radius;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome criterion_10() {
    Outcome out;
    ModelSpec ref = build_reference_model(0.0, 0.1);
    FrontProfile front = front_solve(ref, make_grid1d(20.0, 2049));

    Run2D shrink = run_2d(0.05, 150.0, 10.0, front);
    bool decreasing = true;
    for (std::size_t i = 1; i < shrink.rows.size(); ++i) {
        decreasing = decreasing && shrink.rows[i].length < shrink.rows[i - 1].length;
    }
    out.require(decreasing, fmt("mu=+0.05: length monotone decrease over %g snapshots (%.0f s)",
                                static_cast<double>(shrink.rows.size()), shrink.seconds));
    out.require(shrink.seconds < 1800.0, fmt("run time %.0f s (< 1800 s)", shrink.seconds));

    Run2D grow = run_2d(-0.05, 150.0, 10.0, front);
    bool increasing = true;
    for (std::size_t i = 1; i < grow.rows.size(); ++i) {
        increasing = increasing && grow.rows[i].length > grow.rows[i - 1].length;
    }
    out.require(increasing, fmt("mu=-0.05: length monotone increase over %g snapshots (%.0f s)",
                                static_cast<double>(grow.rows.size()), grow.seconds));
    out.require(grow.seconds < 1800.0, fmt("run time %.0f s (< 1800 s)", grow.seconds));

    Grid1D cgrid = make_grid1d(20.0, 1025);
    SpectralMap one = make_spectral_map(MapKind::Constant, 1.0, 1.0, -0.55);
    CoefficientReport c04 = compute_coefficients(0.04, 0.1, one, cgrid);
    CoefficientReport c02 = compute_coefficients(0.02, 0.1, one, cgrid);

    Run2D run04 = run_2d(0.04, 100.0, 2.0, front);
    Run2D run02 = run_2d(0.02, 100.0, 2.0, front);
    const double slope04 = r2_slope(run04.rows, 5.0);
    const double slope02 = r2_slope(run02.rows, 5.0);
    const double calibration = slope04 / (-2.0 * c04.alpha1);  // one global time scale
    const double predicted02 = -2.0 * c02.alpha1 * calibration;
    const double rel = std::abs(slope02 / predicted02 - 1.0);
    out.require(rel <= 0.10,
                fmt("slope ratio tracks alpha1 within %.1f%% (<= 10%%); scale factor %.4e",
                    100.0 * rel, calibration));
    out.require(run04.seconds < 1800.0 && run02.seconds < 1800.0,
                fmt("run times %.0f s / %.0f s (< 1800 s each)", run04.seconds, run02.seconds));

    // reduced flow against the PDE interface length at matched parameters
    CurveState circle = make_circle(3.0, 0.0, 0.0, 256);
    CurveEvolveOptions copts;
    copts.T_end = 100.0 * calibration;
    copts.trace_every = copts.T_end / 50.0;
    CurveEvolveResult curve = evolve(circle, c04, copts);
    std::vector<std::pair<double, double>> pde_rows;
    for (const auto& row : run04.rows) pde_rows.emplace_back(row.t, row.length);
    CrossValidation cv = cross_validate(pde_rows, curve.trace, calibration);
    out.require(cv.max_relative_gap <= 0.10,
                fmt("curve/PDE length discrepancy %.3f (<= 0.10) over %g points",
                    cv.max_relative_gap, static_cast<double>(cv.compared_points)));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    int selected = 0;
    if (argc > 1) selected = std::atoi(argv[1]);

    struct Entry {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Entry entries[] = {
        {1, "front fidelity", criterion_1},
        {2, "analytic spectra", criterion_2},
        {3, "functional-calculus triangulation", criterion_3},
        {4, "kernel and gap", criterion_4},
        {5, "essential spectrum", criterion_5},
        {6, "index bookkeeping", criterion_6},
        {7, "bilinear ratios", criterion_7},
        {8, "bifurcation coefficients", criterion_8},
        {9, "reduced-flow exactness", criterion_9},
        {10, "2D phenomenology", criterion_10},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        if (selected != 0 && entry.id != selected) continue;
        Outcome out;
        try {
            out = entry.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("unhandled exception: ") + e.what();
        }
        std::printf("[%s] criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL", entry.id,
                    entry.name, out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
