#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "mpnls/config.hpp"
#include "mpnls/curve.hpp"
#include "mpnls/errors.hpp"
#include "mpnls/field2d.hpp"
#include "mpnls/io.hpp"
#include "mpnls/reduction.hpp"
#include "mpnls/spectrum.hpp"

namespace {

using namespace mpnls;

int cmd_front(const RunConfig& cfg) {
    Grid1D grid = make_grid1d(cfg.half_width, cfg.n_front);
    ModelSpec model = cfg.model();
    FrontProfile front = front_solve(model, grid);

    CsvWriter csv(output_path(cfg, "front.csv"), cfg.to_json(), {"z", "phi", "dphi"});
    for (int i = 0; i < grid.n; ++i) {
        csv.row({grid.nodes[i], front.values[i], front.derivative[i]});
    }
    csv.close();
    write_f64(output_path(cfg, "front.f64"), {&grid.nodes, &front.values, &front.derivative});
    write_sidecar(output_path(cfg, "front.json"),
                  std::string("{\"version\":\"") + kArtifactVersion +
                      "\",\"fields\":[\"z\",\"phi\",\"dphi\"],\"n\":" + std::to_string(grid.n) +
                      ",\"config\":" + cfg.to_json() + "}");

    const double parity = parity_defect(front.values, -1);
    const double end_defect =
        std::max(std::abs(front.values[0] + 1.0), std::abs(front.values[grid.n - 1] - 1.0));
    std::printf("front: residual=%.3e parity=%.3e endpoints=%.3e\n", front.residual_norm,
                parity, end_defect);
    if (front.residual_norm > 1e-9 || parity > 1e-10 || end_defect > 1e-8) {
        throw InvariantViolation("front profile invariants failed");
    }
    if (cfg.half_width < 15.0) {
        std::printf("front: warning, half_width too small for the truncation target\n");
    }
    return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
    Grid1D grid = make_grid1d(cfg.half_width, cfg.n_spectrum);
    ModelSpec model = cfg.model();
    SpectralMap map = cfg.map();
    FrontProfile front = front_solve(model, grid);
    Linearization1D lin = build_linearization(model, front, map);
    KernelPair kp = kernel_pair(lin);
    BlockOperator block = assemble_L(lin);
    SpectrumReport report = full_spectrum(block, lin);

    CsvWriter csv(output_path(cfg, "spectrum.csv"), cfg.to_json(), {"re", "im"});
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
        csv.row({report.eigenvalues[i].real(), report.eigenvalues[i].imag()});
    }
    csv.close();

    CsvWriter summary(output_path(cfg, "spectrum_summary.csv"), cfg.to_json(),
                      {"gap", "ess_bound", "kernel_abs", "kernel_residual", "adjoint_residual",
                       "max_complex_real"});
    summary.row({report.gap, report.ess_bound, report.kernel_abs, kp.kernel_residual,
                 kp.adjoint_residual, report.max_complex_real});
    summary.close();

    CsvWriter fred(output_path(cfg, "fredholm.csv"), cfg.to_json(),
                   {"k", "re_plus", "im_plus", "re_minus", "im_minus"});
    for (int i = 0; i <= 400; ++i) {
        const double k = 10.0 * i / 400.0;
        auto [lp, lm] = fredholm_boundary(model, map, k);
        fred.row({k, lp.real(), lp.imag(), lm.real(), lm.imag()});
    }
    fred.close();

    std::printf("spectrum: kernel=%d gap=%.6f ess_bound=%.6f\n", report.kernel_count,
                report.gap, report.ess_bound);
    if (report.gap <= 0.0) throw InvariantViolation("spectral gap is not positive");
    return 0;
}

int cmd_coeffs(const RunConfig& cfg, bool require_list) {
    std::vector<double> mus = cfg.mu_list;
    if (mus.empty()) {
        if (require_list) throw std::invalid_argument("sweep requires mu_list");
        mus.push_back(cfg.mu);
    }
    Grid1D grid = make_grid1d(cfg.half_width, cfg.n_spectrum);
    SpectralMap map = cfg.map();

    CsvWriter csv(output_path(cfg, "coeffs.csv"), cfg.to_json(),
                  {"mu", "alpha1", "alpha1_asym", "nu", "nu_asym", "gap"});
    for (double mu : mus) {
        CoefficientReport rep = compute_coefficients(mu, cfg.epsilon, map, grid);
        double gap = std::numeric_limits<double>::quiet_NaN();
        if (cfg.with_gap) {
            ModelSpec model = build_reference_model(mu, cfg.epsilon);
            FrontProfile front = front_solve(model, grid);
            Linearization1D lin = build_linearization(model, front, map);
            gap = full_spectrum(assemble_L(lin), lin).gap;
        }
        csv.row({rep.mu, rep.alpha1, rep.alpha1_asymptotic, rep.nu, rep.nu_asymptotic, gap});
        std::printf("coeffs: mu=%+.4f alpha1=%+.6e nu=%.6f\n", mu, rep.alpha1, rep.nu);
    }
    csv.close();
    return 0;
}

int cmd_simulate2d(const RunConfig& cfg) {
    Grid2D grid = make_grid2d(cfg.n2d);
    ModelSpec model = cfg.model();
    SpectralMap map = cfg.map();
    Grid1D fgrid = make_grid1d(cfg.half_width, cfg.n_front);
    FrontProfile front = front_solve(model, fgrid);

    CurveState seed = make_circle(cfg.radius, cfg.center_x, cfg.center_y, cfg.markers);
    if (cfg.perturb_mode > 0 && cfg.perturb_amp != 0.0) {
        seed = perturb_circle_mode(seed, cfg.center_x, cfg.center_y, cfg.perturb_mode,
                                   cfg.perturb_amp);
    }
    State2D state = init_from_curve(grid, seed, front, cfg.epsilon);

    Solver2DOptions sopts;
    sopts.lanczos_k_max = cfg.lanczos_k_max;
    sopts.lanczos_tol = cfg.lanczos_tol;
    sopts.dealias = cfg.dealias;
    Solver2D solver(grid, model, map, sopts);

    int snapshot_index = 0;
    SnapshotCallback cb = [&](const State2D& s, const std::vector<ContourLine>& lines) {
        const std::string tag = "snapshot_" + std::to_string(snapshot_index);
        write_f64(output_path(cfg, tag + ".f64"), {&s.p, &s.q});
        std::ostringstream sc;
        sc << "{\"version\":\"" << kArtifactVersion << "\",\"fields\":[\"p\",\"q\"],\"n\":"
           << s.grid.n << ",\"time\":" << format_double(s.time)
           << ",\"config\":" << cfg.to_json() << "}";
        write_sidecar(output_path(cfg, tag + ".json"), sc.str());
        Vec mod(s.p.size());
        for (Eigen::Index i = 0; i < s.p.size(); ++i) mod[i] = std::hypot(s.p[i], s.q[i]);
        write_pgm(output_path(cfg, tag + ".pgm"), mod, s.grid.n, s.grid.n);
        CsvWriter poly(output_path(cfg, tag + "_contour.csv"), cfg.to_json(),
                       {"loop", "x", "y"});
        for (std::size_t l = 0; l < lines.size(); ++l) {
            for (std::size_t k = 0; k < lines[l].x.size(); ++k) {
                poly.row({static_cast<double>(l), lines[l].x[k], lines[l].y[k]});
            }
        }
        poly.close();
        ++snapshot_index;
    };

    RunOptions2D run;
    run.t_end = cfg.t_end;
    run.snapshot_every = cfg.snapshot_every;
    run.dt = cfg.dt;
    InterfaceTrace trace = run_and_trace(solver, state, run, cb);

    CsvWriter csv(output_path(cfg, "trace.csv"), cfg.to_json(),
                  {"t", "length", "radius", "radius_residual", "loops"});
    for (const auto& row : trace.rows) {
        csv.row({row.t, row.length, row.radius, row.radius_residual,
                 static_cast<double>(row.loops)});
    }
    for (const auto& e : trace.events) csv.raw_row("# event: " + e);
    csv.close();
    std::printf("simulate2d: %zu trace rows, %zu events, final t=%.3f\n", trace.rows.size(),
                trace.events.size(), state.time);
    return 0;
}

std::vector<std::pair<double, double>> read_trace_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::pair<double, double>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column row
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        if (vals.size() >= 2) rows.emplace_back(vals[0], vals[1]);
    }
    return rows;
}

int cmd_curveflow(const RunConfig& cfg, const std::string& pde_trace_path, double time_scale) {
    Grid1D grid = make_grid1d(cfg.half_width, cfg.n_spectrum);
    SpectralMap map = cfg.map();
    CoefficientReport coeffs = compute_coefficients(cfg.mu, cfg.epsilon, map, grid);

    CurveState seed = make_circle(cfg.radius, cfg.center_x, cfg.center_y, cfg.markers);
    if (cfg.perturb_mode > 0 && cfg.perturb_amp != 0.0) {
        seed = perturb_circle_mode(seed, cfg.center_x, cfg.center_y, cfg.perturb_mode,
                                   cfg.perturb_amp);
    }

    CurveEvolveOptions opts;
    opts.T_end = cfg.curve_T_end;
    opts.dT = cfg.curve_dT;
    opts.alpha3 = cfg.alpha3;
    opts.trace_every = cfg.curve_T_end / 200.0;
    CurveEvolveResult result = evolve(seed, coeffs, opts);

    CsvWriter csv(output_path(cfg, "curve_trace.csv"), cfg.to_json(),
                  {"T", "length", "area", "kappa_min", "kappa_max"});
    for (const auto& row : result.trace) {
        csv.row({row.time, row.length, row.area, row.kappa_min, row.kappa_max});
    }
    if (!result.event.empty()) csv.raw_row("# event: " + result.event);
    csv.close();

    CsvWriter poly(output_path(cfg, "curve_final.csv"), cfg.to_json(), {"x", "y"});
    for (int j = 0; j < result.final_state.size(); ++j) {
        poly.row({result.final_state.x[j], result.final_state.y[j]});
    }
    poly.close();

    std::printf("curveflow: alpha1=%+.6e nu=%.6f rows=%zu %s\n", coeffs.alpha1, coeffs.nu,
                result.trace.size(), result.event.c_str());

    if (!pde_trace_path.empty()) {
        const double scale = time_scale > 0.0 ? time_scale : cfg.epsilon * cfg.epsilon;
        CrossValidation cv =
            cross_validate(read_trace_csv(pde_trace_path), result.trace, scale);
        CsvWriter cvw(output_path(cfg, "crossval.csv"), cfg.to_json(),
                      {"time_scale", "max_relative_gap", "compared_points"});
        cvw.row({cv.time_scale, cv.max_relative_gap, static_cast<double>(cv.compared_points)});
        cvw.close();
        std::printf("crossval: max gap %.4f over %d points\n", cv.max_relative_gap,
                    cv.compared_points);
        if (cv.max_relative_gap > 0.10) {
            throw InvariantViolation("cross-validation discrepancy above 10%");
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modal PNLS numerical laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string pde_trace_path;
    double time_scale = 0.0;
    RunConfig overrides;

    app.add_option("--config", config_path, "JSON configuration file");
    auto* o_mu = app.add_option("--mu", overrides.mu, "bifurcation parameter");
    auto* o_eps = app.add_option("--epsilon", overrides.epsilon, "interface width");
    auto* o_map = app.add_option("--map", overrides.map_kind,
                                 "spectral map kind: constant|logistic|shifted-rational");
    auto* o_bm = app.add_option("--beta-minus", overrides.beta_minus, "map lower bound");
    auto* o_bp = app.add_option("--beta-plus", overrides.beta_plus, "map upper bound");
    auto* o_hw = app.add_option("--half-width", overrides.half_width, "1D half width");
    auto* o_nf = app.add_option("--n-front", overrides.n_front, "front grid nodes (odd)");
    auto* o_ns = app.add_option("--n-spectrum", overrides.n_spectrum, "spectrum grid nodes (odd)");
    auto* o_n2 = app.add_option("--n2d", overrides.n2d, "2D nodes per side (even)");
    auto* o_te = app.add_option("--t-end", overrides.t_end, "2D run window");
    auto* o_dt = app.add_option("--dt", overrides.dt, "2D step (0: stability bound)");
    auto* o_se = app.add_option("--snapshot-every", overrides.snapshot_every, "trace cadence");
    auto* o_da = app.add_flag("--dealias", overrides.dealias, "enable the 2/3 filter");
    auto* o_mk = app.add_option("--markers", overrides.markers, "curve marker count");
    auto* o_ra = app.add_option("--radius", overrides.radius, "seed circle radius");
    auto* o_cx = app.add_option("--center-x", overrides.center_x, "seed center x");
    auto* o_cy = app.add_option("--center-y", overrides.center_y, "seed center y");
    auto* o_md = app.add_option("--mode", overrides.perturb_mode, "perturbation mode");
    auto* o_am = app.add_option("--amp", overrides.perturb_amp, "perturbation amplitude");
    auto* o_ct = app.add_option("--curve-t-end", overrides.curve_T_end, "curve run window");
    auto* o_cd = app.add_option("--curve-dt", overrides.curve_dT, "curve step (0: bound)");
    auto* o_a3 = app.add_option("--alpha3", overrides.alpha3, "cubic curvature coefficient");
    auto* o_ml = app.add_option("--mu-list", overrides.mu_list, "sweep values")->delimiter(',');
    auto* o_wg = app.add_flag("--with-gap", overrides.with_gap, "add the spectral gap column");
    auto* o_sd = app.add_option("--seed", overrides.seed, "RNG seed recorded in outputs");
    auto* o_od = app.add_option("--out", overrides.output_dir, "output directory");
    app.add_option("--pde-trace", pde_trace_path, "2D trace CSV for cross-validation");
    app.add_option("--time-scale", time_scale, "lab-time per unit curve-time (default eps^2)");

    auto* front = app.add_subcommand("front", "solve the 1D front profile");
    auto* spectrum = app.add_subcommand("spectrum", "linearized operator spectrum report");
    auto* coeffs = app.add_subcommand("coeffs", "bifurcation coefficient report");
    auto* simulate2d = app.add_subcommand("simulate2d", "2D pseudospectral run");
    auto* curveflow = app.add_subcommand("curveflow", "reduced curvature flow");
    auto* sweep = app.add_subcommand("sweep", "coefficient sweep over mu_list");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        auto apply = [&](auto* opt, auto member) {
            if (opt->count() > 0) cfg.*member = overrides.*member;
        };
        apply(o_mu, &RunConfig::mu);
        apply(o_eps, &RunConfig::epsilon);
        apply(o_map, &RunConfig::map_kind);
        apply(o_bm, &RunConfig::beta_minus);
        apply(o_bp, &RunConfig::beta_plus);
        apply(o_hw, &RunConfig::half_width);
        apply(o_nf, &RunConfig::n_front);
        apply(o_ns, &RunConfig::n_spectrum);
        apply(o_n2, &RunConfig::n2d);
        apply(o_te, &RunConfig::t_end);
        apply(o_dt, &RunConfig::dt);
        apply(o_se, &RunConfig::snapshot_every);
        apply(o_da, &RunConfig::dealias);
        apply(o_mk, &RunConfig::markers);
        apply(o_ra, &RunConfig::radius);
        apply(o_cx, &RunConfig::center_x);
        apply(o_cy, &RunConfig::center_y);
        apply(o_md, &RunConfig::perturb_mode);
        apply(o_am, &RunConfig::perturb_amp);
        apply(o_ct, &RunConfig::curve_T_end);
        apply(o_cd, &RunConfig::curve_dT);
        apply(o_a3, &RunConfig::alpha3);
        apply(o_ml, &RunConfig::mu_list);
        apply(o_wg, &RunConfig::with_gap);
        apply(o_sd, &RunConfig::seed);
        apply(o_od, &RunConfig::output_dir);
        cfg.validate();

        if (front->parsed()) return cmd_front(cfg);
        if (spectrum->parsed()) return cmd_spectrum(cfg);
        if (coeffs->parsed()) return cmd_coeffs(cfg, false);
        if (simulate2d->parsed()) return cmd_simulate2d(cfg);
        if (curveflow->parsed()) return cmd_curveflow(cfg, pde_trace_path, time_scale);
        if (sweep->parsed()) return cmd_coeffs(cfg, true);
    } catch (const mpnls::InvariantViolation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 2;
    } catch (const mpnls::NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
