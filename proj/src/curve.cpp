#include "mpnls/curve.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>

#include "mpnls/errors.hpp"

namespace mpnls {

namespace {

// periodic spectral derivatives in the marker parameter (period 2 pi)
struct FourierDiff {
    int m = 0;
    std::vector<double> scratch;
    std::vector<std::complex<double>> spec;
    fftw_plan fwd = nullptr, bwd = nullptr;

    explicit FourierDiff(int m_) : m(m_), scratch(m_), spec(m_ / 2 + 1) {
        auto* sp = reinterpret_cast<fftw_complex*>(spec.data());
        fwd = fftw_plan_dft_r2c_1d(m, scratch.data(), sp, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(m, sp, scratch.data(), FFTW_ESTIMATE);
    }
    ~FourierDiff() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    FourierDiff(const FourierDiff&) = delete;

    Vec derivative(const Vec& f, int order) {
        for (int i = 0; i < m; ++i) scratch[i] = f[i];
        fftw_execute(fwd);
        const int nk = m / 2 + 1;
        for (int k = 0; k < nk; ++k) {
            double re = spec[k].real(), im = spec[k].imag();
            for (int o = 0; o < order; ++o) {
                const double nre = -k * im;
                const double nim = k * re;
                re = nre;
                im = nim;
            }
            if (order % 2 == 1 && m % 2 == 0 && k == m / 2) re = im = 0.0;
            spec[k] = {re / m, im / m};
        }
        fftw_execute(bwd);
        Vec out(m);
        for (int i = 0; i < m; ++i) out[i] = scratch[i];
        return out;
    }
};

FourierDiff& diff_for(int m) {
    static std::map<int, std::unique_ptr<FourierDiff>> cache;
    auto it = cache.find(m);
    if (it == cache.end()) {
        it = cache.emplace(m, std::make_unique<FourierDiff>(m)).first;
    }
    return *it->second;
}

} // namespace

CurveState make_circle(double radius, double cx, double cy, int markers) {
    CurveState c;
    c.x.resize(markers);
    c.y.resize(markers);
    for (int j = 0; j < markers; ++j) {
        const double th = 2.0 * M_PI * j / markers;
        c.x[j] = cx + radius * std::cos(th);
        c.y[j] = cy + radius * std::sin(th);
    }
    return c;
}

CurveState make_ellipse(double a, double b, int markers) {
    CurveState c;
    c.x.resize(markers);
    c.y.resize(markers);
    for (int j = 0; j < markers; ++j) {
        const double th = 2.0 * M_PI * j / markers;
        c.x[j] = a * std::cos(th);
        c.y[j] = b * std::sin(th);
    }
    return c;
}

CurveState perturb_circle_mode(const CurveState& circle, double cx, double cy, int mode,
                               double amp) {
    CurveState c = circle;
    for (int j = 0; j < c.size(); ++j) {
        const double dx = circle.x[j] - cx, dy = circle.y[j] - cy;
        const double r = std::hypot(dx, dy);
        const double th = std::atan2(dy, dx);
        const double rn = r + amp * std::cos(mode * th);
        c.x[j] = cx + rn * std::cos(th);
        c.y[j] = cy + rn * std::sin(th);
    }
    return c;
}

CurveGeometry curvature_and_laplacian(const CurveState& curve) {
    const int m = curve.size();
    if (m < 64) throw std::invalid_argument("curvature_and_laplacian: need at least 64 markers");
    FourierDiff& fd = diff_for(m);

    Vec xt = fd.derivative(curve.x, 1), yt = fd.derivative(curve.y, 1);
    Vec xtt = fd.derivative(curve.x, 2), ytt = fd.derivative(curve.y, 2);

    CurveGeometry geo;
    geo.kappa.resize(m);
    geo.nx.resize(m);
    geo.ny.resize(m);
    Vec sigma(m);
    for (int j = 0; j < m; ++j) {
        sigma[j] = std::hypot(xt[j], yt[j]);
        const double s3 = sigma[j] * sigma[j] * sigma[j];
        geo.kappa[j] = (xt[j] * ytt[j] - yt[j] * xtt[j]) / s3;
        geo.nx[j] = yt[j] / sigma[j];
        geo.ny[j] = -xt[j] / sigma[j];
    }

    // Laplace-Beltrami: (1/sigma) d/dtheta ( (1/sigma) dkappa/dtheta )
    Vec kt = fd.derivative(geo.kappa, 1);
    Vec inner(m);
    for (int j = 0; j < m; ++j) inner[j] = kt[j] / sigma[j];
    Vec it = fd.derivative(inner, 1);
    geo.lap_s_kappa.resize(m);
    for (int j = 0; j < m; ++j) geo.lap_s_kappa[j] = it[j] / sigma[j];

    const double dtheta = 2.0 * M_PI / m;
    geo.length = sigma.sum() * dtheta;
    double area = 0.0;
    for (int j = 0; j < m; ++j) area += curve.x[j] * yt[j] - curve.y[j] * xt[j];
    geo.area = 0.5 * area * dtheta;

    geo.min_spacing = std::numeric_limits<double>::infinity();
    geo.max_spacing = 0.0;
    for (int j = 0; j < m; ++j) {
        const int k = (j + 1) % m;
        const double d = std::hypot(curve.x[k] - curve.x[j], curve.y[k] - curve.y[j]);
        geo.min_spacing = std::min(geo.min_spacing, d);
        geo.max_spacing = std::max(geo.max_spacing, d);
    }
    return geo;
}

namespace {

// second derivatives of the periodic cubic spline through (s_j, f_j);
// cyclic tridiagonal system solved by Thomas + Sherman-Morrison
Vec periodic_spline_m(const Vec& s, const Vec& f, double period_s) {
    const int m = static_cast<int>(f.size());
    Vec h(m), rhs(m);
    for (int j = 0; j < m; ++j) {
        const int k = (j + 1) % m;
        h[j] = s[k] - s[j] + (k == 0 ? period_s : 0.0);
    }
    Vec diag(m), lower(m), upper(m);
    for (int j = 0; j < m; ++j) {
        const int jm = (j - 1 + m) % m;
        lower[j] = h[jm] / 6.0;
        upper[j] = h[j] / 6.0;
        diag[j] = (h[jm] + h[j]) / 3.0;
        const int k = (j + 1) % m;
        rhs[j] = (f[k] - f[j]) / h[j] - (f[j] - f[jm]) / h[jm];
    }
    auto thomas = [&](const Vec& d, const Vec& b) {
        Vec c(m), x(m);
        c[0] = upper[0] / d[0];
        x[0] = b[0] / d[0];
        for (int j = 1; j < m - 1; ++j) {
            const double denom = d[j] - lower[j] * c[j - 1];
            c[j] = upper[j] / denom;
            x[j] = (b[j] - lower[j] * x[j - 1]) / denom;
        }
        const double denom = d[m - 2] - lower[m - 2] * c[m - 3];
        (void)denom;
        for (int j = m - 3; j >= 0; --j) x[j] -= c[j] * x[j + 1];
        return x;
    };
    // Sherman-Morrison over the m-1 leading unknowns; wrap couples first/last
    const int n = m - 1;
    Vec d(n), b(n), u = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        d[j] = diag[j];
        b[j] = rhs[j] - (j == 0 ? lower[0] : 0.0) * 0.0;
    }
    // eliminate the last unknown M_{m-1} through the bordered formulation:
    // solve the full cyclic system directly with dense fallback when small
    Mat a = Mat::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        a(j, j) = diag[j];
        a(j, (j - 1 + m) % m) += lower[j];
        a(j, (j + 1) % m) += upper[j];
    }
    (void)thomas;
    (void)d;
    (void)b;
    (void)u;
    return a.partialPivLu().solve(rhs);
}

double spline_eval(const Vec& s, const Vec& f, const Vec& m2, double period_s, int seg,
                   double target) {
    const int m = static_cast<int>(f.size());
    const int nxt = (seg + 1) % m;
    const double h = (nxt == 0 ? s[0] + period_s : s[nxt]) - s[seg];
    const double aa = (s[seg] + h) - target;
    const double bb = target - s[seg];
    return (m2[seg] * aa * aa * aa + m2[nxt] * bb * bb * bb) / (6.0 * h) +
           (f[seg] / h - m2[seg] * h / 6.0) * aa + (f[nxt] / h - m2[nxt] * h / 6.0) * bb;
}

} // namespace

CurveState redistribute(const CurveState& curve) {
    const int m = curve.size();
    Vec s(m);
    s[0] = 0.0;
    for (int j = 1; j < m; ++j) {
        s[j] = s[j - 1] + std::hypot(curve.x[j] - curve.x[j - 1], curve.y[j] - curve.y[j - 1]);
    }
    const double total =
        s[m - 1] + std::hypot(curve.x[0] - curve.x[m - 1], curve.y[0] - curve.y[m - 1]);

    Vec mx = periodic_spline_m(s, curve.x, total);
    Vec my = periodic_spline_m(s, curve.y, total);

    CurveState out;
    out.time = curve.time;
    out.x.resize(m);
    out.y.resize(m);
    int seg = 0;
    for (int k = 0; k < m; ++k) {
        const double target = total * k / m;
        while (seg + 1 < m && s[seg + 1] <= target) ++seg;
        out.x[k] = spline_eval(s, curve.x, mx, total, seg, target);
        out.y[k] = spline_eval(s, curve.y, my, total, seg, target);
    }
    return out;
}

bool has_self_intersection(const CurveState& curve) {
    const int m = curve.size();
    auto seg = [&](int j, double& ax, double& ay, double& bx, double& by) {
        ax = curve.x[j];
        ay = curve.y[j];
        bx = curve.x[(j + 1) % m];
        by = curve.y[(j + 1) % m];
    };
    auto orient = [](double ax, double ay, double bx, double by, double cx, double cy) {
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    };
    for (int i = 0; i < m; ++i) {
        double a1x, a1y, b1x, b1y;
        seg(i, a1x, a1y, b1x, b1y);
        for (int j = i + 2; j < m; ++j) {
            if (i == 0 && j == m - 1) continue;  // neighbors through the wrap
            double a2x, a2y, b2x, b2y;
            seg(j, a2x, a2y, b2x, b2y);
            const double o1 = orient(a1x, a1y, b1x, b1y, a2x, a2y);
            const double o2 = orient(a1x, a1y, b1x, b1y, b2x, b2y);
            const double o3 = orient(a2x, a2y, b2x, b2y, a1x, a1y);
            const double o4 = orient(a2x, a2y, b2x, b2y, b1x, b1y);
            if (o1 * o2 < 0.0 && o3 * o4 < 0.0) return true;
        }
    }
    return false;
}

CurveEvolveResult evolve(const CurveState& curve, const CoefficientReport& coefficients,
                         const CurveEvolveOptions& opts) {
    CurveEvolveResult res;
    CurveState state = redistribute(curve);

    const double eps2 = coefficients.epsilon * coefficients.epsilon;
    CurveGeometry geo0 = curvature_and_laplacian(state);
    const double ds = geo0.min_spacing;
    double bound;
    if (coefficients.nu > 0.0) {
        bound = opts.stability_safety * std::pow(ds, 4) / (eps2 * coefficients.nu);
        bound = std::min(bound,
                         opts.stability_safety * ds * ds / std::max(std::abs(coefficients.alpha1), 1e-12));
    } else {
        bound = opts.stability_safety * ds * ds / std::max(std::abs(coefficients.alpha1), 1e-12);
    }
    double dt = opts.dT > 0.0 ? opts.dT : bound;
    if (dt > bound * 1.0001) {
        throw std::invalid_argument("evolve: dT exceeds the stability bound");
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(opts.T_end / dt)));
    dt = opts.T_end / steps;

    auto velocity = [&](const CurveState& c, Vec& vx, Vec& vy) {
        CurveGeometry g = curvature_and_laplacian(c);
        const int m = c.size();
        vx.resize(m);
        vy.resize(m);
        for (int j = 0; j < m; ++j) {
            const double v = normal_velocity(coefficients, g.kappa[j], g.lap_s_kappa[j],
                                             opts.alpha3);
            vx[j] = v * g.nx[j];
            vy[j] = v * g.ny[j];
        }
    };

    double next_trace = 0.0;
    auto record = [&](const CurveState& c) {
        CurveGeometry g = curvature_and_laplacian(c);
        res.trace.push_back({c.time, g.length, g.area, g.kappa.minCoeff(), g.kappa.maxCoeff()});
    };
    record(state);
    next_trace = opts.trace_every;

    Vec k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
    for (int step = 0; step < steps; ++step) {
        CurveState tmp = state;
        velocity(state, k1x, k1y);
        tmp.x = state.x + 0.5 * dt * k1x;
        tmp.y = state.y + 0.5 * dt * k1y;
        velocity(tmp, k2x, k2y);
        tmp.x = state.x + 0.5 * dt * k2x;
        tmp.y = state.y + 0.5 * dt * k2y;
        velocity(tmp, k3x, k3y);
        tmp.x = state.x + dt * k3x;
        tmp.y = state.y + dt * k3y;
        velocity(tmp, k4x, k4y);
        state.x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        state.y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        state.time += dt;
        state = redistribute(state);

        if (opts.intersection_check_every > 0 && (step + 1) % opts.intersection_check_every == 0) {
            if (has_self_intersection(state)) {
                res.event = "self-intersection at T=" + std::to_string(state.time);
                break;
            }
        }
        if (opts.trace_every <= 0.0 || state.time >= next_trace - 1e-12) {
            record(state);
            next_trace += opts.trace_every;
        }
    }
    if (res.trace.empty() || res.trace.back().time != state.time) record(state);
    res.final_state = state;
    return res;
}

CrossValidation cross_validate(const std::vector<std::pair<double, double>>& pde_length,
                               const std::vector<CurveTraceRow>& curve_trace,
                               double time_scale) {
    if (pde_length.size() < 2 || curve_trace.size() < 2) {
        throw std::invalid_argument("cross_validate: traces too short");
    }
    CrossValidation cv;
    cv.time_scale = time_scale;
    const double t_lo = pde_length.front().first, t_hi = pde_length.back().first;
    for (const auto& row : curve_trace) {
        const double t = row.time / time_scale;  // lab time of this curve sample
        if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
        // linear interpolation in the PDE trace
        std::size_t k = 1;
        while (k + 1 < pde_length.size() && pde_length[k].first < t) ++k;
        const auto& [ta, la] = pde_length[k - 1];
        const auto& [tb, lb] = pde_length[k];
        const double w = (tb - ta) > 0.0 ? (t - ta) / (tb - ta) : 0.0;
        const double l_pde = la + w * (lb - la);
        const double gap = std::abs(l_pde - row.length) / std::max(row.length, 1e-12);
        cv.max_relative_gap = std::max(cv.max_relative_gap, gap);
        ++cv.compared_points;
    }
    if (cv.compared_points == 0) {
        throw std::invalid_argument("cross_validate: traces cover disjoint time windows");
    }
    return cv;
}

} // namespace mpnls
