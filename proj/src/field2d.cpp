#include "mpnls/field2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mpnls/errors.hpp"
#include "mpnls/operators.hpp"

namespace mpnls {

Grid2D make_grid2d(int n) {
    if (n < 16 || n % 2 != 0) throw std::invalid_argument("grid2d: n must be even and >= 16");
    Grid2D g;
    g.n = n;
    return g;
}

double State2D::sup_norm() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        worst = std::max(worst, std::hypot(p[i], q[i]));
    }
    return worst;
}

Solver2D::Solver2D(const Grid2D& grid, const ModelSpec& model, const SpectralMap& map,
                   const Solver2DOptions& opts)
    : grid_(grid), model_(model), map_(map), opts_(opts) {
    const int n = grid_.n;
    const int nk = n * (n / 2 + 1);
    real_buf_.resize(n * n);
    spec_buf_.resize(nk);
    auto* sp = reinterpret_cast<fftw_complex*>(spec_buf_.data());
    fwd_ = fftw_plan_dft_r2c_2d(n, n, real_buf_.data(), sp, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(n, n, sp, real_buf_.data(), FFTW_ESTIMATE);

    // physical wavenumber of bin m is (2 pi / side) * signed(m)
    const double kunit = 2.0 * M_PI / grid_.side;
    const double eps2 = model_.epsilon * model_.epsilon;
    lap_mult_.resize(nk);
    dealias_mask_.resize(nk);
    const int kcut = n / 3;
    for (int j = 0; j < n; ++j) {
        const int mj = j <= n / 2 ? j : j - n;
        for (int i = 0; i <= n / 2; ++i) {
            const double kx = kunit * i;
            const double ky = kunit * mj;
            const int bin = j * (n / 2 + 1) + i;
            lap_mult_[bin] = -eps2 * (kx * kx + ky * ky) / (n * n);
            dealias_mask_[bin] =
                (std::abs(mj) > kcut || i > kcut) ? 0.0 : 1.0 / (n * n);
        }
    }
    const int nn = n * n;
    w_.resize(nn);
    gp_.resize(nn);
    gm_.resize(nn);
    scratch_.resize(nn);
    lap_p_.resize(nn);
    lap_q_.resize(nn);
    mq_.resize(nn);
}

Solver2D::~Solver2D() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
}

void Solver2D::spectral_scale(const Vec& in, Vec& out, const Vec& multiplier) {
    const int n = grid_.n;
    std::copy(in.data(), in.data() + n * n, real_buf_.data());
    fftw_execute(fwd_);
    const int nk = n * (n / 2 + 1);
    for (int b = 0; b < nk; ++b) spec_buf_[b] *= multiplier[b];
    fftw_execute(bwd_);
    out.resize(n * n);
    std::copy(real_buf_.data(), real_buf_.data() + n * n, out.data());
}

void Solver2D::minus_eps2_laplacian(const Vec& f, Vec& out) {
    spectral_scale(f, out, lap_mult_);
    out = -out;
}

void Solver2D::dealias_filter(Vec& f) { spectral_scale(f, f, dealias_mask_); }

void Solver2D::rhs(const Vec& p, const Vec& q, Vec& dp, Vec& dq) {
    const int nn = grid_.n * grid_.n;
    for (int i = 0; i < nn; ++i) {
        w_[i] = p[i] * p[i] + q[i] * q[i];
        gp_[i] = model_.g_plus(w_[i]);
        gm_[i] = model_.g_minus(w_[i]);
    }
    minus_eps2_laplacian(q, lap_q_);
    minus_eps2_laplacian(p, lap_p_);

    // dp = N_- q
    dp.resize(nn);
    for (int i = 0; i < nn; ++i) dp[i] = lap_q_[i] + gm_[i] * q[i];

    // M q = S(N_-) q, matrix-free
    if (map_.kind == MapKind::Constant) {
        mq_ = map_.beta_minus * q;
    } else {
        MatVec apply = [this](const Vec& v) {
            Vec out;
            const_cast<Solver2D*>(this)->minus_eps2_laplacian(v, out);
            for (Eigen::Index i = 0; i < v.size(); ++i) out[i] += gm_[i] * v[i];
            return out;
        };
        LanczosResult lr = apply_funcalc_lanczos(apply, map_, q, opts_.lanczos_k_max,
                                                 opts_.lanczos_tol);
        if (!lr.converged) {
            throw NumericalFailure("rhs_eval: Lanczos application of the filter did not converge");
        }
        mq_ = lr.value;
    }

    dq.resize(nn);
    for (int i = 0; i < nn; ++i) dq[i] = -(lap_p_[i] + gp_[i] * p[i]) - mq_[i];

    if (opts_.dealias) {
        dealias_filter(dp);
        dealias_filter(dq);
    }
}

double Solver2D::dt_bound(const State2D& state) const {
    const double kmax = (2.0 * M_PI / grid_.side) * (grid_.n / 2);
    const double eps2 = model_.epsilon * model_.epsilon;
    const double smax = std::max(1.0, state.sup_norm());
    const double wmax = 1.1 * smax * smax;
    double gbound = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double w = wmax * i / 100.0;
        gbound = std::max({gbound, std::abs(model_.g_plus(w)), std::abs(model_.g_minus(w))});
    }
    return opts_.cfl_safety / (eps2 * kmax * kmax + map_.beta_plus + gbound);
}

void Solver2D::step_rk4(State2D& state, double dt) {
    const int nn = grid_.n * grid_.n;
    static thread_local Vec k1p, k1q, k2p, k2q, k3p, k3q, k4p, k4q, tp, tq;
    rhs(state.p, state.q, k1p, k1q);
    tp = state.p + 0.5 * dt * k1p;
    tq = state.q + 0.5 * dt * k1q;
    rhs(tp, tq, k2p, k2q);
    tp = state.p + 0.5 * dt * k2p;
    tq = state.q + 0.5 * dt * k2q;
    rhs(tp, tq, k3p, k3q);
    tp = state.p + dt * k3p;
    tq = state.q + dt * k3q;
    rhs(tp, tq, k4p, k4q);
    const double c = dt / 6.0;
    for (int i = 0; i < nn; ++i) {
        state.p[i] += c * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        state.q[i] += c * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
    }
    state.time += dt;
    if (state.sup_norm() > opts_.blowup_threshold) {
        throw NumericalFailure("step_rk4: blow-up detector tripped at t=" +
                               std::to_string(state.time));
    }
}

// ---- initialization --------------------------------------------------------

namespace {

double point_segment_distance(double px, double py, double ax, double ay, double bx,
                              double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

double interp_front(const FrontProfile& front, double z) {
    const Grid1D& g = front.grid;
    if (z <= g.nodes[0]) return -1.0;
    if (z >= g.nodes[g.n - 1]) return 1.0;
    // 4-point Lagrange on the uniform grid
    int i = static_cast<int>((z - g.nodes[0]) / g.h);
    i = std::clamp(i, 1, g.n - 3);
    const double t = (z - g.nodes[i]) / g.h;
    const double fm1 = front.values[i - 1], f0 = front.values[i], f1 = front.values[i + 1],
                 f2 = front.values[i + 2];
    return fm1 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + f0 * ((t * t - 1.0) * (t - 2.0) / 2.0) +
           f1 * (-t * (t + 1.0) * (t - 2.0) / 2.0) + f2 * (t * (t * t - 1.0) / 6.0);
}

} // namespace

State2D init_from_curve(const Grid2D& grid, const CurveState& curve,
                        const FrontProfile& front, double epsilon) {
    const int m = curve.size();
    const int n = grid.n;
    const double clearance = 5.0 * epsilon;

    double extent = 0.0;
    for (int j = 0; j < m; ++j) {
        extent = std::max({extent, std::abs(curve.x[j]), std::abs(curve.y[j])});
    }
    if (extent > 0.5 * grid.side - clearance) {
        throw std::invalid_argument("init_from_curve: curve too close to the periodic boundary");
    }
    if (has_self_intersection(curve)) {
        throw std::invalid_argument("init_from_curve: curve self-intersects");
    }
    // non-adjacent segments must not pinch the inner region
    for (int i = 0; i < m; ++i) {
        const int i1 = (i + 1) % m;
        for (int j = i + 2; j < m; ++j) {
            if (i == 0 && j == m - 1) continue;
            const int j1 = (j + 1) % m;
            const double d = std::min(
                {point_segment_distance(curve.x[i], curve.y[i], curve.x[j], curve.y[j],
                                        curve.x[j1], curve.y[j1]),
                 point_segment_distance(curve.x[i1], curve.y[i1], curve.x[j], curve.y[j],
                                        curve.x[j1], curve.y[j1]),
                 point_segment_distance(curve.x[j], curve.y[j], curve.x[i], curve.y[i],
                                        curve.x[i1], curve.y[i1])});
            if (d < 2.0 * clearance) {
                throw std::invalid_argument(
                    "init_from_curve: curve within 10 eps of self-intersection");
            }
        }
    }

    State2D s;
    s.grid = grid;
    s.p.resize(n * n);
    s.q = Vec::Zero(n * n);

    // interior/exterior by scanline crossing parity
    std::vector<std::vector<double>> crossings(n);
    for (int jy = 0; jy < n; ++jy) {
        const double y = grid.y(jy);
        for (int e = 0; e < m; ++e) {
            const int e1 = (e + 1) % m;
            const double y0 = curve.y[e], y1 = curve.y[e1];
            if ((y0 <= y) == (y1 <= y)) continue;
            const double t = (y - y0) / (y1 - y0);
            crossings[jy].push_back(curve.x[e] + t * (curve.x[e1] - curve.x[e]));
        }
        std::sort(crossings[jy].begin(), crossings[jy].end());
    }

    for (int jy = 0; jy < n; ++jy) {
        const double y = grid.y(jy);
        for (int ix = 0; ix < n; ++ix) {
            const double x = grid.x(ix);
            double dist = std::numeric_limits<double>::infinity();
            for (int e = 0; e < m; ++e) {
                const int e1 = (e + 1) % m;
                dist = std::min(dist, point_segment_distance(x, y, curve.x[e], curve.y[e],
                                                             curve.x[e1], curve.y[e1]));
            }
            const auto& cr = crossings[jy];
            const auto it = std::upper_bound(cr.begin(), cr.end(), x);
            const bool inside = ((it - cr.begin()) % 2) == 1;
            const double d = inside ? -dist : dist;
            s.p[grid.idx(ix, jy)] = interp_front(front, d / epsilon);
        }
    }
    return s;
}

// ---- contour extraction ----------------------------------------------------

namespace {

struct EdgeKey {
    int axis;  // 0: between (i,j)-(i+1,j), 1: between (i,j)-(i,j+1)
    int i, j;
    bool operator<(const EdgeKey& o) const {
        return std::tie(axis, i, j) < std::tie(o.axis, o.i, o.j);
    }
};

struct Crossing {
    double x, y;
};

} // namespace

std::vector<ContourLine> extract_zero_contours(const Grid2D& grid, const Vec& field) {
    const int n = grid.n;
    auto f = [&](int i, int j) { return field[grid.idx(i, j)]; };

    std::map<EdgeKey, Crossing> points;
    auto crossing_on = [&](const EdgeKey& key) -> Crossing {
        auto it = points.find(key);
        if (it != points.end()) return it->second;
        double x0 = grid.x(key.i), y0 = grid.y(key.j);
        double v0 = f(key.i, key.j);
        double x1 = key.axis == 0 ? grid.x(key.i + 1) : x0;
        double y1 = key.axis == 1 ? grid.y(key.j + 1) : y0;
        double v1 = key.axis == 0 ? f(key.i + 1, key.j) : f(key.i, key.j + 1);
        const double t = v0 / (v0 - v1);
        Crossing c{x0 + t * (x1 - x0), y0 + t * (y1 - y0)};
        points[key] = c;
        return c;
    };

    // segments as pairs of edge keys
    std::vector<std::pair<EdgeKey, EdgeKey>> segments;
    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            const double v00 = f(i, j), v10 = f(i + 1, j), v01 = f(i, j + 1),
                         v11 = f(i + 1, j + 1);
            int code = (v00 > 0.0 ? 1 : 0) | (v10 > 0.0 ? 2 : 0) | (v11 > 0.0 ? 4 : 0) |
                       (v01 > 0.0 ? 8 : 0);
            if (code == 0 || code == 15) continue;
            const EdgeKey bottom{0, i, j}, top{0, i, j + 1}, left{1, i, j}, right{1, i + 1, j};
            auto add = [&](EdgeKey a, EdgeKey b) { segments.emplace_back(a, b); };
            switch (code) {
                case 1: case 14: add(left, bottom); break;
                case 2: case 13: add(bottom, right); break;
                case 3: case 12: add(left, right); break;
                case 4: case 11: add(right, top); break;
                case 6: case 9: add(bottom, top); break;
                case 7: case 8: add(left, top); break;
                case 5: case 10: {
                    const double center = 0.25 * (v00 + v10 + v01 + v11);
                    const bool center_pos = center > 0.0;
                    if ((code == 5) == center_pos) {
                        add(left, bottom);
                        add(right, top);
                    } else {
                        add(left, top);
                        add(bottom, right);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // stitch segments into chains through shared edges
    std::map<EdgeKey, std::vector<std::size_t>> by_edge;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        by_edge[segments[s].first].push_back(s);
        by_edge[segments[s].second].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    std::vector<ContourLine> lines;
    for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<EdgeKey> chain{segments[s0].first, segments[s0].second};
        used[s0] = true;
        bool closed = false;
        for (int dir = 0; dir < 2 && !closed; ++dir) {
            while (true) {
                const EdgeKey tail = dir == 0 ? chain.back() : chain.front();
                std::size_t next = segments.size();
                for (std::size_t cand : by_edge[tail]) {
                    if (!used[cand]) {
                        next = cand;
                        break;
                    }
                }
                if (next == segments.size()) break;
                used[next] = true;
                const EdgeKey other = !(segments[next].first < tail) && !(tail < segments[next].first)
                                          ? segments[next].second
                                          : segments[next].first;
                if (dir == 0) {
                    chain.push_back(other);
                } else {
                    chain.insert(chain.begin(), other);
                }
                const bool loop = !(chain.front() < chain.back()) && !(chain.back() < chain.front());
                if (loop) {
                    closed = true;
                    chain.pop_back();
                    break;
                }
            }
        }
        ContourLine line;
        line.closed = closed;
        line.x.reserve(chain.size());
        line.y.reserve(chain.size());
        for (const auto& key : chain) {
            Crossing c = crossing_on(key);
            line.x.push_back(c.x);
            line.y.push_back(c.y);
        }
        const std::size_t np = line.x.size();
        for (std::size_t k = 0; k + 1 < np; ++k) {
            line.length += std::hypot(line.x[k + 1] - line.x[k], line.y[k + 1] - line.y[k]);
        }
        if (closed && np > 1) {
            line.length += std::hypot(line.x[0] - line.x[np - 1], line.y[0] - line.y[np - 1]);
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

CircleFit fit_circle(const ContourLine& line) {
    // Kasa algebraic fit: x^2 + y^2 + a x + b y + c = 0
    const std::size_t np = line.x.size();
    Mat a(np, 3);
    Vec rhs(np);
    for (std::size_t k = 0; k < np; ++k) {
        a(k, 0) = line.x[k];
        a(k, 1) = line.y[k];
        a(k, 2) = 1.0;
        rhs[k] = -(line.x[k] * line.x[k] + line.y[k] * line.y[k]);
    }
    Vec sol = (a.transpose() * a).ldlt().solve(a.transpose() * rhs);
    CircleFit fit;
    fit.cx = -0.5 * sol[0];
    fit.cy = -0.5 * sol[1];
    fit.radius = std::sqrt(std::max(0.25 * (sol[0] * sol[0] + sol[1] * sol[1]) - sol[2], 0.0));
    double acc = 0.0;
    for (std::size_t k = 0; k < np; ++k) {
        const double r = std::hypot(line.x[k] - fit.cx, line.y[k] - fit.cy);
        acc += (r - fit.radius) * (r - fit.radius);
    }
    fit.rms_residual = std::sqrt(acc / np);
    return fit;
}

InterfaceTrace run_and_trace(Solver2D& solver, State2D& state, const RunOptions2D& run,
                             const SnapshotCallback& on_snapshot) {
    InterfaceTrace trace;
    const double dt_max = solver.dt_bound(state);
    double dt = run.dt > 0.0 ? run.dt : dt_max;
    if (dt > dt_max * 1.0001) {
        throw std::invalid_argument("run_and_trace: dt exceeds the stability bound");
    }

    int prev_loops = -1;
    auto record = [&]() {
        std::vector<ContourLine> lines = extract_zero_contours(state.grid, state.p);
        TraceRow2D row;
        row.t = state.time;
        int closed_loops = 0;
        const ContourLine* main_line = nullptr;
        for (const auto& l : lines) {
            row.length += l.length;
            if (l.closed) {
                ++closed_loops;
                if (!main_line || l.length > main_line->length) main_line = &l;
            }
        }
        row.loops = closed_loops;
        if (closed_loops == 1 && main_line) {
            CircleFit fit = fit_circle(*main_line);
            row.radius = fit.radius;
            row.radius_residual = fit.rms_residual;
        } else {
            row.radius = std::numeric_limits<double>::quiet_NaN();
            row.radius_residual = std::numeric_limits<double>::quiet_NaN();
        }
        if (prev_loops >= 0 && closed_loops != prev_loops) {
            trace.events.push_back("topology change to " + std::to_string(closed_loops) +
                                   " loops at t=" + std::to_string(state.time));
        }
        prev_loops = closed_loops;
        trace.rows.push_back(row);
        if (on_snapshot) on_snapshot(state, lines);
    };

    record();
    double next_snapshot = run.snapshot_every;
    const double t_final = state.time + run.t_end;
    while (state.time < t_final - 1e-12) {
        const double step = std::min(dt, t_final - state.time);
        solver.step_rk4(state, step);
        if (run.snapshot_every > 0.0 && state.time >= next_snapshot - 1e-9) {
            record();
            next_snapshot += run.snapshot_every;
        }
    }
    if (trace.rows.empty() || trace.rows.back().t < state.time - 1e-12) record();
    return trace;
}

} // namespace mpnls
