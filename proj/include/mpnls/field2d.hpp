#pragma once

#include <fftw3.h>

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "mpnls/curve.hpp"
#include "mpnls/model.hpp"

namespace mpnls {

// Periodic square [-2pi, 2pi]^2, n nodes per side (even), row-major fields.
struct Grid2D {
    int n = 0;
    double side = 4.0 * M_PI;

    double h() const { return side / n; }
    double x(int i) const { return -0.5 * side + h() * i; }
    double y(int j) const { return -0.5 * side + h() * j; }
    int idx(int i, int j) const { return j * n + i; }
};

Grid2D make_grid2d(int n);

struct State2D {
    Grid2D grid;
    Vec p, q;
    double time = 0.0;

    double sup_norm() const;
};

struct TraceRow2D {
    double t = 0.0;
    double length = 0.0;
    double radius = 0.0;           // least-squares circle fit; NaN if not a single loop
    double radius_residual = 0.0;
    int loops = 0;
};

struct InterfaceTrace {
    std::vector<TraceRow2D> rows;
    std::vector<std::string> events;  // topology changes, recorded not fatal
};

// One marching-squares polyline; closed when the chain returns to its start.
struct ContourLine {
    std::vector<double> x, y;
    bool closed = false;
    double length = 0.0;
};

std::vector<ContourLine> extract_zero_contours(const Grid2D& grid, const Vec& field);

struct CircleFit {
    double cx = 0.0, cy = 0.0, radius = 0.0, rms_residual = 0.0;
};
CircleFit fit_circle(const ContourLine& line);

struct Solver2DOptions {
    int lanczos_k_max = 60;
    double lanczos_tol = 1e-8;
    bool dealias = false;  // 2/3-rule filter on the evaluated rates
    double blowup_threshold = 4.0;
    double cfl_safety = 0.8;
};

// Pseudospectral evaluation of U_t = (N_- q, -N_+ p - S(N_-) q) with the
// Fourier Laplacian and pointwise nonlinear potentials; the down-down filter
// is applied matrix-free through Lanczos (exact shortcut for constant maps).
class Solver2D {
  public:
    Solver2D(const Grid2D& grid, const ModelSpec& model, const SpectralMap& map,
             const Solver2DOptions& opts = {});
    ~Solver2D();
    Solver2D(const Solver2D&) = delete;

    void rhs(const Vec& p, const Vec& q, Vec& dp, Vec& dq);
    void step_rk4(State2D& state, double dt);
    double dt_bound(const State2D& state) const;

    // -eps^2 lap f, exposed for dispersion checks
    void minus_eps2_laplacian(const Vec& f, Vec& out);

    const Grid2D& grid() const { return grid_; }
    const ModelSpec& model() const { return model_; }
    const SpectralMap& map() const { return map_; }

  private:
    void spectral_scale(const Vec& in, Vec& out, const Vec& multiplier);
    void dealias_filter(Vec& f);

    Grid2D grid_;
    ModelSpec model_;
    SpectralMap map_;
    Solver2DOptions opts_;

    Vec lap_mult_;   // -(kx^2 + ky^2) eps^2 per r2c bin
    Vec dealias_mask_;
    std::vector<double> real_buf_;
    std::vector<std::complex<double>> spec_buf_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
    Vec w_, gp_, gm_, scratch_, lap_p_, lap_q_, mq_;
};

// p = phi(d/eps) with d the signed distance to the curve (negative inside),
// q = 0. The curve must clear the domain boundary and itself by 5 eps.
State2D init_from_curve(const Grid2D& grid, const CurveState& curve,
                        const FrontProfile& front, double epsilon);

using SnapshotCallback = std::function<void(const State2D&, const std::vector<ContourLine>&)>;

struct RunOptions2D {
    double t_end = 100.0;
    double snapshot_every = 10.0;  // trace cadence; field snapshots via callback
    double dt = 0.0;               // 0: stability bound
};

InterfaceTrace run_and_trace(Solver2D& solver, State2D& state, const RunOptions2D& run,
                             const SnapshotCallback& on_snapshot = nullptr);

} // namespace mpnls
