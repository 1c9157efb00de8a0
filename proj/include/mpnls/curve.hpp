#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpnls/reduction.hpp"

namespace mpnls {

// Closed marker curve, counterclockwise, near-equal arclength spacing.
struct CurveState {
    Vec x, y;
    double time = 0.0;

    int size() const { return static_cast<int>(x.size()); }
};

CurveState make_circle(double radius, double cx, double cy, int markers);
CurveState make_ellipse(double a, double b, int markers);
// radial cosine perturbation r -> r + amp cos(m theta)
CurveState perturb_circle_mode(const CurveState& circle, double cx, double cy, int mode,
                               double amp);

struct CurveGeometry {
    Vec kappa;        // curvature, positive for a counterclockwise circle
    Vec lap_s_kappa;  // Laplace-Beltrami of the curvature along the curve
    Vec nx, ny;       // outward unit normal
    double length = 0.0;
    double area = 0.0;
    double min_spacing = 0.0;
    double max_spacing = 0.0;
};

// Spectral differentiation in the periodic marker parameter with arclength
// metric factors. Markers must be ordered and reasonably equidistributed.
CurveGeometry curvature_and_laplacian(const CurveState& curve);

// Arclength reparameterization by periodic monotone cubic interpolation.
CurveState redistribute(const CurveState& curve);

bool has_self_intersection(const CurveState& curve);

struct CurveTraceRow {
    double time = 0.0;
    double length = 0.0;
    double area = 0.0;
    double kappa_min = 0.0;
    double kappa_max = 0.0;
};

struct CurveEvolveResult {
    CurveState final_state;
    std::vector<CurveTraceRow> trace;
    std::string event;  // empty, or "self-intersection" with the stop time
};

struct CurveEvolveOptions {
    double dT = 0.0;           // 0: derive from the stability bound
    double T_end = 1.0;
    double alpha3 = 0.0;
    double trace_every = 0.0;  // 0: every step
    int intersection_check_every = 10;
    double stability_safety = 0.2;
};

// Markers moved by V n with V = -alpha1 kappa + eps^2 (nu lap kappa + alpha3
// kappa^3), RK4 in time, redistribution each step.
CurveEvolveResult evolve(const CurveState& curve, const CoefficientReport& coefficients,
                         const CurveEvolveOptions& opts);

struct CrossValidation {
    double time_scale = 0.0;        // PDE lab time per unit curve time
    double max_relative_gap = 0.0;  // length-vs-time discrepancy on the overlap
    int compared_points = 0;
};

// Compare an interface-length trace from the 2D solver (lab time t) against
// a reduced-flow trace (slow time T = time_scale * t).
CrossValidation cross_validate(const std::vector<std::pair<double, double>>& pde_length,
                               const std::vector<CurveTraceRow>& curve_trace,
                               double time_scale);

} // namespace mpnls
