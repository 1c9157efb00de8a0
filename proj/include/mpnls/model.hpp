#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mpnls/grid.hpp"

namespace mpnls {

// Cubic polynomial s -> c0 + c1 s + c2 s^2 + c3 s^3 with derivatives.
struct Poly3 {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double operator()(double s) const { return c0 + s * (c1 + s * (c2 + s * c3)); }
    double d1(double s) const { return c1 + s * (2.0 * c2 + 3.0 * s * c3); }
    double d2(double s) const { return 2.0 * c2 + 6.0 * s * c3; }
    double d3(double) const { return 6.0 * c3; }
};

// The two nonlinearities of the vector system, with the bifurcation
// parameter entering the down-channel as g_-(s; mu) = g_-(s) + mu.
struct ModelSpec {
    Poly3 g_plus_poly;   // g_+(s)
    Poly3 g_minus_poly;  // g_-(s; 0)
    double mu = 0.0;
    double epsilon = 0.1;
    double a_minus = 0.0;  // lower bound with inf g_- > a_- on the validated window
    double a_plus = 0.0;
    double mu_star = 0.1;            // window of validated claims
    bool inside_validated_window = true;

    double g_plus(double s) const { return g_plus_poly(s); }
    double g_plus_d1(double s) const { return g_plus_poly.d1(s); }
    double g_plus_d2(double s) const { return g_plus_poly.d2(s); }
    double g_plus_d3(double s) const { return g_plus_poly.d3(s); }
    double g_minus(double s) const { return g_minus_poly(s) + mu; }
    double g_minus_d1(double s) const { return g_minus_poly.d1(s); }
    double g_minus_d2(double s) const { return g_minus_poly.d2(s); }

    // far-field linearized potential of the up channel, g_+(1) + 2 g_+'(1)
    double c_infinity() const { return g_plus(1.0) + 2.0 * g_plus_d1(1.0); }
};

// g_+(s) = s - 1, g_-(s; mu) = s - 1/2 + mu. Front is tanh(z/sqrt(2)) and
// both 1D operators have closed-form spectra, so the whole pipeline has
// analytic oracles.
ModelSpec build_reference_model(double mu, double epsilon);

enum class MapKind { Constant, Logistic, ShiftedRational };

// Bounded nondecreasing scalar map applied to the down operator through the
// spectral calculus. Carries the singularities of its analytic extension so
// contour placement can be validated.
struct SpectralMap {
    MapKind kind = MapKind::Constant;
    double beta_minus = 1.0;
    double beta_plus = 1.0;
    double a_minus = 0.0;
    std::vector<std::complex<double>> pole_list;

    double operator()(double s) const;
    double deriv(double s) const;
    std::complex<double> eval_complex(std::complex<double> lambda) const;
    std::string kind_name() const;

    static constexpr double delta_pole = 0.5;  // min clearance contour <-> pole
};

SpectralMap make_spectral_map(MapKind kind, double beta_minus, double beta_plus,
                              double a_minus);
MapKind map_kind_from_string(const std::string& name);

// Discrete heteroclinic front connecting -1 to +1 (odd parity).
struct FrontProfile {
    Grid1D grid;
    Vec values;       // phi at nodes
    Vec derivative;   // phi' at nodes
    double residual_norm = 0.0;  // max-norm of the interior ODE residual
};

struct FrontSolveOptions {
    int max_iterations = 50;
    double tolerance = 1e-11;  // Newton stop on max-norm residual
};

// Newton iteration for (-d2 + g_+(phi^2)) phi = 0 with phi(+-L) = +-1 pinned
// and far-field ghost continuation. Initial guess tanh(z/sqrt(2)).
FrontProfile front_solve(const ModelSpec& model, const Grid1D& grid,
                         const FrontSolveOptions& opts = {});

} // namespace mpnls
