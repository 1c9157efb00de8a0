#pragma once

#include "mpnls/spectrum.hpp"

namespace mpnls {

// z-profiles of the first and second order corrections and the second order
// inhomogeneity. U1 has even parity, U2 and R2 odd.
struct CorrectionProfiles {
    Vec p1_bar, q1_bar;
    Vec p2_bar, q2_bar;
    Vec r2_top, r2_bottom;
    double u1_residual = 0.0;       // defect of L U1 = (alpha1 phi', -phi')
    double u2_residual = 0.0;       // defect of L U2 = alpha1 U1' - R2
    double u2_solvability = 0.0;    // adjoint pairing of the U2 inhomogeneity
    bool complete = false;
};

struct CoefficientReport {
    double mu = 0.0;
    double epsilon = 0.0;
    double alpha1 = 0.0;
    double nu = 0.0;
    double alpha1_asymptotic = 0.0;
    double nu_asymptotic = 0.0;
    bool mu_zero_extrapolated = false;
};

// alpha1 = ||phi'||^2 / <D^-1 S_D phi', phi'>
double compute_alpha1(const Linearization1D& lin);

// small-mu predictions lambda_D ||phi'||^2 / (S(lambda_D) <phi',psi>^2) and
// 1 / (<phi',psi>^2 S(lambda_D)), from the discrete eigendata
double alpha1_asymptotic(const Linearization1D& lin);
double nu_asymptotic(const Linearization1D& lin);

// q1 = alpha1 D^-1 phi', p1 solves C p1 = phi' - alpha1 D^-1 S_D phi'
// (the right side is orthogonal to phi' by the definition of alpha1)
CorrectionProfiles compute_U1(const Linearization1D& lin, double alpha1);

// Dense matrix of the parity-flipping double-resolvent operator
//   (1/2 pi i) oint S(l) R_l (d_z - 2 g_-'(phi^2) phi p1) R_l dl
// evaluated exactly through the eigendecomposition divided differences.
Mat m1_operator_eigen(const Linearization1D& lin, const Vec& p1_bar);

// Same operator applied to a vector by contour quadrature (two shifted solves
// per node); used to cross-check the eigen route.
Vec m1_apply_contour(const Linearization1D& lin, const Vec& p1_bar, const Vec& v,
                     const ContourRectangle& contour, const ContourOptions& opts = {});

// Completes the profiles with R2 and U2 = L^-1(alpha1 U1' - R2).
CorrectionProfiles compute_U2(const Linearization1D& lin, const CorrectionProfiles& u1,
                              double alpha1, const Mat& m1);

// Willmore coefficient from the adjoint solvability pairing of the surface
// diffusion terms. The pairing is normalized by ||phi'||^2 so that the
// small-mu limit equals 1/(<phi',psi>^2 S(lambda_D)).
double compute_nu(const Linearization1D& lin, const CorrectionProfiles& profiles,
                  double alpha1, const KernelPair& kp);

// V = -alpha1 kappa + eps^2 (nu lap_s kappa + alpha3 kappa^3)
double normal_velocity(const CoefficientReport& report, double kappa,
                       double lap_s_kappa, double alpha3);

// kappa_i = (-1)^i kappa0^(i+1), the curvature ladder of the inner Laplacian
double curvature_coefficient(int i, double kappa0);

// Orders 0..3 of g(|U|^2) about U = (phi, 0) with U = (phi + e p1 + e^2 p2 +
// e^3 p3, e q1 + e^2 q2 + e^3 q3); returns {G0, G1, G2, G3} per node.
std::array<Vec, 4> g_expansion_orders(const Poly3& g, const Vec& phi, const Vec& p1,
                                      const Vec& q1, const Vec& p2, const Vec& q2,
                                      const Vec& p3, const Vec& q3);

// Full pipeline at one mu: front, linearization, alpha1, U1, nu. At mu = 0
// alpha1 is the exact limit 0 and nu is extrapolated from +-mu_probe.
CoefficientReport compute_coefficients(double mu, double epsilon, const SpectralMap& map,
                                       const Grid1D& grid, double mu_probe = 1e-3);

} // namespace mpnls
