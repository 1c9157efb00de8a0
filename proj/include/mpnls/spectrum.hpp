#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "mpnls/model.hpp"
#include "mpnls/operators.hpp"

namespace mpnls {

// Everything the 1D spectral analysis reuses: the two Schrodinger blocks,
// the down eigensystem, and the filtered block S(D).
struct Linearization1D {
    ModelSpec model;
    SpectralMap map;
    FrontProfile front;
    OperatorMatrix C;
    OperatorMatrix D;
    OperatorMatrix SD;
    EigenSystem D_eigen;

    const Grid1D& grid() const { return front.grid; }
    double lambda_D() const { return D_eigen.values[0]; }
    // unit trapezoid norm, canonical nonnegative sign
    Vec ground_state() const {
        Vec psi = D_eigen.eigenfunction(0);
        if (psi.sum() < 0.0) psi = -psi;
        return psi;
    }
};

Linearization1D build_linearization(const ModelSpec& model, const FrontProfile& front,
                                    const SpectralMap& map);

// 2x2 block arrangement (0, D; -C, -S_D), size 2N.
struct BlockOperator {
    Mat matrix;
    double beta_minus = 0.0;
    double h = 0.0;
    int block_size = 0;
};

BlockOperator assemble_L(const Linearization1D& lin);

struct KernelPair {
    Vec psi0;         // (phi', 0)
    Vec psi0_dagger;  // (D^-1 S_D phi', phi') for mu != 0, (psi, 0) at mu = 0
    bool mu_zero_path = false;
    double kernel_residual = 0.0;
    double adjoint_residual = 0.0;
};

KernelPair kernel_pair(const Linearization1D& lin);

struct FredholmSample {
    double k = 0.0;
    std::complex<double> lambda_plus, lambda_minus;
};

struct SpectrumReport {
    CVec eigenvalues;             // sorted by descending real part
    CMat eigenvectors;
    int kernel_count = 0;
    double kernel_abs = 0.0;      // |lambda| of the translational eigenvalue
    double gap = 0.0;             // -max Re over non-kernel spectrum
    double ess_bound = 0.0;       // lambda_{M,ess}
    double max_complex_real = 0.0;
    std::vector<FredholmSample> fredholm_samples;

    static constexpr double kernel_tol = 1e-6;
    static constexpr double imag_tol = 1e-7;  // genuinely-complex threshold
};

SpectrumReport full_spectrum(const BlockOperator& block, const Linearization1D& lin);

// Roots of the constant-coefficient dispersion relation at wavenumber k.
std::pair<std::complex<double>, std::complex<double>>
fredholm_boundary(const ModelSpec& model, const SpectralMap& map, double k);

double fredholm_discriminant(const ModelSpec& model, const SpectralMap& map, double k);

// min(beta_-/2, c_inf g_-(1;mu)/beta_+)
double lambda_m_ess(const ModelSpec& model, const SpectralMap& map);

struct ConstraintSpace {
    double lambda = 0.0;
    Vec s_lambda;            // D^-1 (S_D + lambda) phi'
    Vec s_unit;              // trapezoid-normalized
    Mat projector;           // orthogonal projector off s_lambda

    Vec project(const Vec& v, double h) const {
        return v - h * s_unit.dot(v) * s_unit;
    }
};

ConstraintSpace constraint_space(const Linearization1D& lin, double lambda);

struct QuadraticRelation {
    double residual = 0.0;       // scaled defect of the scalar eigenvalue relation
    double root_distance = 0.0;  // distance of lambda to the nearest quadratic root
    bool degenerate = false;     // ||P1|| too small to test
};

QuadraticRelation quadratic_relation_check(const Linearization1D& lin,
                                           std::complex<double> lambda, const CVec& p1);

struct IndexCount {
    int n_unconstrained = 0;
    int n_constraint_matrix = 0;  // n(A)
    int n_formula = 0;            // n(M) - n(A)
    int n_direct = 0;             // eigensolve of the compressed operator
};

// Negative index of the bilinear form of M restricted to the orthogonal
// complement of the constraint vectors, by the index formula and by a direct
// projected eigensolve. The two routes must agree.
IndexCount constrained_index(const Mat& m, const std::vector<Vec>& constraints,
                             double delta, double h);

struct BilinearRatioReport {
    double lambda = 0.0;
    int sample_count = 0;
    std::uint64_t seed = 0;
    double min_filter_ratio = 0.0;    // <D^-1 S_D P, P> / <D^-1 P, P>
    double min_inverse_ratio = 0.0;   // <D^-1 P, P> / <D^-1 S_D P, P>
    double min_triple_ratio = 0.0;    // <D^-1 P,P><C P,P> / <D^-1 S_D P,P>^2
    double omega_sq_spectral = 0.0;   // ||phi'||_omega^2 by eigen-coefficient sum
    double omega_sq_solve = 0.0;      // same through the projected solve route
};

BilinearRatioReport bilinear_ratio_report(const Linearization1D& lin, double lambda,
                                          int sample_count, std::uint64_t seed);

// ---- constant-coefficient checks on a periodic grid ------------------------

struct EssentialSpectrumCheck {
    CVec dense_eigenvalues;
    CVec predicted;          // lambda_F at the discrete symbol values
    double max_mismatch = 0.0;
};

EssentialSpectrumCheck essential_spectrum_check(const ModelSpec& model,
                                                const SpectralMap& map,
                                                const Grid1D& periodic_grid);

// max-norm difference between the dense inverse of (L_inf - gamma) and its
// Fourier-multiplier resolvent formula.
double resolvent_identity_defect(const ModelSpec& model, const SpectralMap& map,
                                 const Grid1D& periodic_grid, double gamma);

Mat dense_inverse(const OperatorMatrix& op);

} // namespace mpnls
