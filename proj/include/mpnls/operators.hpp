#pragma once

#include <complex>
#include <functional>
#include <optional>

#include "mpnls/grid.hpp"
#include "mpnls/model.hpp"

namespace mpnls {

enum class OpKind { C, D, SofD, Custom };

// Dense real symmetric discretization of a 1D Schrodinger-type operator.
struct OperatorMatrix {
    Grid1D grid;
    Mat entries;
    Vec potential;
    OpKind kind = OpKind::Custom;

    int size() const { return static_cast<int>(entries.rows()); }
    double symmetry_defect() const;
};

struct EigenSystem {
    Vec values;    // ascending
    Mat vectors;   // l2-orthonormal columns
    double h = 0.0;

    // eigenfunction scaled to unit trapezoid norm
    Vec eigenfunction(int j) const { return vectors.col(j) / std::sqrt(h); }
};

// Linearized up-operator: -d2 + g_+(phi^2) + 2 g_+'(phi^2) phi^2. The kernel
// is spanned by phi'; assembly verifies ||C phi'|| <= 1e-7 ||phi'||.
OperatorMatrix assemble_C(const ModelSpec& model, const FrontProfile& front);

// Down operator: -d2 + g_-(phi^2; mu). Ground state is simple.
OperatorMatrix assemble_D(const ModelSpec& model, const FrontProfile& front);

EigenSystem eigensystem(const OperatorMatrix& op);

// S(M) by spectral mapping of the eigendecomposition: V diag(S(lambda)) V^T.
OperatorMatrix funcalc_eig(const OperatorMatrix& op, const EigenSystem& es,
                           const SpectralMap& map);

// Axis-aligned rectangle around the spectrum, traversed counterclockwise.
struct ContourRectangle {
    double left = 0.0, right = 0.0, half_height = 1.5;
};

ContourRectangle default_contour(const EigenSystem& es);

struct ContourOptions {
    int n_quad = 256;
    bool check_doubling = false;   // re-run at 2x nodes and compare
    double doubling_tol = 1e-8;
};

// S(M) by trapezoid quadrature of the resolvent integral on the rectangle.
// Node placement is graded: speed vanishes at the corners (C^3 joins) and
// each edge receives nodes in proportion to its distance to the spectrum.
OperatorMatrix funcalc_contour(const OperatorMatrix& op, const SpectralMap& map,
                               const ContourRectangle& contour,
                               const ContourOptions& opts = {});

// Quadrature nodes/weights for (1/2 pi i) contour integrals; exposed for the
// double-resolvent evaluation in the reduction module.
struct ContourQuadrature {
    std::vector<std::complex<double>> nodes;
    std::vector<std::complex<double>> weights;  // includes dlambda/(2 pi i)
};
ContourQuadrature build_contour_quadrature(const ContourRectangle& rect, int n_quad,
                                           const SpectralMap& map);

using MatVec = std::function<Vec(const Vec&)>;

struct LanczosResult {
    Vec value;
    int iterations = 0;
    bool breakdown = false;
    bool converged = false;
};

// f(A) v for symmetric A given only through its action, with full
// reorthogonalization. Stops when successive iterates differ by < tol * ||v||.
LanczosResult apply_funcalc_lanczos(const MatVec& matvec, const SpectralMap& map,
                                    const Vec& v, int k_max, double tol);

// Solve M x = P_perp rhs with x orthogonal to the declared kernel vector,
// through the rank-one shifted system (M + rho k k^T) x = P_perp rhs.
Vec pinned_inverse(const OperatorMatrix& op, const Vec& kernel_vector, const Vec& rhs,
                   double rho = 1.0);

} // namespace mpnls
