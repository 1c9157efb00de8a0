#pragma once

#include <Eigen/Dense>

namespace mpnls {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Uniform 1D grid on [-L, L], symmetric about z = 0. n is odd so that z = 0
// is a node and even/odd parity can be checked exactly by index reflection.
struct Grid1D {
    double half_width = 0.0;
    int n = 0;
    double h = 0.0;
    Vec nodes;

    // trapezoid-weight inner product and norm
    double inner(const Vec& u, const Vec& v) const { return h * u.dot(v); }
    double norm2(const Vec& u) const { return inner(u, u); }
    double norm(const Vec& u) const { return std::sqrt(norm2(u)); }
};

Grid1D make_grid1d(double half_width, int n);

// Dense -d^2/dz^2 with the 4th-order 5-point stencil. The stencil is clipped
// at the boundary (ghost values zero), which keeps the matrix exactly
// symmetric; valid for functions that decay before the endpoints.
Mat second_derivative_matrix(const Grid1D& g);

// Dense d/dz, 4th-order centered interior, one-sided rows at each end.
// Not symmetric; used for profile derivatives and transport terms.
Mat first_derivative_matrix(const Grid1D& g);

// Periodic variants (circulant) used for the constant-coefficient operator
// checks on a wraparound grid.
Mat second_derivative_matrix_periodic(const Grid1D& g);

// max |v_i - sign * v_{n-1-i}|, sign = +1 even parity, -1 odd parity
double parity_defect(const Vec& v, int sign);

} // namespace mpnls
