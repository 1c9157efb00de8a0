#include "mpnls/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace mpnls {

Grid1D make_grid1d(double half_width, int n) {
    if (half_width <= 0.0) throw std::invalid_argument("grid half_width must be positive");
    if (n < 5 || n % 2 == 0) throw std::invalid_argument("grid node count must be odd and >= 5");
    Grid1D g;
    g.half_width = half_width;
    g.n = n;
    g.h = 2.0 * half_width / static_cast<double>(n - 1);
    g.nodes.resize(n);
    for (int i = 0; i < n; ++i) g.nodes[i] = -half_width + g.h * i;
    return g;
}

Mat second_derivative_matrix(const Grid1D& g) {
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h * g.h);
    // -d2: [1 -16 30 -16 1] / 12h^2
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = 30.0 * c;
        if (i >= 1) a(i, i - 1) = -16.0 * c;
        if (i >= 2) a(i, i - 2) = 1.0 * c;
        if (i + 1 < n) a(i, i + 1) = -16.0 * c;
        if (i + 2 < n) a(i, i + 2) = 1.0 * c;
    }
    return a;
}

Mat first_derivative_matrix(const Grid1D& g) {
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h);
    Mat d = Mat::Zero(n, n);
    for (int i = 2; i + 2 < n; ++i) {
        d(i, i - 2) = 1.0 * c;
        d(i, i - 1) = -8.0 * c;
        d(i, i + 1) = 8.0 * c;
        d(i, i + 2) = -1.0 * c;
    }
    // 4th-order one-sided closures
    const double b0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
    const double b1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
    for (int j = 0; j < 5; ++j) {
        d(0, j) = b0[j] * c;
        d(1, j) = b1[j] * c;
        d(n - 1, n - 1 - j) = -b0[j] * c;
        d(n - 2, n - 1 - j) = -b1[j] * c;
    }
    return d;
}

Mat second_derivative_matrix_periodic(const Grid1D& g) {
    // wraps over n-1 distinct nodes would double-count the endpoint on a
    // symmetric grid; here the grid is interpreted as n points with period n*h
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h * g.h);
    Mat a = Mat::Zero(n, n);
    auto wrap = [n](int i) { return (i % n + n) % n; };
    for (int i = 0; i < n; ++i) {
        a(i, i) += 30.0 * c;
        a(i, wrap(i - 1)) += -16.0 * c;
        a(i, wrap(i + 1)) += -16.0 * c;
        a(i, wrap(i - 2)) += 1.0 * c;
        a(i, wrap(i + 2)) += 1.0 * c;
    }
    return a;
}

double parity_defect(const Vec& v, int sign) {
    const int n = static_cast<int>(v.size());
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(v[i] - sign * v[n - 1 - i]));
    }
    return worst;
}

} // namespace mpnls
