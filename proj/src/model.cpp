#include "mpnls/model.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>

namespace mpnls {

ModelSpec build_reference_model(double mu, double epsilon) {
    if (std::abs(mu) > 0.25) {
        throw std::invalid_argument("reference model: |mu| <= 0.25 required");
    }
    if (!(epsilon > 0.0 && epsilon <= 0.5)) {
        throw std::invalid_argument("reference model: epsilon in (0, 0.5] required");
    }
    ModelSpec m;
    m.g_plus_poly = Poly3{-1.0, 1.0, 0.0, 0.0};
    m.g_minus_poly = Poly3{-0.5, 1.0, 0.0, 0.0};
    m.mu = mu;
    m.epsilon = epsilon;
    m.a_minus = -0.55;
    m.a_plus = -1.05;
    m.mu_star = 0.1;
    m.inside_validated_window = std::abs(mu) <= m.mu_star;
    return m;
}

double SpectralMap::operator()(double s) const {
    switch (kind) {
        case MapKind::Constant:
            return beta_minus;
        case MapKind::Logistic: {
            // stable logistic: e^s/(1+e^s) = 1/(1+e^-s)
            const double sig = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s))
                                        : std::exp(s) / (1.0 + std::exp(s));
            return beta_minus + (beta_plus - beta_minus) * sig;
        }
        case MapKind::ShiftedRational: {
            const double t = s - a_minus;
            return beta_minus + (beta_plus - beta_minus) * t / (t + 1.0);
        }
    }
    return beta_minus;
}

double SpectralMap::deriv(double s) const {
    switch (kind) {
        case MapKind::Constant:
            return 0.0;
        case MapKind::Logistic: {
            const double sig = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s))
                                        : std::exp(s) / (1.0 + std::exp(s));
            return (beta_plus - beta_minus) * sig * (1.0 - sig);
        }
        case MapKind::ShiftedRational: {
            const double t = s - a_minus + 1.0;
            return (beta_plus - beta_minus) / (t * t);
        }
    }
    return 0.0;
}

std::complex<double> SpectralMap::eval_complex(std::complex<double> lambda) const {
    using C = std::complex<double>;
    switch (kind) {
        case MapKind::Constant:
            return C(beta_minus, 0.0);
        case MapKind::Logistic: {
            const C sig = lambda.real() >= 0.0
                              ? 1.0 / (1.0 + std::exp(-lambda))
                              : std::exp(lambda) / (1.0 + std::exp(lambda));
            return beta_minus + (beta_plus - beta_minus) * sig;
        }
        case MapKind::ShiftedRational: {
            const C t = lambda - a_minus;
            return beta_minus + (beta_plus - beta_minus) * t / (t + 1.0);
        }
    }
    return C(beta_minus, 0.0);
}

std::string SpectralMap::kind_name() const {
    switch (kind) {
        case MapKind::Constant: return "constant";
        case MapKind::Logistic: return "logistic";
        case MapKind::ShiftedRational: return "shifted-rational";
    }
    return "constant";
}

SpectralMap make_spectral_map(MapKind kind, double beta_minus, double beta_plus,
                              double a_minus) {
    if (!(beta_minus > 0.0) || !(beta_minus <= beta_plus)) {
        throw std::invalid_argument("spectral map requires 0 < beta_minus <= beta_plus");
    }
    SpectralMap s;
    s.kind = kind;
    s.beta_minus = beta_minus;
    s.beta_plus = beta_plus;
    s.a_minus = a_minus;
    switch (kind) {
        case MapKind::Constant:
            if (beta_minus != beta_plus) {
                throw std::invalid_argument("constant map requires beta_minus == beta_plus");
            }
            break;
        case MapKind::Logistic:
            // poles of e^l/(1+e^l) at l = (2k+1) pi i
            for (int k = -4; k <= 4; ++k) {
                s.pole_list.emplace_back(0.0, (2 * k + 1) * M_PI);
            }
            break;
        case MapKind::ShiftedRational: {
            const double pole = a_minus - 1.0;
            if (pole >= a_minus) {
                throw std::invalid_argument("shifted-rational pole inside [a_minus, inf)");
            }
            s.pole_list.emplace_back(pole, 0.0);
            break;
        }
    }
    return s;
}

MapKind map_kind_from_string(const std::string& name) {
    if (name == "constant") return MapKind::Constant;
    if (name == "logistic") return MapKind::Logistic;
    if (name == "shifted-rational") return MapKind::ShiftedRational;
    throw std::invalid_argument("unknown spectral map kind: " + name);
}

namespace {

// Residual of the discrete front equation at interior nodes. Ghost values
// continue the far-field limits -1 / +1 outside the domain.
Vec front_residual(const ModelSpec& model, const Grid1D& g, const Vec& phi) {
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h * g.h);
    Vec r = Vec::Zero(n);
    auto at = [&](int i) -> double {
        if (i < 0) return -1.0;
        if (i >= n) return 1.0;
        return phi[i];
    };
    for (int i = 1; i + 1 < n; ++i) {
        const double d2 =
            c * (at(i - 2) - 16.0 * at(i - 1) + 30.0 * at(i) - 16.0 * at(i + 1) + at(i + 2));
        r[i] = d2 + model.g_plus(phi[i] * phi[i]) * phi[i];
    }
    return r;
}

} // namespace

FrontProfile front_solve(const ModelSpec& model, const Grid1D& grid,
                         const FrontSolveOptions& opts) {
    const int n = grid.n;
    const double c = 1.0 / (12.0 * grid.h * grid.h);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    Vec phi(n);
    for (int i = 0; i < n; ++i) phi[i] = std::tanh(grid.nodes[i] * inv_sqrt2);
    phi[0] = -1.0;
    phi[n - 1] = 1.0;

    // Newton on the interior unknowns, endpoints pinned at -1/+1.
    using Trip = Eigen::Triplet<double>;
    Eigen::SparseMatrix<double> jac(n - 2, n - 2);
    std::vector<Trip> trips;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        Vec r = front_residual(model, grid, phi);
        const double rn = r.segment(1, n - 2).lpNorm<Eigen::Infinity>();
        if (rn < opts.tolerance) {
            converged = true;
            break;
        }
        trips.clear();
        for (int i = 1; i + 1 < n; ++i) {
            const int row = i - 1;
            const double s = phi[i] * phi[i];
            const double diag = 30.0 * c + model.g_plus(s) + 2.0 * model.g_plus_d1(s) * s;
            trips.emplace_back(row, row, diag);
            auto off = [&](int j, double v) {
                if (j >= 1 && j + 1 < n) trips.emplace_back(row, j - 1, v);
            };
            off(i - 2, c);
            off(i - 1, -16.0 * c);
            off(i + 1, -16.0 * c);
            off(i + 2, c);
        }
        jac.setFromTriplets(trips.begin(), trips.end());
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
            throw std::runtime_error("front_solve: singular Newton Jacobian");
        }
        Vec delta = lu.solve(r.segment(1, n - 2));
        phi.segment(1, n - 2) -= delta;
        // the discrete Jacobian is nearly singular along the translation
        // mode; project the iterate back onto odd profiles
        for (int i = 0; i < n / 2; ++i) {
            const double odd = 0.5 * (phi[i] - phi[n - 1 - i]);
            phi[i] = odd;
            phi[n - 1 - i] = -odd;
        }
        phi[n / 2] = 0.0;
    }
    if (!converged) {
        Vec r = front_residual(model, grid, phi);
        const double rn = r.segment(1, n - 2).lpNorm<Eigen::Infinity>();
        if (rn >= 1e-9) {
            throw std::runtime_error("front_solve: Newton did not converge in " +
                                     std::to_string(opts.max_iterations) + " iterations");
        }
    }

    FrontProfile f;
    f.grid = grid;
    f.values = phi;

    // phi' by the 4th-order stencil with far-field ghost continuation; the
    // boundary values are exponentially flat so the ghosts are exact there.
    f.derivative.resize(n);
    const double dc = 1.0 / (12.0 * grid.h);
    auto at = [&](int i) -> double {
        if (i < 0) return -1.0;
        if (i >= n) return 1.0;
        return phi[i];
    };
    for (int i = 0; i < n; ++i) {
        f.derivative[i] = dc * (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2));
    }

    Vec r = front_residual(model, grid, phi);
    f.residual_norm = r.segment(1, n - 2).lpNorm<Eigen::Infinity>();
    return f;
}

} // namespace mpnls
