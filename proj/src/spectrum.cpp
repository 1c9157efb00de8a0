#include "mpnls/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mpnls/errors.hpp"

namespace mpnls {

Linearization1D build_linearization(const ModelSpec& model, const FrontProfile& front,
                                    const SpectralMap& map) {
    Linearization1D lin;
    lin.model = model;
    lin.map = map;
    lin.front = front;
    lin.C = assemble_C(model, front);
    lin.D = assemble_D(model, front);
    lin.D_eigen = eigensystem(lin.D);
    lin.SD = funcalc_eig(lin.D, lin.D_eigen, map);
    return lin;
}

BlockOperator assemble_L(const Linearization1D& lin) {
    const int n = lin.grid().n;
    if (lin.C.size() != n || lin.D.size() != n) {
        throw std::invalid_argument("assemble_L: blocks must share one grid");
    }
    BlockOperator b;
    b.block_size = n;
    b.beta_minus = lin.map.beta_minus;
    b.h = lin.grid().h;
    b.matrix = Mat::Zero(2 * n, 2 * n);
    b.matrix.topRightCorner(n, n) = lin.D.entries;
    b.matrix.bottomLeftCorner(n, n) = -lin.C.entries;
    b.matrix.bottomRightCorner(n, n) = -lin.SD.entries;
    return b;
}

KernelPair kernel_pair(const Linearization1D& lin) {
    const Grid1D& g = lin.grid();
    const int n = g.n;
    const Vec& dphi = lin.front.derivative;

    KernelPair kp;
    kp.psi0 = Vec::Zero(2 * n);
    kp.psi0.head(n) = dphi;
    kp.psi0_dagger = Vec::Zero(2 * n);

    const double lam = lin.lambda_D();
    kp.mu_zero_path = std::abs(lin.model.mu) < 1e-12;
    if (kp.mu_zero_path) {
        kp.psi0_dagger.head(n) = lin.ground_state();
    } else {
        if (std::abs(lam) < 1e-8) {
            throw NumericalFailure("kernel_pair: D numerically singular away from mu = 0");
        }
        Vec sd_phi = lin.SD.entries * dphi;
        kp.psi0_dagger.head(n) = lin.D.entries.partialPivLu().solve(sd_phi);
        kp.psi0_dagger.tail(n) = dphi;
    }

    BlockOperator block = assemble_L(lin);
    const double h = g.h;
    auto norm_h = [&](const Vec& v) { return std::sqrt(h) * v.norm(); };
    kp.kernel_residual = norm_h(block.matrix * kp.psi0) / norm_h(kp.psi0);
    kp.adjoint_residual =
        norm_h(block.matrix.transpose() * kp.psi0_dagger) / norm_h(kp.psi0_dagger);
    return kp;
}

SpectrumReport full_spectrum(const BlockOperator& block, const Linearization1D& lin) {
    if (block.matrix.rows() > 2 * 4097) {
        throw std::invalid_argument("full_spectrum: dense nonsymmetric solve limited to 2x4097");
    }
    Eigen::EigenSolver<Mat> es(block.matrix);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("full_spectrum: dense eigensolve failed");
    }

    SpectrumReport r;
    const Eigen::Index m = es.eigenvalues().size();
    std::vector<Eigen::Index> order(m);
    for (Eigen::Index i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return es.eigenvalues()[a].real() > es.eigenvalues()[b].real();
    });
    r.eigenvalues.resize(m);
    r.eigenvectors.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        r.eigenvalues[i] = es.eigenvalues()[order[i]];
        r.eigenvectors.col(i) = es.eigenvectors().col(order[i]);
    }

    r.ess_bound = lambda_m_ess(lin.model, lin.map);
    for (int i = 0; i <= 100; ++i) {
        const double k = 10.0 * i / 100.0;
        auto [lp, lm] = fredholm_boundary(lin.model, lin.map, k);
        r.fredholm_samples.push_back({k, lp, lm});
    }
    double worst_nonkernel = -std::numeric_limits<double>::infinity();
    double worst_complex = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto lam = r.eigenvalues[i];
        if (std::abs(lam) <= SpectrumReport::kernel_tol) {
            ++r.kernel_count;
            r.kernel_abs = std::max(r.kernel_abs, std::abs(lam));
            continue;
        }
        worst_nonkernel = std::max(worst_nonkernel, lam.real());
        if (std::abs(lam.imag()) > SpectrumReport::imag_tol) {
            worst_complex = std::max(worst_complex, lam.real());
        }
    }
    r.gap = -worst_nonkernel;
    r.max_complex_real = worst_complex;

    if (r.kernel_count != 1) {
        throw InvariantViolation("full_spectrum: expected a simple kernel, found " +
                                 std::to_string(r.kernel_count) + " eigenvalues within tolerance");
    }
    if (worst_complex > -block.beta_minus / 2.0 + 1e-6) {
        throw InvariantViolation("full_spectrum: genuinely complex eigenvalue right of -beta_-/2");
    }
    return r;
}

double fredholm_discriminant(const ModelSpec& model, const SpectralMap& map, double k) {
    const double m = k * k + model.g_minus(1.0);
    const double c = k * k + model.c_infinity();
    const double s = map(m);
    return s * s - 4.0 * m * c;
}

std::pair<std::complex<double>, std::complex<double>>
fredholm_boundary(const ModelSpec& model, const SpectralMap& map, double k) {
    const double m = k * k + model.g_minus(1.0);
    const double s = map(m);
    const std::complex<double> disc(fredholm_discriminant(model, map, k), 0.0);
    const std::complex<double> root = std::sqrt(disc);
    return {0.5 * (-s + root), 0.5 * (-s - root)};
}

double lambda_m_ess(const ModelSpec& model, const SpectralMap& map) {
    return std::min(0.5 * map.beta_minus,
                    model.c_infinity() * model.g_minus(1.0) / map.beta_plus);
}

ConstraintSpace constraint_space(const Linearization1D& lin, double lambda) {
    if (std::abs(lin.model.mu) < 1e-12 || std::abs(lin.lambda_D()) < 1e-10) {
        throw std::invalid_argument("constraint_space: D is singular (mu = 0)");
    }
    const Grid1D& g = lin.grid();
    ConstraintSpace cs;
    cs.lambda = lambda;
    Vec rhs = lin.SD.entries * lin.front.derivative + lambda * lin.front.derivative;
    cs.s_lambda = lin.D.entries.partialPivLu().solve(rhs);
    cs.s_unit = cs.s_lambda / g.norm(cs.s_lambda);
    cs.projector = Mat::Identity(g.n, g.n) - g.h * (cs.s_unit * cs.s_unit.transpose());
    return cs;
}

QuadraticRelation quadratic_relation_check(const Linearization1D& lin,
                                           std::complex<double> lambda, const CVec& p1) {
    QuadraticRelation out;
    const double h = lin.grid().h;
    const double p1_norm2 = h * p1.squaredNorm();
    if (p1_norm2 < 1e-20) {
        out.degenerate = true;
        return out;
    }
    CMat dc = lin.D.entries.cast<std::complex<double>>();
    CVec dinv_p1 = dc.partialPivLu().solve(p1);
    // bilinear forms <Av, v> with the conjugating inner product; real up to
    // round-off since the blocks are real symmetric
    const std::complex<double> a = h * p1.dot(dinv_p1);                   // <D^-1 P1, P1>
    const std::complex<double> b = h * p1.dot(lin.SD.entries * dinv_p1);  // <S_D D^-1 P1, P1>
    const std::complex<double> cc = h * p1.dot(lin.C.entries * p1);       // <C P1, P1>
    const std::complex<double> defect = lambda * lambda * a + lambda * b + cc;
    out.residual = std::abs(defect) / ((std::abs(lambda) * std::abs(lambda) + 1.0) * p1_norm2);

    const std::complex<double> disc = std::sqrt(b * b - 4.0 * a * cc);
    const std::complex<double> r1 = (-b + disc) / (2.0 * a);
    const std::complex<double> r2 = (-b - disc) / (2.0 * a);
    out.root_distance = std::min(std::abs(lambda - r1), std::abs(lambda - r2));
    return out;
}

IndexCount constrained_index(const Mat& m, const std::vector<Vec>& constraints,
                             double delta, double h) {
    if (constraints.empty()) throw std::invalid_argument("constrained_index: no constraints");
    const int n = static_cast<int>(m.rows());
    const int nc = static_cast<int>(constraints.size());

    IndexCount out;
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    out.n_unconstrained = static_cast<int>((es.eigenvalues().array() < -delta).count());

    // index formula: n(M|_S) = n(M + delta) - n(A), A_ij = <(M+delta)^-1 s_i, s_j>
    Mat shifted = m + delta * Mat::Identity(n, n);
    Eigen::PartialPivLU<Mat> lu(shifted);
    Mat a(nc, nc);
    for (int j = 0; j < nc; ++j) {
        Vec x = lu.solve(constraints[j]);
        for (int i = 0; i < nc; ++i) a(i, j) = h * constraints[i].dot(x);
    }
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> aes(a);
    out.n_constraint_matrix = static_cast<int>((aes.eigenvalues().array() < 0.0).count());
    out.n_formula = out.n_unconstrained - out.n_constraint_matrix;

    // direct route: compress M onto the orthogonal complement of the span
    Mat s(n, nc);
    for (int j = 0; j < nc; ++j) s.col(j) = constraints[j];
    Eigen::HouseholderQR<Mat> qr(s);
    Mat q = qr.householderQ();
    Mat basis = q.rightCols(n - nc);
    Mat compressed = basis.transpose() * m * basis;
    compressed = 0.5 * (compressed + compressed.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> ces(compressed);
    out.n_direct = static_cast<int>((ces.eigenvalues().array() < -delta).count());

    if (out.n_formula != out.n_direct) {
        throw InvariantViolation("constrained_index: formula count " +
                                 std::to_string(out.n_formula) + " != direct count " +
                                 std::to_string(out.n_direct));
    }
    return out;
}

BilinearRatioReport bilinear_ratio_report(const Linearization1D& lin, double lambda,
                                          int sample_count, std::uint64_t seed) {
    const Grid1D& g = lin.grid();
    const int n = g.n;
    const double h = g.h;
    const double beta_minus = lin.map.beta_minus;

    ConstraintSpace cs = constraint_space(lin, lambda);
    const Vec& rho = lin.D_eigen.values;
    const Mat& v = lin.D_eigen.vectors;

    BilinearRatioReport rep;
    rep.lambda = lambda;
    rep.sample_count = sample_count;
    rep.seed = seed;
    rep.min_filter_ratio = std::numeric_limits<double>::infinity();
    rep.min_inverse_ratio = std::numeric_limits<double>::infinity();
    rep.min_triple_ratio = std::numeric_limits<double>::infinity();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vec smap(n);
    for (int i = 0; i < n; ++i) smap[i] = lin.map(rho[i]);

    for (int s = 0; s < sample_count; ++s) {
        Vec p(n);
        for (int i = 0; i < n; ++i) p[i] = gauss(rng);
        p = cs.project(p, h);
        p /= g.norm(p);

        Vec coeff = v.transpose() * p;  // l2 eigen-coefficients
        double d1 = 0.0, ds = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c2 = coeff[i] * coeff[i];
            d1 += c2 / rho[i];
            ds += smap[i] * c2 / rho[i];
        }
        d1 *= h;
        ds *= h;
        if (d1 <= 0.0) {
            throw InvariantViolation(
                "bilinear_ratio_report: nonpositive <D^-1 P, P> inside the validated window");
        }
        const double cquad = h * p.dot(lin.C.entries * p);
        rep.min_filter_ratio = std::min(rep.min_filter_ratio, ds / d1);
        rep.min_inverse_ratio = std::min(rep.min_inverse_ratio, d1 / ds);
        rep.min_triple_ratio = std::min(rep.min_triple_ratio, d1 * cquad / (ds * ds));
    }

    if (rep.min_filter_ratio < beta_minus * (1.0 - 1e-6)) {
        throw InvariantViolation("bilinear_ratio_report: filter ratio fell below beta_-");
    }
    if (rep.min_inverse_ratio < 1.0 / (2.0 * lin.map.beta_plus)) {
        throw InvariantViolation("bilinear_ratio_report: inverse ratio fell below 1/(2 beta_+)");
    }

    // omega seminorm of phi': spectral-coefficient sum vs projected solve
    const Vec& dphi = lin.front.derivative;
    Vec dcoef = v.transpose() * dphi;
    double om = 0.0;
    for (int i = 1; i < n; ++i) om += dcoef[i] * dcoef[i] / rho[i];
    rep.omega_sq_spectral = h * om;
    Vec psi = v.col(0);
    Vec projected = dphi - psi.dot(dphi) * psi;
    Vec x = lin.D.entries.partialPivLu().solve(projected);
    rep.omega_sq_solve = h * x.dot(projected);
    return rep;
}

namespace {

OperatorMatrix constant_coefficient_operator(const Grid1D& g, double pot) {
    OperatorMatrix op;
    op.grid = g;
    op.kind = OpKind::Custom;
    op.potential = Vec::Constant(g.n, pot);
    op.entries = second_derivative_matrix_periodic(g);
    op.entries.diagonal().array() += pot;
    return op;
}

// symbol of the periodic 4th-order stencil at theta
double stencil_symbol(double theta, double h) {
    return (30.0 - 32.0 * std::cos(theta) + 2.0 * std::cos(2.0 * theta)) / (12.0 * h * h);
}

} // namespace

EssentialSpectrumCheck essential_spectrum_check(const ModelSpec& model,
                                                const SpectralMap& map,
                                                const Grid1D& grid) {
    const int n = grid.n;
    OperatorMatrix dinf = constant_coefficient_operator(grid, model.g_minus(1.0));
    OperatorMatrix cinf = constant_coefficient_operator(grid, model.c_infinity());
    EigenSystem des = eigensystem(dinf);
    OperatorMatrix sinf = funcalc_eig(dinf, des, map);

    Mat l = Mat::Zero(2 * n, 2 * n);
    l.topRightCorner(n, n) = dinf.entries;
    l.bottomLeftCorner(n, n) = -cinf.entries;
    l.bottomRightCorner(n, n) = -sinf.entries;

    Eigen::EigenSolver<Mat> es(l);
    if (es.info() != Eigen::Success) throw NumericalFailure("essential_spectrum_check: eigensolve failed");

    EssentialSpectrumCheck out;
    out.dense_eigenvalues = es.eigenvalues();
    out.predicted.resize(2 * n);
    for (int j = 0; j < n; ++j) {
        const double theta = 2.0 * M_PI * j / n;
        const double ksq = stencil_symbol(theta, grid.h);
        const double m = ksq + model.g_minus(1.0);
        const double c = ksq + model.c_infinity();
        const double s = map(m);
        const std::complex<double> disc(s * s - 4.0 * m * c, 0.0);
        const std::complex<double> root = std::sqrt(disc);
        out.predicted[2 * j] = 0.5 * (-s + root);
        out.predicted[2 * j + 1] = 0.5 * (-s - root);
    }
    out.max_mismatch = 0.0;
    for (Eigen::Index i = 0; i < out.dense_eigenvalues.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < out.predicted.size(); ++j) {
            best = std::min(best, std::abs(out.dense_eigenvalues[i] - out.predicted[j]));
        }
        out.max_mismatch = std::max(out.max_mismatch, best);
    }
    return out;
}

double resolvent_identity_defect(const ModelSpec& model, const SpectralMap& map,
                                 const Grid1D& grid, double gamma) {
    const int n = grid.n;
    OperatorMatrix dinf = constant_coefficient_operator(grid, model.g_minus(1.0));
    OperatorMatrix cinf = constant_coefficient_operator(grid, model.c_infinity());
    EigenSystem des = eigensystem(dinf);
    OperatorMatrix sinf = funcalc_eig(dinf, des, map);

    Mat l = Mat::Zero(2 * n, 2 * n);
    l.topRightCorner(n, n) = dinf.entries;
    l.bottomLeftCorner(n, n) = -cinf.entries;
    l.bottomRightCorner(n, n) = -sinf.entries;
    Mat dense = (l - gamma * Mat::Identity(2 * n, 2 * n)).partialPivLu().inverse();

    // Fourier route: per-mode scalars assembled into circulant blocks through
    // H_inf = C_inf + gamma (S_inf + gamma) D_inf^-1.
    Vec sym11(n), sym12(n), sym21(n), sym22(n);
    for (int j = 0; j < n; ++j) {
        const double theta = 2.0 * M_PI * j / n;
        const double ksq = stencil_symbol(theta, grid.h);
        const double dj = ksq + model.g_minus(1.0);
        const double cj = ksq + model.c_infinity();
        const double sj = map(dj);
        const double hj = cj + gamma * (sj + gamma) / dj;
        sym11[j] = -(sj + gamma) / (hj * dj);
        sym12[j] = -1.0 / hj;
        // note the minus: the block inverse requires
        //   D^-1 (1 - gamma H^-1 (S + gamma) D^-1)
        // as direct 2x2 inversion of the symbol confirms
        sym21[j] = (1.0 - gamma * (sj + gamma) / (hj * dj)) / dj;
        sym22[j] = -gamma / (dj * hj);
    }
    auto circulant = [&](const Vec& symbol) {
        Mat c(n, n);
        Vec first(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += symbol[j] * std::cos(2.0 * M_PI * j * i / n);
            first[i] = acc / n;
        }
        for (int r = 0; r < n; ++r)
            for (int c2 = 0; c2 < n; ++c2) c(r, c2) = first[((r - c2) % n + n) % n];
        return c;
    };
    Mat fourier = Mat::Zero(2 * n, 2 * n);
    fourier.topLeftCorner(n, n) = circulant(sym11);
    fourier.topRightCorner(n, n) = circulant(sym12);
    fourier.bottomLeftCorner(n, n) = circulant(sym21);
    fourier.bottomRightCorner(n, n) = circulant(sym22);

    return (dense - fourier).cwiseAbs().maxCoeff();
}

Mat dense_inverse(const OperatorMatrix& op) {
    return op.entries.partialPivLu().inverse();
}

} // namespace mpnls
