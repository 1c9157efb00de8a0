#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mpnls/errors.hpp"
#include "mpnls/operators.hpp"
#include "oracles.hpp"

using namespace mpnls;

namespace {

struct Fixture {
    ModelSpec model;
    Grid1D grid;
    FrontProfile front;

    Fixture(double mu, int n, double half_width = 20.0)
        : model(build_reference_model(mu, 0.1)),
          grid(make_grid1d(half_width, n)),
          front(front_solve(model, grid)) {}
};

Vec random_vector(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

} // namespace

TEST_CASE("up operator has the reflectionless spectrum") {
    Fixture fx(0.0, 2049);
    OperatorMatrix c = assemble_C(fx.model, fx.front);
    CHECK(c.symmetry_defect() < 1e-13);

    EigenSystem es = eigensystem(c);
    CHECK(std::abs(es.values[0]) < 1e-7);
    CHECK(es.values[1] == doctest::Approx(oracle::c_second_eigenvalue()).epsilon(1e-4 / 1.5));

    Vec ground = oracle::sample(fx.grid, [](double z) {
        const double s = 1.0 / std::cosh(z / std::sqrt(2.0));
        return s * s;
    });
    CHECK(oracle::cosine(es.vectors.col(0), ground) > 1.0 - 1e-10);
}

TEST_CASE("kernel condition on the discrete front derivative") {
    Fixture fx(0.05, 2049);
    OperatorMatrix c = assemble_C(fx.model, fx.front);
    const double rel = fx.grid.norm(c.entries * fx.front.derivative) /
                       fx.grid.norm(fx.front.derivative);
    CHECK(rel <= 1e-7);
}

TEST_CASE("down operator ground state tracks mu") {
    for (double mu : {0.05, 0.0, -0.02}) {
        Fixture fx(mu, 1025);
        OperatorMatrix d = assemble_D(fx.model, fx.front);
        EigenSystem es = eigensystem(d);
        CHECK(std::abs(es.values[0] - mu) < 1e-5);
        Vec psi = oracle::sample(fx.grid, oracle::psi);
        CHECK(oracle::cosine(es.vectors.col(0), psi) > 1.0 - 1e-8);
        if (mu < 0.0) {
            CHECK(es.values[0] < 0.0);
            CHECK(es.values[1] > 0.0);  // unique negative eigenvalue
        }
    }
}

TEST_CASE("down eigenvalue converges at fourth order") {
    std::vector<double> hs, errs;
    for (int n : {257, 513, 1025}) {
        Fixture fx(0.05, n);
        OperatorMatrix d = assemble_D(fx.model, fx.front);
        EigenSystem es = eigensystem(d);
        hs.push_back(fx.grid.h);
        errs.push_back(std::abs(es.values[0] - 0.05));
    }
    CHECK(oracle::convergence_order(hs, errs) >= 3.5);
}

TEST_CASE("spectral mapping route") {
    Fixture fx(0.05, 513);
    OperatorMatrix d = assemble_D(fx.model, fx.front);
    EigenSystem es = eigensystem(d);

    SUBCASE("constant map gives a multiple of the identity") {
        SpectralMap con = make_spectral_map(MapKind::Constant, 2.0, 2.0, fx.model.a_minus);
        OperatorMatrix sd = funcalc_eig(d, es, con);
        CHECK((sd.entries - 2.0 * Mat::Identity(d.size(), d.size())).cwiseAbs().maxCoeff() <
              1e-10);
    }

    SUBCASE("ground eigenvalue maps through the spectral function") {
        SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, fx.model.a_minus);
        OperatorMatrix sd = funcalc_eig(d, es, logistic);
        EigenSystem ses = eigensystem(sd);
        CHECK(ses.values.minCoeff() >= 1.0 - 1e-10);
        CHECK(ses.values.maxCoeff() <= 2.0 + 1e-10);
        // S is increasing, so the ground state of D maps to the bottom of S(D)
        CHECK(ses.values[0] == doctest::Approx(logistic(es.values[0])).epsilon(1e-10));
        Vec sd_psi = sd.entries * es.vectors.col(0);
        CHECK((sd_psi - logistic(es.values[0]) * es.vectors.col(0)).norm() < 1e-9);
    }

    SUBCASE("hypothesis violation when the spectrum dips below a_minus") {
        OperatorMatrix sunk = d;
        sunk.entries.diagonal().array() -= 2.0;
        EigenSystem ses = eigensystem(sunk);
        SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, fx.model.a_minus);
        CHECK_THROWS_AS(funcalc_eig(sunk, ses, logistic), InvariantViolation);
    }

    SUBCASE("filter commutes with the operator") {
        SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, fx.model.a_minus);
        OperatorMatrix sd = funcalc_eig(d, es, logistic);
        const double comm = (sd.entries * d.entries - d.entries * sd.entries).norm();
        CHECK(comm <= 1e-9 * d.entries.norm() * logistic.beta_plus);
    }
}

TEST_CASE("contour route agrees with the spectral mapping route") {
    // wider spacing keeps the stencil's largest eigenvalue small enough for
    // the pinned 256-node budget
    Fixture fx(0.05, 101, 25.0);
    OperatorMatrix d = assemble_D(fx.model, fx.front);
    EigenSystem es = eigensystem(d);
    ContourRectangle rect = default_contour(es);

    for (auto kind : {MapKind::Constant, MapKind::Logistic, MapKind::ShiftedRational}) {
        const double bp = kind == MapKind::Constant ? 1.0 : 2.0;
        SpectralMap map = make_spectral_map(kind, 1.0, bp, fx.model.a_minus);
        OperatorMatrix via_eig = funcalc_eig(d, es, map);
        OperatorMatrix via_contour = funcalc_contour(d, map, rect, {.n_quad = 256});
        const double diff = (via_eig.entries - via_contour.entries).cwiseAbs().maxCoeff();
        INFO("kind ", map.kind_name(), " diff ", diff);
        CHECK(diff <= 1e-8);
    }
}

TEST_CASE("contour quadrature converges under doubling and rejects poles") {
    Fixture fx(-0.05, 101, 25.0);
    OperatorMatrix d = assemble_D(fx.model, fx.front);
    EigenSystem es = eigensystem(d);
    SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, fx.model.a_minus);

    ContourRectangle rect = default_contour(es);
    ContourOptions opts;
    opts.n_quad = 256;
    opts.check_doubling = true;
    CHECK_NOTHROW(funcalc_contour(d, logistic, rect, opts));

    ContourRectangle tall = rect;
    tall.half_height = 3.2;  // runs through the logistic poles at +-i pi
    CHECK_THROWS_AS(funcalc_contour(d, logistic, tall, opts), std::invalid_argument);
}

TEST_CASE("matrix-free filter application") {
    Fixture fx(0.05, 101, 25.0);
    OperatorMatrix d = assemble_D(fx.model, fx.front);
    EigenSystem es = eigensystem(d);
    MatVec apply = [&](const Vec& v) { return Vec(d.entries * v); };

    SUBCASE("constant map is exact after one step") {
        SpectralMap con = make_spectral_map(MapKind::Constant, 1.5, 1.5, fx.model.a_minus);
        Vec v = random_vector(d.size(), 7);
        LanczosResult r = apply_funcalc_lanczos(apply, con, v, 80, 1e-10);
        CHECK(r.iterations == 1);
        CHECK((r.value - 1.5 * v).norm() == doctest::Approx(0.0));
    }

    SUBCASE("agrees with the dense route on random vectors") {
        SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, fx.model.a_minus);
        OperatorMatrix sd = funcalc_eig(d, es, logistic);
        for (std::uint64_t seed : {1, 2, 3}) {
            Vec v = random_vector(d.size(), seed);
            LanczosResult r = apply_funcalc_lanczos(apply, logistic, v, 80, 1e-10);
            CHECK(r.converged);
            CHECK((r.value - sd.entries * v).norm() <= 1e-8 * v.norm());
        }
    }

    SUBCASE("eigenvector invariance") {
        SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, fx.model.a_minus);
        Vec psi = es.vectors.col(0);
        LanczosResult r = apply_funcalc_lanczos(apply, logistic, psi, 80, 1e-10);
        CHECK(r.converged);
        CHECK((r.value - logistic(es.values[0]) * psi).norm() < 1e-8);
    }
}

TEST_CASE("three filter routes agree pairwise") {
    for (double mu : {-0.05, 0.0, 0.05}) {
        Fixture fx(mu, 101, 25.0);
        OperatorMatrix d = assemble_D(fx.model, fx.front);
        EigenSystem es = eigensystem(d);
        ContourRectangle rect = default_contour(es);
        MatVec apply = [&](const Vec& v) { return Vec(d.entries * v); };
        for (auto kind : {MapKind::Constant, MapKind::Logistic, MapKind::ShiftedRational}) {
            const double bp = kind == MapKind::Constant ? 1.0 : 2.0;
            SpectralMap map = make_spectral_map(kind, 1.0, bp, fx.model.a_minus);
            OperatorMatrix a = funcalc_eig(d, es, map);
            OperatorMatrix b = funcalc_contour(d, map, rect, {.n_quad = 256});
            CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() <= 1e-8);
            Vec v = random_vector(d.size(), 17);
            LanczosResult lr = apply_funcalc_lanczos(apply, map, v, 80, 1e-10);
            CHECK((lr.value - a.entries * v).norm() <= 1e-8 * v.norm());
            CHECK((lr.value - b.entries * v).norm() <= 2e-8 * v.norm());
        }
    }
}

TEST_CASE("pinned inverse") {
    Fixture fx(0.05, 513);
    OperatorMatrix c = assemble_C(fx.model, fx.front);
    Vec kernel = fx.front.derivative / fx.front.derivative.norm();

    SUBCASE("kernel input is annihilated") {
        Vec x = pinned_inverse(c, kernel, fx.front.derivative);
        CHECK(fx.grid.norm(x) < 1e-9);
    }

    SUBCASE("residual against the discrete kernel vector") {
        EigenSystem es = eigensystem(c);
        Vec v0 = es.vectors.col(0);
        Vec rhs = random_vector(c.size(), 21);
        rhs -= v0.dot(rhs) * v0;
        Vec x = pinned_inverse(c, v0, rhs);
        CHECK((c.entries * x - rhs).norm() <= 1e-8 * rhs.norm());
        CHECK(std::abs(x.dot(v0)) < 1e-10);
    }

    SUBCASE("constrained residual with the profile derivative as kernel") {
        Vec rhs = random_vector(c.size(), 21);
        rhs -= kernel.dot(rhs) * kernel;
        Vec x = pinned_inverse(c, kernel, rhs);
        Vec resid = c.entries * x - rhs;
        resid -= kernel.dot(resid) * kernel;
        CHECK(resid.norm() <= 1e-8 * rhs.norm());
        CHECK(std::abs(x.dot(kernel)) < 1e-10);
    }

    SUBCASE("zero kernel vector is rejected") {
        CHECK_THROWS_AS(pinned_inverse(c, Vec::Zero(c.size()), fx.front.derivative),
                        std::invalid_argument);
    }

    SUBCASE("shift choice does not matter after projection") {
        Vec rhs = random_vector(c.size(), 22);
        Vec a = pinned_inverse(c, kernel, rhs, 0.1);
        Vec b = pinned_inverse(c, kernel, rhs, 10.0);
        CHECK((a - b).norm() < 1e-7 * std::max(1.0, a.norm()));
    }
}
