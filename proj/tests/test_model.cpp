#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpnls/model.hpp"
#include "oracles.hpp"

using namespace mpnls;

TEST_CASE("reference model evaluates the chosen polynomials") {
    ModelSpec m = build_reference_model(0.0, 0.1);
    CHECK(m.g_minus(1.0) == doctest::Approx(0.5));
    CHECK(m.c_infinity() == doctest::Approx(2.0));
    CHECK(m.g_plus(1.0) == doctest::Approx(0.0));

    ModelSpec shifted = build_reference_model(0.05, 0.1);
    CHECK(shifted.g_minus(1.0) == doctest::Approx(0.55));
}

TEST_CASE("reference model rejects out-of-window parameters") {
    CHECK_THROWS_AS(build_reference_model(0.3, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_reference_model(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_reference_model(0.0, 0.6), std::invalid_argument);
    CHECK(build_reference_model(0.2, 0.1).inside_validated_window == false);
}

TEST_CASE("nonlinearity lower bounds on the sampled window") {
    // inf g_- over s in [0,4] equals mu - 1/2; it meets a_minus exactly at
    // mu = -0.05 and stays strictly above inside the spectral window
    for (double mu : {-0.05, -0.02, 0.0, 0.02, 0.05}) {
        ModelSpec m = build_reference_model(mu, 0.1);
        double inf_minus = 1e300, inf_plus = 1e300;
        for (int i = 0; i <= 400; ++i) {
            const double s = 4.0 * i / 400.0;
            inf_minus = std::min(inf_minus, m.g_minus(s));
            inf_plus = std::min(inf_plus, m.g_plus(s));
        }
        CHECK(inf_minus >= m.a_minus - 1e-12);
        if (mu > -0.05) CHECK(inf_minus > m.a_minus);
        CHECK(inf_plus > m.a_plus);
        CHECK(m.g_minus(1.0) > 0.0);
        CHECK(m.c_infinity() > 0.0);
    }
}

TEST_CASE("spectral map examples") {
    SpectralMap logistic = make_spectral_map(MapKind::Logistic, 1.0, 2.0, -0.55);
    CHECK(logistic(0.0) == doctest::Approx(1.5));

    SpectralMap constant = make_spectral_map(MapKind::Constant, 1.0, 1.0, -0.55);
    CHECK(constant(-3.0) == doctest::Approx(1.0));
    CHECK(constant(77.0) == doctest::Approx(1.0));

    SpectralMap rational = make_spectral_map(MapKind::ShiftedRational, 1.0, 2.0, -0.55);
    CHECK(rational(-0.55) == doctest::Approx(1.0));
    CHECK(rational.pole_list.size() == 1);
    CHECK(rational.pole_list[0].real() == doctest::Approx(-1.55));

    CHECK_THROWS_AS(make_spectral_map(MapKind::Constant, 1.0, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_spectral_map(MapKind::Logistic, -1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("spectral map range and monotonicity on 1e4 samples") {
    for (auto kind : {MapKind::Constant, MapKind::Logistic, MapKind::ShiftedRational}) {
        const double bm = 1.0, bp = kind == MapKind::Constant ? 1.0 : 2.0;
        SpectralMap map = make_spectral_map(kind, bm, bp, -0.55);
        double prev = -1e300;
        for (int i = 0; i < 10000; ++i) {
            const double s = -0.55 + 100.0 * i / 9999.0;
            const double v = map(s);
            CHECK(v >= bm - 1e-12);
            CHECK(v <= bp + 1e-12);
            CHECK(v >= prev - 1e-12);
            CHECK(map.deriv(s) >= 0.0);
            prev = v;
        }
    }
}

TEST_CASE("front solve reproduces the tanh profile") {
    Grid1D grid = make_grid1d(20.0, 2049);
    ModelSpec model = build_reference_model(0.0, 0.1);
    FrontProfile f = front_solve(model, grid);

    double worst = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        worst = std::max(worst, std::abs(f.values[i] - oracle::phi(grid.nodes[i])));
    }
    CHECK(worst < 1e-8);
    CHECK(f.residual_norm < 1e-9);
    CHECK(std::abs(f.values[grid.n / 2]) < 1e-12);  // phi(0) = 0
    CHECK(parity_defect(f.values, -1) < 1e-10);
    CHECK(std::abs(f.values[0] + 1.0) < 1e-8);
    CHECK(std::abs(f.values[grid.n - 1] - 1.0) < 1e-8);
    CHECK(grid.norm2(f.derivative) == doctest::Approx(oracle::dphi_norm_sq()).epsilon(1e-6));
}

TEST_CASE("front residual and parity hold on finer and coarser grids") {
    ModelSpec model = build_reference_model(0.03, 0.1);
    for (int n : {1025, 2049, 4097}) {
        Grid1D grid = make_grid1d(20.0, n);
        FrontProfile f = front_solve(model, grid);
        CHECK(f.residual_norm < 1e-9);
        CHECK(parity_defect(f.values, -1) < 1e-10);
    }
}

TEST_CASE("grid construction guards") {
    CHECK_THROWS_AS(make_grid1d(20.0, 2048), std::invalid_argument);
    CHECK_THROWS_AS(make_grid1d(-1.0, 2049), std::invalid_argument);
}
