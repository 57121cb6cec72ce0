#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmeas/stochastic.hpp"

using namespace qmeas;

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

TEST_CASE("overbar_average") {
    ParamDensity density;
    density.eta = {Marginal::uniform(0.0, 2.0)};
    density.y = Marginal::uniform(-0.5, 0.5);

    SUBCASE("constants average to themselves exactly") {
        const auto r = overbar_average(
            [](const StochasticParams&) { return cdouble(0.7, -0.2); }, density);
        CHECK(std::abs(r.value - cdouble(0.7, -0.2)) < 1e-14);
    }
    SUBCASE("u = 1 maps to 1 (normalization of the density)") {
        const auto r =
            overbar_average([](const StochasticParams&) { return cdouble(1.0, 0.0); }, density);
        CHECK(std::abs(r.value - cdouble(1.0, 0.0)) < 1e-13);
    }
    SUBCASE("full-period phase averages to zero") {
        const double tau = 0.7;
        ParamDensity d;
        d.eta = {Marginal::uniform(0.0, kTwoPi / tau)};
        const auto r = overbar_average(
            [tau](const StochasticParams& p) { return std::polar(1.0, p.etas[0] * tau); }, d);
        CHECK(std::abs(r.value) < 1e-10);
    }
    SUBCASE("gaussian characteristic function") {
        const double tau = 0.9, s = 1.3;
        ParamDensity d;
        d.eta = {Marginal::gaussian(0.0, s)};
        const auto r = overbar_average(
            [tau](const StochasticParams& p) { return cdouble(std::cos(p.etas[0] * tau), 0.0); },
            d);
        CHECK(std::abs(r.value.real() - std::exp(-0.5 * s * s * tau * tau)) < 1e-8);
    }
    SUBCASE("linearity in u") {
        auto u1 = [](const StochasticParams& p) { return cdouble(p.etas[0], 0.0); };
        auto u2 = [](const StochasticParams& p) {
            return cdouble(std::sin(p.etas[0]), 0.5);
        };
        const auto a = overbar_average(u1, density).value;
        const auto b = overbar_average(u2, density).value;
        const auto combo = overbar_average(
            [&](const StochasticParams& p) { return 2.0 * u1(p) - 3.0 * u2(p); }, density);
        CHECK(std::abs(combo.value - (2.0 * a - 3.0 * b)) < 1e-12);
    }
    SUBCASE("monte carlo agrees within its reported error") {
        AverageOptions opt;
        opt.method = AverageOptions::Method::MonteCarlo;
        opt.mc_samples = 20000;
        opt.seed = 99;
        auto u = [](const StochasticParams& p) { return cdouble(std::cos(p.etas[0]), 0.0); };
        const auto mc = overbar_average(u, density, opt);
        const auto quad = overbar_average(u, density);
        CHECK(std::abs(mc.value - quad.value) < 5.0 * mc.std_error + 1e-12);
        CHECK(mc.std_error > 0.0);
    }
    SUBCASE("non-finite integrand is reported") {
        auto bad = [](const StochasticParams& p) {
            return cdouble(1.0 / (p.etas[0] - p.etas[0]), 0.0); // 1/0
        };
        CHECK_THROWS_AS(overbar_average(bad, density), StochasticError);
    }
    SUBCASE("quadrature dimension guard") {
        ParamDensity wide;
        wide.eta = {Marginal::uniform(0, 1), Marginal::uniform(0, 1),
                    Marginal::uniform(0, 1)};
        CHECK_THROWS_AS(
            overbar_average([](const StochasticParams&) { return cdouble(1, 0); }, wide),
            StochasticError);
    }
}

TEST_CASE("pointer_overlap") {
    PointerModel model;
    model.width = 0.7;
    model.carrier = 3.0;

    SUBCASE("coinciding shifts give exactly 1") {
        CHECK(pointer_overlap(model, 1.234, 1.234, 0.8) == cdouble(1.0, 0.0));
    }
    SUBCASE("ten-width separation matches e^{-12.5}") {
        PointerModel plain;
        plain.width = 0.5;
        plain.carrier = 0.0;
        const double tau = 1.0;
        const double eta = 10.0 * plain.width / tau;
        const auto v = pointer_overlap(plain, eta, 0.0, tau);
        CHECK(std::abs(std::abs(v) - std::exp(-12.5)) < 1e-12);
        CHECK(std::abs(v) == doctest::Approx(3.7e-6).epsilon(0.02));
    }
    SUBCASE("conjugate symmetry under k <-> k'") {
        const auto a = pointer_overlap(model, 2.0, 0.5, 1.1);
        const auto b = pointer_overlap(model, 0.5, 2.0, 1.1);
        CHECK(std::abs(a - std::conj(b)) < 1e-15);
        CHECK(std::abs(std::abs(a) - std::abs(b)) < 1e-15);
    }
    SUBCASE("closed form matches direct quadrature") {
        const double tau = 1.3, a = 0.9, b = -0.4;
        auto phi = [&](double y, double shift) {
            const double u = y - shift;
            return std::polar(std::pow(2.0 * oracles::kPi * model.width * model.width, -0.25) *
                                  std::exp(-u * u / (4.0 * model.width * model.width)),
                              model.carrier * u);
        };
        const auto integral = oracles::simpson(
            [&](double y) { return phi(y, a * tau) * std::conj(phi(y, b * tau)); }, -15.0,
            15.0, 6000);
        CHECK(std::abs(pointer_overlap(model, a, b, tau) - integral) < 1e-10);
    }
}

TEST_CASE("neutral pointer component is numerically orthogonal") {
    PointerModel model;
    model.width = 1.0;
    model.neutral_offset = 40.0;
    for (double eta : {0.0, 1.0, 2.0})
        CHECK(neutral_overlap_magnitude(model, eta, 1.0) < 1e-12);
}

TEST_CASE("decoherence_matrix") {
    SUBCASE("degenerate density gives the all-ones matrix") {
        PointerModel model;
        model.width = 1.0;
        ParamDensity d;
        d.eta = {Marginal::uniform(1.5, 1.5), Marginal::uniform(1.5, 1.5)};
        const auto m = decoherence_matrix(model, d, 0.7);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(std::abs(m.matrix.at(i, j) - cdouble(1, 0)) < 1e-12);
    }
    SUBCASE("hermitian, unit diagonal, magnitudes <= 1") {
        PointerModel model;
        model.width = 0.8;
        model.carrier = 11.0;
        ParamDensity d;
        d.eta = {Marginal::uniform(0.0, 1.0), Marginal::gaussian(0.5, 0.4),
                 Marginal::uniform(-1.0, 2.0)};
        const auto m = decoherence_matrix(model, d, 1.2);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(std::abs(m.matrix.at(i, i) - cdouble(1, 0)) < 1e-14);
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(std::abs(m.matrix.at(i, j) - std::conj(m.matrix.at(j, i))) < 1e-12);
                CHECK(std::abs(m.matrix.at(i, j)) <= 1.0 + 1e-12);
            }
        }
    }
    SUBCASE("narrowing the spread tenfold raises the off-diagonal") {
        PointerModel model;
        model.width = 1.0;
        model.carrier = 25.0;
        auto offdiag = [&](double spread) {
            ParamDensity d;
            d.eta = {Marginal::uniform(0.0, spread), Marginal::uniform(0.0, spread)};
            return decoherence_matrix(model, d, 1.0).max_offdiagonal;
        };
        CHECK(offdiag(0.2) > offdiag(2.0));
    }
    SUBCASE("monotone in the spread for the pure Gaussian pointer") {
        PointerModel model;
        model.width = 1.0;
        double prev = 2.0;
        for (double spread : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            ParamDensity d;
            d.eta = {Marginal::uniform(0.0, spread), Marginal::uniform(0.0, spread)};
            const double v = decoherence_matrix(model, d, 1.0).max_offdiagonal;
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("averaged_density") {
    const auto grid = GridSpec::line(1024, 60.0);

    PacketParams l, r;
    l.weight = cdouble(1.0, 0.0);
    l.center = {-8.0};
    l.momentum = {0.0};
    l.sigma = 1.0;
    r = l;
    r.center = {8.0};
    WaveField b1 = synthesize_packets(grid, 1, {{l, 0}});
    WaveField b2 = synthesize_packets(grid, 1, {{r, 0}});
    // spread both so they overlap and can interfere
    b1 = free_propagate(b1, 6.0);
    b2 = free_propagate(b2, 6.0);

    const cdouble c1(M_SQRT1_2, 0.0), c2(0.0, M_SQRT1_2);

    SUBCASE("single k keeps lambda coherences") {
        std::vector<Branch> branches{{0, c1, b1}, {0, c2, b2}};
        const auto rho = averaged_density(branches, Operator::identity(1));
        double worst = 0.0;
        for (std::size_t j = 0; j < rho.size(); ++j) {
            const cdouble amp = c1 * b1.amp[j] + c2 * b2.amp[j];
            worst = std::max(worst, std::abs(rho[j] - std::norm(amp)));
        }
        CHECK(worst < 1e-13);
    }
    SUBCASE("ideal decoherence removes the cross term") {
        std::vector<Branch> branches{{0, c1, b1}, {1, c2, b2}};
        const auto rho = averaged_density(branches, Operator::identity(2));
        double worst = 0.0;
        for (std::size_t j = 0; j < rho.size(); ++j) {
            const double expected = std::norm(c1) * std::norm(b1.amp[j]) +
                                    std::norm(c2) * std::norm(b2.amp[j]);
            worst = std::max(worst, std::abs(rho[j] - expected));
        }
        CHECK(worst < 1e-13);
    }
    SUBCASE("all-ones matrix reproduces the coherent density") {
        std::vector<Branch> branches{{0, c1, b1}, {1, c2, b2}};
        Operator ones(2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) ones.at(i, j) = 1.0;
        const auto rho = averaged_density(branches, ones);
        double worst = 0.0;
        for (std::size_t j = 0; j < rho.size(); ++j) {
            const cdouble amp = c1 * b1.amp[j] + c2 * b2.amp[j];
            worst = std::max(worst, std::abs(rho[j] - std::norm(amp)));
        }
        CHECK(worst < 1e-13);
    }
    SUBCASE("unit-diagonal averaging preserves total mass for orthogonal branches") {
        PointerModel model;
        model.width = 1.0;
        model.carrier = 30.0;
        ParamDensity d;
        d.eta = {Marginal::uniform(0.0, 3.0), Marginal::uniform(0.0, 3.0)};
        // unevolved branches: disjoint supports, hence k-orthogonal
        const WaveField o1 = synthesize_packets(grid, 1, {{l, 0}});
        const WaveField o2 = synthesize_packets(grid, 1, {{r, 0}});
        std::vector<Branch> branches{{0, c1, o1}, {1, c2, o2}};
        const auto rho = averaged_density(branches, model, d, 1.0);
        double mass = 0.0;
        for (double v : rho) mass += v * grid.cell_volume();
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("averaged_density rejects mismatched grids") {
    PacketParams p;
    p.center = {0.0};
    p.momentum = {0.0};
    p.sigma = 1.0;
    const auto f1 = synthesize_packets(GridSpec::line(512, 30.0), 1, {{p, 0}});
    const auto f2 = synthesize_packets(GridSpec::line(1024, 30.0), 1, {{p, 0}});
    std::vector<Branch> branches{{0, cdouble(1, 0), f1}, {1, cdouble(0, 0), f2}};
    CHECK_THROWS_AS(averaged_density(branches, Operator::identity(2)), StochasticError);
}

TEST_CASE("phase_average_matrix of a full-period spread vanishes off-diagonal") {
    const double tau = 0.4;
    ParamDensity d;
    d.eta = {Marginal::uniform(0.0, kTwoPi / tau), Marginal::uniform(0.0, kTwoPi / tau)};
    const auto m = phase_average_matrix(d, tau);
    CHECK(m.max_offdiagonal < 1e-10);
    CHECK(std::abs(m.matrix.at(0, 0) - cdouble(1, 0)) < 1e-14);
}

TEST_CASE("sample_params is deterministic in the seed") {
    ParamDensity d;
    d.eta = {Marginal::uniform(0.0, 5.0), Marginal::gaussian(1.0, 0.3)};
    const auto a = sample_params(d, 77, 3);
    const auto b = sample_params(d, 77, 3);
    CHECK(a.etas == b.etas);
    CHECK(a.y_offset == b.y_offset);
    const auto c = sample_params(d, 78, 3);
    CHECK(a.etas != c.etas);
}
