#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmeas/fft.hpp"
#include "qmeas/grid_field.hpp"
#include "qmeas/rng.hpp"

using namespace qmeas;

namespace {

constexpr double kPi = 3.14159265358979323846264338;

WaveField single_packet(const GridSpec& grid, double x0, double p, double sigma,
                        double phase = 0.0) {
    PacketParams packet;
    packet.center = {x0};
    packet.momentum = {p};
    packet.sigma = sigma;
    packet.phase = phase;
    return synthesize_packets(grid, 1, {{packet, 0}});
}

// plane wave on one of the grid's own wavenumbers, built by hand
WaveField plane_wave(const GridSpec& grid, double k) {
    WaveField f;
    f.grid = grid;
    f.spin_dim = 1;
    f.amp.resize(grid.num_points());
    const auto& ax = grid.axes[0];
    for (std::size_t j = 0; j < ax.points; ++j)
        f.amp[j] = std::polar(1.0 / std::sqrt(ax.length), k * ax.coordinate(j));
    return f;
}

} // namespace

TEST_CASE("fft matches the brute-force DFT") {
    Rng rng(11);
    std::vector<cdouble> x(64);
    for (auto& z : x) z = cdouble(rng.normal(0, 1), rng.normal(0, 1));
    auto fast = x;
    fft(std::span<cdouble>(fast.data(), fast.size()), false);
    const auto slow = oracles::dft(x, false);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
    CHECK(worst < 1e-11);

    auto round = fast;
    fft(std::span<cdouble>(round.data(), round.size()), true);
    worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(round[i] - x[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("synthesize_packets produces a normalized real Gaussian") {
    const auto grid = GridSpec::line(1024, 40.0);
    const auto f = single_packet(grid, 0.0, 0.0, 1.0);
    CHECK(std::abs(field_norm(f) - 1.0) < 1e-12);
    double max_imag = 0.0, min_real = 1.0;
    for (const auto& z : f.amp) {
        max_imag = std::max(max_imag, std::abs(z.imag()));
        min_real = std::min(min_real, z.real());
    }
    CHECK(max_imag < 1e-14);
    CHECK(min_real >= 0.0);
}

TEST_CASE("disjoint packets add in density") {
    const auto grid = GridSpec::line(2048, 80.0);
    PacketParams a, b;
    a.weight = cdouble(M_SQRT1_2, 0);
    a.center = {-12.0};
    a.momentum = {0.0};
    a.sigma = 1.0;
    b = a;
    b.center = {12.0};
    const auto f = synthesize_packets(grid, 1, {{a, 0}, {b, 0}});
    const auto fa = single_packet(grid, -12.0, 0.0, 1.0);
    const auto fb = single_packet(grid, 12.0, 0.0, 1.0);

    const auto ov = overlap_integral(fa, fb);
    CHECK(ov.density_overlap < 1e-10); // density-overlap oracle

    const auto dens = total_density(f);
    const auto da = total_density(fa);
    const auto db = total_density(fb);
    double worst = 0.0;
    for (std::size_t j = 0; j < dens.size(); ++j)
        worst = std::max(worst, std::abs(dens[j] - 0.5 * (da[j] + db[j])));
    CHECK(worst < 1e-10);
}

TEST_CASE("packet phase parameter is a global phase") {
    const auto grid = GridSpec::line(512, 30.0);
    const auto base = single_packet(grid, 0.0, 0.5, 1.0, 0.0);
    const auto rotated = single_packet(grid, 0.0, 0.5, 1.0, kPi / 2.0);
    double worst = 0.0;
    for (std::size_t j = 0; j < base.amp.size(); ++j)
        worst = std::max(worst, std::abs(rotated.amp[j] - cdouble(0, 1) * base.amp[j]));
    CHECK(worst < 1e-13);
}

TEST_CASE("synthesize_packets rejects bad input") {
    const auto grid = GridSpec::line(512, 30.0);
    PacketParams p;
    p.center = {13.0}; // 2 sigma from the boundary
    p.momentum = {0.0};
    p.sigma = 1.0;
    CHECK_THROWS_AS(synthesize_packets(grid, 1, {{p, 0}}), FieldError);

    PacketParams a, b;
    a.center = {0.0};
    a.momentum = {0.0};
    a.sigma = 1.0;
    a.weight = cdouble(M_SQRT1_2, 0);
    b = a;
    b.weight = cdouble(-M_SQRT1_2, 0); // exact cancellation
    CHECK_THROWS_AS(synthesize_packets(grid, 1, {{a, 0}, {b, 0}}), FieldError);
}

TEST_CASE("free_propagate") {
    const auto grid = GridSpec::line(2048, 60.0);

    SUBCASE("zero duration is the identity") {
        const auto f = single_packet(grid, 0.0, 1.0, 1.0);
        const auto g = free_propagate(f, 0.0);
        CHECK(g.amp == f.amp);
    }
    SUBCASE("negative duration is rejected") {
        const auto f = single_packet(grid, 0.0, 0.0, 1.0);
        CHECK_THROWS_AS(free_propagate(f, -0.1), FieldError);
    }
    SUBCASE("Gaussian matches the closed form, center moves with +p") {
        const auto f = single_packet(grid, -2.0, 1.5, 1.0);
        const auto g = free_propagate(f, 2.0);
        CHECK(oracles::free_gaussian_distance(g, -2.0, 1.5, 1.0) < 1e-6);

        // density center and width
        const auto dens = total_density(g);
        double mass = 0.0, mean = 0.0;
        for (std::size_t j = 0; j < dens.size(); ++j) {
            const double x = grid.axes[0].coordinate(j);
            mass += dens[j];
            mean += dens[j] * x;
        }
        mean /= mass;
        double var = 0.0;
        for (std::size_t j = 0; j < dens.size(); ++j) {
            const double x = grid.axes[0].coordinate(j) - mean;
            var += dens[j] * x * x;
        }
        var /= mass;
        CHECK(mean == doctest::Approx(-2.0 + 1.5 * 2.0).epsilon(1e-6));
        CHECK(std::sqrt(var) == doctest::Approx(oracles::gaussian_width(1.0, 2.0)).epsilon(1e-6));
    }
    SUBCASE("ten random parameter sets match the closed form") {
        Rng rng(5150);
        for (int trial = 0; trial < 10; ++trial) {
            const double sigma = rng.uniform(0.7, 1.6);
            const double p = rng.uniform(-2.0, 2.0);
            const double x0 = rng.uniform(-4.0, 4.0);
            const double t = rng.uniform(0.3, 2.5);
            const auto f = single_packet(grid, x0, p, sigma);
            const auto g = free_propagate(f, t);
            CHECK(oracles::free_gaussian_distance(g, x0, p, sigma) < 1e-6);
        }
    }
    SUBCASE("momentum-space density is invariant") {
        const auto f = single_packet(grid, 0.0, 3.0, 1.2);
        const auto g = free_propagate(f, 1.7);
        auto spectrum = [&](const WaveField& w) {
            std::vector<cdouble> c(w.amp.begin(), w.amp.end());
            fft(std::span<cdouble>(c.data(), c.size()), false);
            std::vector<double> s(c.size());
            double total = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) total += std::norm(c[i]);
            for (std::size_t i = 0; i < c.size(); ++i) s[i] = std::norm(c[i]) / total;
            return s;
        };
        const auto s1 = spectrum(f);
        const auto s2 = spectrum(g);
        double worst = 0.0;
        for (std::size_t i = 0; i < s1.size(); ++i)
            worst = std::max(worst, std::abs(s1[i] - s2[i]));
        CHECK(worst < 1e-10);
    }
    SUBCASE("norm is preserved") {
        const auto f = single_packet(grid, 0.0, 2.0, 1.0);
        const auto g = free_propagate(f, 3.0);
        CHECK(std::abs(field_norm(g) - 1.0) < 1e-10);
    }
}

TEST_CASE("apply_piecewise_impulse") {
    const auto grid = GridSpec::line(1024, 40.0);
    const auto f = single_packet(grid, 0.0, 0.0, 1.0);
    const Region box(grid, {1}, {{-5.0}}, {{5.0}});

    SUBCASE("eta = 0 is the identity") {
        const auto g = apply_piecewise_impulse(f, box, {0.0}, 0.3);
        CHECK(g.amp == f.amp);
    }
    SUBCASE("eta tau = pi flips the interior; density untouched") {
        const auto g = apply_piecewise_impulse(f, box, {kPi}, 1.0);
        const auto mask = box.interior_mask();
        double worst_flip = 0.0, worst_dens = 0.0;
        const auto before = total_density(f);
        const auto after = total_density(g);
        for (std::size_t j = 0; j < f.amp.size(); ++j) {
            if (mask[j])
                worst_flip = std::max(worst_flip, std::abs(g.amp[j] + f.amp[j]));
            else
                worst_flip = std::max(worst_flip, std::abs(g.amp[j] - f.amp[j]));
            worst_dens = std::max(worst_dens, std::abs(after[j] - before[j]));
        }
        CHECK(worst_flip < 1e-14);
        CHECK(worst_dens < 1e-15);
    }
    SUBCASE("two boxes acquire the phase difference (eta2-eta1) tau") {
        PacketParams a, b;
        a.weight = cdouble(M_SQRT1_2, 0);
        a.center = {-10.0};
        a.momentum = {0.0};
        a.sigma = 1.0;
        b = a;
        b.center = {10.0};
        const auto two = synthesize_packets(grid, 1, {{a, 0}, {b, 0}});
        const Region boxes(grid, {1, 2}, {{-16.0}, {4.0}}, {{-4.0}, {16.0}});
        const double tau = 0.4, eta1 = 1.3, eta2 = 2.9;
        const auto g = apply_piecewise_impulse(two, boxes, {eta1, eta2}, tau);

        // pointwise phase-ratio oracle at the packet centres
        const auto idx_left = static_cast<std::size_t>((-10.0 + 20.0) / grid.axes[0].spacing());
        const auto idx_right = static_cast<std::size_t>((10.0 + 20.0) / grid.axes[0].spacing());
        const double phase_left = std::arg(g.amp[idx_left] / two.amp[idx_left]);
        const double phase_right = std::arg(g.amp[idx_right] / two.amp[idx_right]);
        double diff = phase_right - phase_left;
        while (diff > kPi) diff -= 2 * kPi;
        while (diff <= -kPi) diff += 2 * kPi;
        CHECK(diff == doctest::Approx(-(eta2 - eta1) * tau).epsilon(1e-12));
    }
    SUBCASE("a region from another grid is rejected") {
        const auto other = GridSpec::line(512, 40.0);
        const Region misaligned(other, {1}, {{-5.0}}, {{5.0}});
        CHECK_THROWS_AS(apply_piecewise_impulse(f, misaligned, {1.0}, 0.1), FieldError);
    }
}

TEST_CASE("apply_sg_deflection") {
    const auto grid = GridSpec::line(2048, 60.0);
    PacketParams p;
    p.center = {0.0};
    p.momentum = {0.0};
    p.sigma = 1.0;
    p.weight = cdouble(M_SQRT1_2, 0.0);
    const auto f = synthesize_packets(grid, 2, {{p, 0}, {p, 1}});

    SUBCASE("zero parameters leave the field untouched") {
        const auto g = apply_sg_deflection(f, 0.0, 0.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.amp.size(); ++i)
            worst = std::max(worst, std::abs(g.amp[i] - f.amp[i]));
        CHECK(worst < 1e-15);
    }
    SUBCASE("momentum expectation shifts by +-delta_p") {
        const auto g = apply_sg_deflection(f, 0.0, 2.0);
        const auto p_plus = momentum_expectation(extract_component(g, 0));
        const auto p_minus = momentum_expectation(extract_component(g, 1));
        CHECK(std::abs(p_plus[0] - 2.0) < 1e-8);
        CHECK(std::abs(p_minus[0] + 2.0) < 1e-8);
    }
    SUBCASE("alpha = pi negates the plus component, density unchanged") {
        const auto g = apply_sg_deflection(f, kPi, 0.0);
        double worst = 0.0;
        const std::size_t n = f.num_points();
        for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(g.at(0, j) + f.at(0, j)));
        CHECK(worst < 1e-14);
        const auto d1 = total_density(f);
        const auto d2 = total_density(g);
        double wd = 0.0;
        for (std::size_t j = 0; j < n; ++j) wd = std::max(wd, std::abs(d1[j] - d2[j]));
        CHECK(wd < 1e-15);
    }
    SUBCASE("spin dimension mismatch is rejected") {
        const auto scalar = single_packet(grid, 0.0, 0.0, 1.0);
        CHECK_THROWS_AS(apply_sg_deflection(scalar, 0.1, 0.1), FieldError);
    }
}

TEST_CASE("split_step_evolve") {
    const auto grid = GridSpec::line(1024, 40.0);
    const auto f = single_packet(grid, -5.0, 2.0, 1.0);

    SUBCASE("V = 0 reduces to free propagation") {
        const Region box(grid, {1}, {{5.0}}, {{10.0}});
        const auto split = split_step_evolve(f, box, {0.0}, 0.01, 50);
        const auto free = free_propagate(f, 0.5);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.amp.size(); ++i)
            worst = std::max(worst, std::abs(split.amp[i] - free.amp[i]));
        CHECK(worst < 1e-10);
    }
    SUBCASE("constant V everywhere is a global phase") {
        const Region all(grid, {1}, {{-20.0}}, {{20.0}});
        const double eta = 1.7, t = 0.4;
        const auto split = split_step_evolve(f, all, {eta}, 0.01, 40);
        const auto expected = free_propagate(f, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.amp.size(); ++i)
            worst = std::max(worst,
                             std::abs(split.amp[i] - expected.amp[i] * std::polar(1.0, -eta * t)));
        CHECK(worst < 1e-9);
    }
    SUBCASE("self-convergence is second order in dt") {
        // the asymptotic dt^2 window opens below 1/|K|_max; successive
        // halving differences isolate the order cleanly there
        const Region box(grid, {1}, {{-2.0}}, {{8.0}});
        const double eta = 2.0, t = 0.128;
        auto run = [&](double dt) {
            return split_step_evolve(f, box, {eta}, dt,
                                     static_cast<std::size_t>(std::llround(t / dt)));
        };
        auto diff = [&](const WaveField& a, const WaveField& b) {
            double e = 0.0;
            for (std::size_t i = 0; i < a.amp.size(); ++i) e += std::norm(a.amp[i] - b.amp[i]);
            return std::sqrt(e * grid.cell_volume());
        };
        const double dt = 5e-4;
        const auto u1 = run(dt), u2 = run(dt / 2), u4 = run(dt / 4);
        const double ratio = diff(u1, u2) / diff(u2, u4);
        CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
    }
    SUBCASE("accuracy guard rejects coarse steps") {
        const Region box(grid, {1}, {{-2.0}}, {{8.0}});
        CHECK_THROWS_AS(split_step_evolve(f, box, {20.0}, 0.01, 10), FieldError);
    }
}

TEST_CASE("extended_impulsive_evolve") {
    const auto grid = GridSpec::line(8192, 60.0);

    SUBCASE("equal etas act as a global phase on free propagation") {
        PacketParams a, b;
        a.weight = cdouble(M_SQRT1_2, 0);
        a.center = {-12.0};
        a.momentum = {0.0};
        a.sigma = 1.0;
        b = a;
        b.center = {12.0};
        const auto f = synthesize_packets(grid, 1, {{a, 0}, {b, 0}});
        const Region boxes(grid, {1, 2}, {{-20.0}, {4.0}}, {{-4.0}, {20.0}});
        const double eta = 1.1, tau = 0.2;
        const auto g = extended_impulsive_evolve(f, boxes, {eta, eta}, tau);
        const auto expected = free_propagate(f, tau);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.amp.size(); ++i)
            worst = std::max(worst, std::abs(g.amp[i] -
                                             expected.amp[i] * std::polar(1.0, -eta * tau)));
        // the exterior tail (below the coincidence tolerance) keeps phase 1
        CHECK(worst < 1e-6);
        CHECK(g.time == doctest::Approx(tau));
    }
    SUBCASE("matches the split-step oracle for coincident packets") {
        PacketParams a, b;
        a.weight = cdouble(M_SQRT1_2, 0);
        a.center = {-12.0};
        a.momentum = {0.0};
        a.sigma = 1.0;
        b = a;
        b.center = {12.0};
        const auto f = synthesize_packets(grid, 1, {{a, 0}, {b, 0}});
        const Region boxes(grid, {1, 2}, {{-20.0}, {4.0}}, {{-4.0}, {20.0}});
        const auto g = extended_impulsive_evolve(f, boxes, {0.9, 2.3}, 0.1);
        const auto oracle = split_step_evolve(f, boxes, {0.9, 2.3}, 0.002, 50);
        double l2 = 0.0;
        for (std::size_t i = 0; i < g.amp.size(); ++i) l2 += std::norm(g.amp[i] - oracle.amp[i]);
        CHECK(std::sqrt(l2 * grid.cell_volume()) < 1e-3);
    }
    SUBCASE("refuses an edge-straddling packet") {
        const auto f = single_packet(grid, 0.0, 0.0, 1.0);
        const Region box(grid, {1}, {{0.0}}, {{12.0}});
        CHECK_THROWS_AS(extended_impulsive_evolve(f, box, {1.0}, 0.1), FieldError);
    }
}

TEST_CASE("coincidence_report") {
    const auto grid = GridSpec::line(16384, 40.0);

    SUBCASE("packet well inside the box passes with tiny exterior mass") {
        const auto f = single_packet(grid, 0.0, 0.0, 1.0);
        const Region box(grid, {1}, {{-6.2}}, {{6.2}});
        const auto rep = coincidence_report(f, box);
        CHECK(rep.pass);
        CHECK(rep.interior_mass[0] > 1.0 - 1e-9);
        CHECK(rep.exterior_mass < 1e-6);
    }
    SUBCASE("edge-centered packet fails with half the mass inside") {
        const auto f = single_packet(grid, 0.0, 0.0, 1.0);
        const Region box(grid, {1}, {{0.0}}, {{12.0}});
        const auto rep = coincidence_report(f, box);
        CHECK_FALSE(rep.pass);
        CHECK(rep.interior_mass[0] == doctest::Approx(0.5).epsilon(0.01));
    }
    SUBCASE("zero field passes vacuously") {
        WaveField zero;
        zero.grid = grid;
        zero.spin_dim = 1;
        zero.amp.assign(grid.num_points(), cdouble{});
        const Region box(grid, {1}, {{-6.0}}, {{6.0}});
        const auto rep = coincidence_report(zero, box);
        CHECK(rep.pass);
        CHECK(rep.interior_mass[0] == 0.0);
        CHECK(rep.exterior_mass == 0.0);
    }
}

TEST_CASE("momentum_expectation and kick_check") {
    const auto grid = GridSpec::line(2048, 60.0);

    SUBCASE("plane-weighted packet has <P> = p0") {
        const auto f = single_packet(grid, 0.0, 3.0, 1.0);
        CHECK(std::abs(momentum_expectation(f)[0] - 3.0) < 1e-8);
    }
    SUBCASE("linear potential kicks by -tau g") {
        const auto f = single_packet(grid, 0.0, 0.5, 1.0);
        const double g = 0.8, tau = 0.4;
        std::vector<double> v(grid.num_points());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = g * grid.axes[0].coordinate(j);
        const auto rep = kick_check(f, v, tau);
        CHECK(std::abs(rep.measured[0] + tau * g) < 1e-8);
        CHECK(rep.max_abs_error < 1e-8);
    }
    SUBCASE("Gaussian bump matches the quadrature prediction") {
        const auto f = single_packet(grid, -1.0, 0.0, 1.3);
        std::vector<double> v(grid.num_points());
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double x = grid.axes[0].coordinate(j);
            v[j] = 2.0 * std::exp(-(x - 1.5) * (x - 1.5) / 6.0);
        }
        const auto rep = kick_check(f, v, 0.3);
        CHECK(rep.max_abs_error < 1e-6);
    }
}

TEST_CASE("overlap_integral") {
    const auto grid = GridSpec::line(2048, 80.0);
    const auto f = single_packet(grid, -1.0, 0.7, 1.0);

    SUBCASE("identical fields have unit inner product") {
        const auto r = overlap_integral(f, f);
        CHECK(std::abs(r.inner_product - cdouble(1, 0)) < 1e-12);
    }
    SUBCASE("far-separated packets have negligible density overlap") {
        const auto a = single_packet(grid, -15.0, 0.0, 0.7);
        const auto b = single_packet(grid, 15.0, 0.0, 0.7);
        CHECK(overlap_integral(a, b).density_overlap < 1e-20);
    }
    SUBCASE("odd and even fields are orthogonal") {
        PacketParams l, r;
        l.weight = cdouble(M_SQRT1_2, 0);
        l.center = {-6.0};
        l.momentum = {0.0};
        l.sigma = 1.0;
        r = l;
        r.center = {6.0};
        r.weight = cdouble(-M_SQRT1_2, 0);
        const auto odd = synthesize_packets(grid, 1, {{l, 0}, {r, 0}});
        const auto even = single_packet(grid, 0.0, 0.0, 2.0);
        CHECK(std::abs(overlap_integral(odd, even).inner_product) < 1e-12);
    }
    SUBCASE("grid mismatch is rejected") {
        const auto other = single_packet(GridSpec::line(1024, 80.0), 0.0, 0.0, 1.0);
        CHECK_THROWS_AS(overlap_integral(f, other), FieldError);
    }
}

TEST_CASE("commutator_action_check") {
    const auto grid = GridSpec::line(4096, 60.0);

    SUBCASE("constant V commutes") {
        // K amplifies FFT roundoff by k_max^2/2, so "zero" sits near 1e-11
        const auto f = single_packet(grid, 0.0, 1.0, 1.0);
        std::vector<double> v(grid.num_points(), 2.5);
        const auto rep = commutator_action_check(f, v, false);
        CHECK(rep.max_action < 1e-10);
    }
    SUBCASE("V = x^2 matches the analytic commutator") {
        const auto f = single_packet(grid, 1.0, 0.0, 1.2);
        std::vector<double> v(grid.num_points());
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double x = grid.axes[0].coordinate(j);
            v[j] = x * x;
        }
        const auto rep = commutator_action_check(f, v, true);
        CHECK(rep.max_deviation < 1e-6 * rep.rhs_scale);
    }
    SUBCASE("box potential on a coincident packet acts as nearly zero") {
        const auto f = single_packet(grid, 0.0, 0.0, 1.0);
        const Region box(grid, {1}, {{-13.0}}, {{13.0}});
        const auto v = sample_box_potential(box, {1.0});
        const auto rep = commutator_action_check(f, v, false);
        CHECK(rep.max_action < 1e-6 * rep.max_amplitude);
    }
}

TEST_CASE("norm preservation through an operation chain") {
    const auto grid = GridSpec::line(2048, 60.0);
    auto f = single_packet(grid, -5.0, 1.0, 1.0);
    const Region box(grid, {1}, {{-2.0}}, {{8.0}});
    f = free_propagate(f, 0.7);
    f = apply_piecewise_impulse(f, box, {2.2}, 0.3);
    f = split_step_evolve(f, box, {1.1}, 0.01, 30);
    f = free_propagate(f, 0.5);
    CHECK(std::abs(field_norm(f) - 1.0) < 1e-9);
}

TEST_CASE("two-dimensional grids") {
    const auto grid = GridSpec::plane(128, 30.0, 128, 30.0);

    PacketParams p;
    p.center = {0.0, 0.0};
    p.momentum = {1.0, -0.5};
    p.sigma = 1.0;
    const auto f = synthesize_packets(grid, 1, {{p, 0}});
    CHECK(std::abs(field_norm(f) - 1.0) < 1e-12);

    SUBCASE("momentum expectation per axis") {
        const auto pv = momentum_expectation(f);
        CHECK(std::abs(pv[0] - 1.0) < 1e-8);
        CHECK(std::abs(pv[1] + 0.5) < 1e-8);
    }
    SUBCASE("free propagation preserves norm and moves the packet") {
        const auto g = free_propagate(f, 1.5);
        CHECK(std::abs(field_norm(g) - 1.0) < 1e-10);
        const auto dens = total_density(g);
        double mass = 0.0, mx = 0.0, my = 0.0;
        for (std::size_t j = 0; j < dens.size(); ++j) {
            const auto idx = grid.unflatten(j);
            mass += dens[j];
            mx += dens[j] * grid.axes[0].coordinate(idx[0]);
            my += dens[j] * grid.axes[1].coordinate(idx[1]);
        }
        CHECK(mx / mass == doctest::Approx(1.5).epsilon(1e-6));
        CHECK(my / mass == doctest::Approx(-0.75).epsilon(1e-6));
    }
    SUBCASE("2-D impulse keeps the density") {
        const Region box(grid, {1}, {{-4.0, -4.0}}, {{4.0, 4.0}});
        const auto g = apply_piecewise_impulse(f, box, {1.3}, 0.5);
        const auto d1 = total_density(f);
        const auto d2 = total_density(g);
        double worst = 0.0;
        for (std::size_t j = 0; j < d1.size(); ++j)
            worst = std::max(worst, std::abs(d1[j] - d2[j]));
        CHECK(worst < 1e-15);
    }
}

TEST_CASE("kinetic stats of a drifting packet") {
    const auto grid = GridSpec::line(2048, 60.0);
    const auto f = single_packet(grid, 0.0, 2.0, 1.0);
    const auto st = kinetic_stats(f);
    // <K> = p^2/2 + 1/(8 sigma^2) for a Gaussian
    CHECK(st.mean == doctest::Approx(2.0 + 0.125).epsilon(1e-8));
    CHECK(st.spread > 0.0);
}

TEST_CASE("momentum quantile bounds the spectrum") {
    const auto grid = GridSpec::line(2048, 60.0);
    const auto f = single_packet(grid, 0.0, 3.0, 1.0);
    const double q = momentum_quantile(f, 0.9999);
    CHECK(q > 3.0);
    CHECK(q < 3.0 + 4.0); // ~3.9 sigma_k above the carrier
}
