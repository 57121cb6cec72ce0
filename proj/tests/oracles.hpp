#pragma once

// Test-side oracles, independent of the library paths they validate.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qmeas/grid_field.hpp"
#include "qmeas/rng.hpp"

namespace oracles {

using qmeas::cdouble;

inline constexpr double kPi = 3.14159265358979323846264338;

// closed-form free evolution of one Gaussian packet (hbar = m = 1),
// initial (2 pi s0^2)^(-1/4) e^{i p (x - x0)} e^{-(x-x0)^2 / 4 s0^2}
inline cdouble free_gaussian(double x, double t, double x0, double p, double sigma0) {
    const cdouble s(sigma0, t / (2.0 * sigma0));
    const double u = x - x0 - p * t;
    const cdouble prefactor =
        std::pow(2.0 * kPi * sigma0 * sigma0, -0.25) * std::sqrt(cdouble(sigma0, 0.0) / s);
    const cdouble phase = std::exp(cdouble(0.0, p * (x - x0) - 0.5 * p * p * t));
    return prefactor * phase * std::exp(-u * u / (4.0 * sigma0 * s));
}

inline double gaussian_width(double sigma0, double t) {
    const double r = t / (2.0 * sigma0 * sigma0);
    return sigma0 * std::sqrt(1.0 + r * r);
}

// L2 distance between a computed scalar field and the oracle, minimized over
// a global phase
inline double free_gaussian_distance(const qmeas::WaveField& f, double x0, double p,
                                     double sigma0) {
    const auto& ax = f.grid.axes[0];
    cdouble inner{};
    double norm_o = 0.0;
    std::vector<cdouble> exact(ax.points);
    for (std::size_t j = 0; j < ax.points; ++j) {
        exact[j] = free_gaussian(ax.coordinate(j), f.time, x0, p, sigma0);
        inner += std::conj(exact[j]) * f.at(0, j);
        norm_o += std::norm(exact[j]);
    }
    (void)norm_o;
    const cdouble phase = inner / std::abs(inner);
    double err = 0.0;
    for (std::size_t j = 0; j < ax.points; ++j)
        err += std::norm(f.at(0, j) - phase * exact[j]);
    return std::sqrt(err * ax.spacing());
}

// centered finite difference of the (unwrapped) phase
inline double phase_gradient_fd(const qmeas::WaveField& f, std::size_t j) {
    const auto& ax = f.grid.axes[0];
    const std::size_t jm = (j + ax.points - 1) % ax.points;
    const std::size_t jp = (j + 1) % ax.points;
    double d = std::arg(f.at(0, jp)) - std::arg(f.at(0, jm));
    while (d > kPi) d -= 2.0 * kPi;
    while (d <= -kPi) d += 2.0 * kPi;
    return d / (2.0 * ax.spacing());
}

// brute-force DFT, the oracle behind the fft
inline std::vector<cdouble> dft(const std::vector<cdouble>& x, bool inverse) {
    const std::size_t n = x.size();
    std::vector<cdouble> out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cdouble acc{};
        for (std::size_t j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(j * k) /
                                              static_cast<double>(n));
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

// Simpson rule on a sampled complex function
inline cdouble simpson(const std::function<cdouble(double)>& f, double lo, double hi,
                       std::size_t n) {
    if (n % 2) ++n;
    const double h = (hi - lo) / static_cast<double>(n);
    cdouble acc = f(lo) + f(hi);
    for (std::size_t i = 1; i < n; ++i)
        acc += f(lo + h * static_cast<double>(i)) * ((i % 2) ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

} // namespace oracles
