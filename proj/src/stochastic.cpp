#include "qmeas/stochastic.hpp"

#include <cmath>

#include "qmeas/rng.hpp"

namespace qmeas {

namespace {

constexpr double kPi = 3.14159265358979323846264338;

void require(bool cond, const char* msg) {
    if (!cond) throw StochasticError(msg);
}

struct Rule1D {
    std::vector<double> points;
    std::vector<double> weights; // include the pdf factor
};

// quadrature rule over one marginal with the density folded into the weights
Rule1D marginal_rule(const Marginal& m) {
    std::vector<double> nodes, weights;
    gauss_legendre(64, nodes, weights);
    Rule1D rule;
    double lo, hi;
    if (m.kind == Marginal::Kind::Uniform) {
        require(m.b >= m.a, "Marginal: empty uniform support");
        if (m.b == m.a) { // degenerate: a point mass
            rule.points = {m.a};
            rule.weights = {1.0};
            return rule;
        }
        lo = m.a;
        hi = m.b;
    } else {
        require(m.sd > 0.0, "Marginal: non-positive gaussian sd");
        lo = m.mean - 8.0 * m.sd;
        hi = m.mean + 8.0 * m.sd;
    }
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double x = mid + half * nodes[i];
        double pdf;
        if (m.kind == Marginal::Kind::Uniform) {
            pdf = 1.0 / (m.b - m.a);
        } else {
            const double z = (x - m.mean) / m.sd;
            pdf = std::exp(-0.5 * z * z) / (m.sd * std::sqrt(2.0 * kPi));
        }
        rule.points.push_back(x);
        rule.weights.push_back(half * weights[i] * pdf);
    }
    return rule;
}

double sample_marginal(const Marginal& m, Rng& rng) {
    if (m.kind == Marginal::Kind::Uniform) return rng.uniform(m.a, m.b);
    return rng.normal(m.mean, m.sd);
}

} // namespace

Marginal Marginal::uniform(double a, double b) {
    Marginal m;
    m.kind = Kind::Uniform;
    m.a = a;
    m.b = b;
    return m;
}

Marginal Marginal::gaussian(double mean, double sd) {
    Marginal m;
    m.kind = Kind::Gaussian;
    m.mean = mean;
    m.sd = sd;
    return m;
}

cdouble pointer_overlap(const PointerModel& model, double eta_k, double eta_kp,
                        double tau) {
    require(model.width > 0.0, "PointerModel: width must be positive");
    const double d = (eta_k - eta_kp) * tau;
    const double mag = std::exp(-d * d / (8.0 * model.width * model.width));
    return std::polar(mag, -model.carrier * d);
}

double neutral_overlap_magnitude(const PointerModel& model, double eta, double tau) {
    require(model.width > 0.0, "PointerModel: width must be positive");
    const double d = model.neutral_offset - eta * tau;
    return std::exp(-d * d / (8.0 * model.width * model.width));
}

StochasticParams sample_params(const ParamDensity& density, std::uint64_t seed,
                               std::uint64_t index) {
    Rng rng = substream(seed, "stochastic-params", index);
    StochasticParams p;
    for (const auto& m : density.eta) p.etas.push_back(sample_marginal(m, rng));
    p.y_offset = sample_marginal(density.y, rng);
    return p;
}

AverageResult overbar_average(const std::function<cdouble(const StochasticParams&)>& u,
                              const ParamDensity& density,
                              const AverageOptions& options) {
    require(density.independent, "overbar_average: only independent marginals supported");
    const std::size_t dims = density.eta.size() + 1;

    if (options.method == AverageOptions::Method::MonteCarlo) {
        require(options.mc_samples >= 2, "overbar_average: too few Monte Carlo samples");
        cdouble sum{};
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < options.mc_samples; ++i) {
            const auto p = sample_params(density, options.seed, i);
            const cdouble v = u(p);
            require(std::isfinite(v.real()) && std::isfinite(v.imag()),
                    "overbar_average: non-finite sample (non-integrable u?)");
            sum += v;
            sum_sq += std::norm(v);
        }
        const double n = static_cast<double>(options.mc_samples);
        AverageResult res;
        res.value = sum / n;
        const double var = std::max(0.0, sum_sq / n - std::norm(res.value));
        res.std_error = std::sqrt(var / n);
        return res;
    }

    require(dims <= 3, "overbar_average: quadrature limited to 3 stochastic dimensions");
    std::vector<Rule1D> rules;
    for (const auto& m : density.eta) rules.push_back(marginal_rule(m));
    rules.push_back(marginal_rule(density.y));

    cdouble num{};
    double den = 0.0;
    StochasticParams p;
    p.etas.assign(density.eta.size(), 0.0);

    std::vector<std::size_t> idx(dims, 0);
    for (;;) {
        double w = 1.0;
        for (std::size_t d = 0; d < dims; ++d) w *= rules[d].weights[idx[d]];
        for (std::size_t d = 0; d + 1 < dims; ++d) p.etas[d] = rules[d].points[idx[d]];
        p.y_offset = rules.back().points[idx.back()];
        const cdouble v = u(p);
        require(std::isfinite(v.real()) && std::isfinite(v.imag()),
                "overbar_average: non-finite integrand (non-integrable u?)");
        num += w * v;
        den += w;

        std::size_t d = 0;
        for (; d < dims; ++d) {
            if (++idx[d] < rules[d].points.size()) break;
            idx[d] = 0;
        }
        if (d == dims) break;
    }
    require(den > 0.0, "overbar_average: vanishing density normalization");
    return {num / den, 0.0};
}

cdouble average_pair(const std::function<cdouble(double, double)>& u,
                     const Marginal& first, const Marginal& second) {
    const auto r1 = marginal_rule(first);
    const auto r2 = marginal_rule(second);
    cdouble num{};
    double den = 0.0;
    for (std::size_t i = 0; i < r1.points.size(); ++i)
        for (std::size_t j = 0; j < r2.points.size(); ++j) {
            const double w = r1.weights[i] * r2.weights[j];
            num += w * u(r1.points[i], r2.points[j]);
            den += w;
        }
    return num / den;
}

DecoherenceMatrix decoherence_matrix(const PointerModel& model,
                                     const ParamDensity& density, double tau,
                                     const AverageOptions& options) {
    require(density.independent, "decoherence_matrix: marginals must be independent");
    const std::size_t n = density.eta.size();
    require(n >= 1, "decoherence_matrix: no eta marginals");

    DecoherenceMatrix out{Operator::identity(n), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t kp = k + 1; kp < n; ++kp) {
            cdouble v;
            if (options.method == AverageOptions::Method::MonteCarlo) {
                ParamDensity pair;
                pair.eta = {density.eta[k], density.eta[kp]};
                pair.y = density.y;
                v = overbar_average(
                        [&](const StochasticParams& p) {
                            return pointer_overlap(model, p.etas[0], p.etas[1], tau);
                        },
                        pair, options)
                        .value;
            } else {
                v = average_pair(
                    [&](double ek, double ekp) {
                        return pointer_overlap(model, ek, ekp, tau);
                    },
                    density.eta[k], density.eta[kp]);
            }
            out.matrix.at(k, kp) = v;
            out.matrix.at(kp, k) = std::conj(v);
            out.max_offdiagonal = std::max(out.max_offdiagonal, std::abs(v));
        }
    }
    return out;
}

DecoherenceMatrix phase_average_matrix(const ParamDensity& density, double tau) {
    require(density.independent, "phase_average_matrix: marginals must be independent");
    const std::size_t n = density.eta.size();
    DecoherenceMatrix out{Operator::identity(n), 0.0};
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t kp = k + 1; kp < n; ++kp) {
            const cdouble v = average_pair(
                [&](double ek, double ekp) {
                    return std::polar(1.0, -tau * (ek - ekp));
                },
                density.eta[k], density.eta[kp]);
            out.matrix.at(k, kp) = v;
            out.matrix.at(kp, k) = std::conj(v);
            out.max_offdiagonal = std::max(out.max_offdiagonal, std::abs(v));
        }
    return out;
}

std::vector<double> averaged_density(const std::vector<Branch>& branches,
                                     const Operator& matrix) {
    require(!branches.empty(), "averaged_density: no branches");
    const auto& g = branches.front().field.grid;
    const std::size_t spin = branches.front().field.spin_dim;
    for (const auto& b : branches) {
        require(b.field.grid == g, "averaged_density: grid mismatch");
        require(b.field.spin_dim == spin, "averaged_density: spin dim mismatch");
        require(b.k < matrix.dim(), "averaged_density: branch index outside matrix");
    }

    const std::size_t n = g.num_points();
    std::vector<double> dens(n, 0.0);
    for (std::size_t i = 0; i < branches.size(); ++i) {
        for (std::size_t j = 0; j < branches.size(); ++j) {
            const cdouble w =
                branches[i].coeff * std::conj(branches[j].coeff) *
                matrix.at(branches[i].k, branches[j].k);
            if (w == cdouble{}) continue;
            for (std::size_t s = 0; s < spin; ++s)
                for (std::size_t p = 0; p < n; ++p)
                    dens[p] += std::real(w * branches[i].field.at(s, p) *
                                         std::conj(branches[j].field.at(s, p)));
        }
    }
    return dens;
}

std::vector<double> averaged_density(const std::vector<Branch>& branches,
                                     const PointerModel& model,
                                     const ParamDensity& density, double tau,
                                     const AverageOptions& options) {
    return averaged_density(branches,
                            decoherence_matrix(model, density, tau, options).matrix);
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) /
                                  static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

} // namespace qmeas
