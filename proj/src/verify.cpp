#include "qmeas/verify.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmeas/bohmian.hpp"
#include "qmeas/config_io.hpp"
#include "qmeas/experiments.hpp"
#include "qmeas/grid_field.hpp"
#include "qmeas/operator_algebra.hpp"
#include "qmeas/rng.hpp"
#include "qmeas/stochastic.hpp"

namespace qmeas {

namespace {

struct Failure {
    std::string detail;
};

// throwing on the first violation keeps the check bodies linear
struct Gate {
    void expect(bool cond, const std::string& what) {
        if (!cond) throw Failure{what};
    }
};

std::vector<std::vector<cdouble>> random_orthonormal_basis(std::size_t dim, Rng& rng) {
    std::vector<std::vector<cdouble>> basis;
    for (std::size_t v = 0; v < dim; ++v) {
        std::vector<cdouble> x(dim);
        for (auto& z : x) z = cdouble(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
        for (const auto& u : basis) {
            cdouble c{};
            for (std::size_t i = 0; i < dim; ++i) c += std::conj(u[i]) * x[i];
            for (std::size_t i = 0; i < dim; ++i) x[i] -= c * u[i];
        }
        double nrm = 0.0;
        for (const auto& z : x) nrm += std::norm(z);
        nrm = std::sqrt(nrm);
        for (auto& z : x) z /= nrm;
        basis.push_back(std::move(x));
    }
    return basis;
}

ProjectorPartition random_partition(std::size_t dim, std::size_t blocks, Rng& rng) {
    const auto basis = random_orthonormal_basis(dim, rng);
    std::vector<Projector> projectors;
    std::size_t next = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t remaining = dim - next;
        const std::size_t blocks_left = blocks - b;
        std::size_t take = 1;
        if (remaining > blocks_left)
            take = 1 + rng.next_u64() % (remaining - blocks_left + 1);
        std::vector<std::vector<cdouble>> group(basis.begin() + next,
                                                basis.begin() + next + take);
        projectors.push_back(make_projector(group));
        next += take;
    }
    if (next < dim) {
        std::vector<std::vector<cdouble>> rest(basis.begin() + next, basis.end());
        projectors.push_back(make_projector(rest));
    }
    return ProjectorPartition(projectors);
}

Operator random_hermitian(std::size_t dim, Rng& rng) {
    Operator a(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        a.at(i, i) = rng.normal(0.0, 1.0);
        for (std::size_t j = i + 1; j < dim; ++j) {
            const cdouble z(rng.normal(0.0, 0.5), rng.normal(0.0, 0.5));
            a.at(i, j) = z;
            a.at(j, i) = std::conj(z);
        }
    }
    return a;
}

CheckResult timed(const std::string& name, const std::function<std::string()>& body) {
    CheckResult result;
    result.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        result.detail = body();
        result.pass = true;
    } catch (const Failure& f) {
        result.detail = f.detail;
        result.pass = false;
    } catch (const std::exception& e) {
        result.detail = std::string("exception: ") + e.what();
        result.pass = false;
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// --- criterion 1 -----------------------------------------------------------

std::string check_operator_identities() {
    Gate g;
    Rng rng(0x5eed0001);
    double worst = 0.0, worst_unitary = 0.0;

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 2 + rng.next_u64() % 15; // 2..16
        const std::size_t blocks = 2 + rng.next_u64() % std::min<std::size_t>(3, dim - 1);
        const auto partition = random_partition(dim, blocks, rng);
        PhaseVector alphas;
        for (std::size_t k = 0; k < partition.size(); ++k)
            alphas.push_back(rng.uniform(-3.14, 3.14));

        const Operator u = coarse_grained_exp(partition, alphas);
        Operator arg = Operator::zero(dim);
        for (std::size_t k = 0; k < partition.size(); ++k)
            arg = arg + partition[k].op() * cdouble(0.0, alphas[k]);
        worst = std::max(worst, distance(u, matrix_exp_oracle(arg)));
        worst_unitary =
            std::max(worst_unitary, distance(u.adjoint() * u, Operator::identity(dim)));
    }

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dr = 2 + rng.next_u64() % 3; // 2..4
        const std::size_t ds = 2 + rng.next_u64() % 3;
        const auto pr = random_partition(dr, 2, rng);
        const auto ps = random_partition(ds, 2, rng);
        std::vector<PhaseVector> phases(pr.size(), PhaseVector(ps.size(), 0.0));
        for (auto& row : phases)
            for (auto& a : row) a = rng.uniform(-3.14, 3.14);

        const Operator u = two_factor_exp(pr, ps, phases);
        Operator arg = Operator::zero(dr * ds);
        for (std::size_t r = 0; r < pr.size(); ++r)
            for (std::size_t s = 0; s < ps.size(); ++s)
                arg = arg + pr[r].op().tensor(ps[s].op()) * cdouble(0.0, phases[r][s]);
        worst = std::max(worst, distance(u, matrix_exp_oracle(arg)));
    }

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dq = 2 + rng.next_u64() % 2; // 2..3
        const std::size_t drr = 2 + rng.next_u64() % 2;
        const auto pq = random_partition(dq, dq, rng);
        SpectralData spectral;
        for (std::size_t q = 0; q < pq.size(); ++q) {
            spectral.eigenvalues.push_back(rng.uniform(-2.0, 2.0));
            spectral.projectors.push_back(pq[q]);
        }
        const Operator r = random_hermitian(drr, rng);
        const Operator u = tensor_factor_exp(spectral, r);

        Operator q_op = Operator::zero(dq);
        for (std::size_t q = 0; q < pq.size(); ++q)
            q_op = q_op + pq[q].op() * cdouble(spectral.eigenvalues[q], 0.0);
        const Operator arg = q_op.tensor(r) * cdouble(0.0, 1.0);
        worst = std::max(worst, distance(u, matrix_exp_oracle(arg)));
    }

    g.expect(worst < 1e-12, "identity deviation " + format_double(worst) + " >= 1e-12");
    g.expect(worst_unitary < 1e-12,
             "unitarity deviation " + format_double(worst_unitary) + " >= 1e-12");
    return "300 randomized cases, max |U - exp oracle| = " + format_double(worst) +
           ", max unitarity defect = " + format_double(worst_unitary);
}

// --- criterion 2 -----------------------------------------------------------

std::string check_bch_scaling() {
    Gate g;
    Rng rng(0x5eed0002);
    double lo = 1e9, hi = -1e9;
    for (int trial = 0; trial < 10; ++trial) {
        const Operator h1 = random_hermitian(4, rng);
        const Operator h2 = random_hermitian(4, rng);
        auto error_at = [&](double theta) {
            const Operator a = h1 * cdouble(0.0, theta);
            const Operator b = h2 * cdouble(0.0, theta);
            const Operator lhs = matrix_exp_oracle(a) * matrix_exp_oracle(b);
            const Operator rhs = matrix_exp_oracle(bch_eta_truncated(a, b, 3));
            return distance(lhs, rhs);
        };
        const double e1 = error_at(0.1);
        const double e2 = error_at(0.05);
        const double exponent = std::log2(e1 / e2);
        lo = std::min(lo, exponent);
        hi = std::max(hi, exponent);
        g.expect(exponent > 3.7 && exponent < 4.3,
                 "order-3 scaling exponent " + format_double(exponent) +
                     " outside [3.7, 4.3]");
    }
    return "10 anti-hermitian pairs, scaling exponents in [" + format_double(lo) + ", " +
           format_double(hi) + "]";
}

// --- criterion 3 -----------------------------------------------------------

std::string check_impulse_invariance() {
    Gate g;
    const GridSpec grid = GridSpec::line(4096, 40.0);
    PacketParams p;
    p.center = {0.0};
    p.momentum = {1.0};
    p.sigma = 1.0;
    const WaveField f = synthesize_packets(grid, 1, {{p, 0}});
    const Region region(grid, {1}, {{-5.0}}, {{5.0}});
    const WaveField hit = apply_piecewise_impulse(f, region, {3.21}, 0.7);

    const auto before = total_density(f);
    const auto after = total_density(hit);
    double change = 0.0;
    for (std::size_t j = 0; j < before.size(); ++j)
        change = std::max(change, std::abs(after[j] - before[j]));
    g.expect(change < 1e-15, "pointwise density change " + format_double(change));
    return "4096-point grid, max pointwise |density change| = " + format_double(change);
}

// --- criterion 4 -----------------------------------------------------------

std::string check_kick() {
    Gate g;
    const GridSpec grid = GridSpec::line(4096, 40.0);
    PacketParams p;
    p.center = {-2.0};
    p.momentum = {1.5};
    p.sigma = 1.2;
    const WaveField f = synthesize_packets(grid, 1, {{p, 0}});

    const auto& ax = grid.axes[0];
    auto sampled = [&](const std::function<double(double)>& v) {
        std::vector<double> out(ax.points);
        for (std::size_t j = 0; j < ax.points; ++j) out[j] = v(ax.coordinate(j));
        return out;
    };
    const std::vector<std::vector<double>> potentials = {
        sampled([](double x) { return 0.8 * x; }),
        sampled([](double x) { return 0.05 * x * x; }),
        sampled([](double x) { return 2.0 * std::exp(-(x - 1.0) * (x - 1.0) / 8.0); }),
        sampled([](double x) { return std::cos(0.5 * x); }),
        sampled([](double x) {
            return 1.5 * std::exp(-x * x / 18.0) + 0.3 * std::sin(0.4 * x);
        }),
    };
    double worst = 0.0;
    for (const auto& v : potentials) {
        const auto rep = kick_check(f, v, 0.35);
        worst = std::max(worst, rep.max_abs_error);
        g.expect(rep.max_abs_error < 1e-6,
                 "kick deviation " + format_double(rep.max_abs_error) + " >= 1e-6");
    }
    return "5 smooth potentials, max |<P> shift + tau int grad V |psi|^2| = " +
           format_double(worst);
}

// --- criterion 5 -----------------------------------------------------------

std::string check_extended_impulsive() {
    Gate g;
    const GridSpec grid = GridSpec::line(16384, 40.0);
    PacketParams p;
    p.center = {0.0};
    p.momentum = {0.0};
    p.sigma = 1.0;
    const WaveField f = synthesize_packets(grid, 1, {{p, 0}});

    const double eta = 2.0, tau = 0.1;

    // coincident case: box edges exactly 6 sigma from the packet centre
    const Region box(grid, {1}, {{-6.0}}, {{6.0}});
    const auto report = coincidence_report(f, box);
    g.expect(report.pass, "strong coincidence report failed at 6 sigma margin");

    const WaveField ideal = extended_impulsive_evolve(f, box, {eta}, tau);
    const WaveField oracle = split_step_evolve(f, box, {eta}, 0.002, 50);
    double l2 = 0.0;
    for (std::size_t j = 0; j < ideal.amp.size(); ++j)
        l2 += std::norm(ideal.amp[j] - oracle.amp[j]);
    l2 = std::sqrt(l2 * grid.cell_volume());
    g.expect(l2 <= 1e-3, "coincident L2 discrepancy " + format_double(l2) + " > 1e-3");

    // control: packet straddling a box edge
    const Region edge_box(grid, {1}, {{0.0}}, {{12.0}});
    bool refused = false;
    try {
        (void)extended_impulsive_evolve(f, edge_box, {eta}, tau);
    } catch (const FieldError&) {
        refused = true;
    }
    g.expect(refused, "edge-straddling impulse was not refused");

    const WaveField forced =
        free_propagate(apply_piecewise_impulse(f, edge_box, {eta}, tau), tau);
    const WaveField oracle2 = split_step_evolve(f, edge_box, {eta}, 0.002, 50);
    double l2_bad = 0.0;
    for (std::size_t j = 0; j < forced.amp.size(); ++j)
        l2_bad += std::norm(forced.amp[j] - oracle2.amp[j]);
    l2_bad = std::sqrt(l2_bad * grid.cell_volume());
    g.expect(l2_bad >= 1e-2,
             "edge-straddling divergence " + format_double(l2_bad) + " < 1e-2");

    return "coincident L2 = " + format_double(l2) +
           ", straddling control L2 = " + format_double(l2_bad) + ", gate refused";
}

// --- criterion 6 -----------------------------------------------------------

std::string check_epr_tables() {
    Gate g;
    auto config = canonical_epr();
    const auto result = run_epr(config);
    const auto& rep = *result.epr;

    g.expect(std::abs(rep.before.coherent_plus) < 1e-12 &&
                 std::abs(rep.before.coherent_minus - 1.0) < 1e-12,
             "before-interaction coherent marginals differ from (0, 1)");
    g.expect(rep.rows.size() >= 20, "expected at least 20 alpha rows");
    g.expect(rep.max_coherent_vs_formula < 1e-12,
             "coherent vs formula deviation " +
                 format_double(rep.max_coherent_vs_formula));

    // brute-force route: dense exponential of the projector combination
    const Projector p_plus_z = make_projector({{cdouble(1, 0), cdouble(0, 0)}});
    double worst = 0.0;
    for (const auto& row : rep.rows) {
        const Operator arg =
            p_plus_z.op().tensor(Operator::identity(2)) * cdouble(0.0, row.alpha);
        const Operator u = matrix_exp_oracle(arg);
        const std::vector<cdouble> singlet{0.0, M_SQRT1_2, -M_SQRT1_2, 0.0};
        std::vector<cdouble> out(4);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) out[r] += u.at(r, c) * singlet[c];
        // <s1_z, +-x| = z-basis amplitudes combined with x-state weights
        const cdouble plus_x_1 = M_SQRT1_2 * (out[0] + out[1]);
        const cdouble plus_x_2 = M_SQRT1_2 * (out[2] + out[3]);
        const cdouble minus_x_1 = M_SQRT1_2 * (out[0] - out[1]);
        const cdouble minus_x_2 = M_SQRT1_2 * (out[2] - out[3]);
        const double coh_plus = std::norm(plus_x_1 + plus_x_2);
        const double coh_minus = std::norm(minus_x_1 + minus_x_2);
        worst = std::max({worst, std::abs(coh_plus - row.formula_plus),
                          std::abs(coh_minus - row.formula_minus)});
    }
    g.expect(worst < 1e-12, "brute-force amplitudes vs formula: " + format_double(worst));

    g.expect(std::abs(rep.averaged_plus - 0.5) < 1e-10 &&
                 std::abs(rep.averaged_minus - 0.5) < 1e-10,
             "full-period averaged marginals differ from 1/2");
    g.expect(rep.coherent_table_changed, "coherent table did not react to the interaction");

    return "before (0,1); " + std::to_string(rep.rows.size()) +
           " alphas, |coherent - formula| max " +
           format_double(std::max(rep.max_coherent_vs_formula, worst)) +
           "; averaged = (" + format_double(rep.averaged_plus) + ", " +
           format_double(rep.averaged_minus) + ")";
}

// --- criterion 7 -----------------------------------------------------------

std::string check_two_slit() {
    Gate g;
    const auto result = run_two_slit(canonical_two_slit());
    const auto& rep = *result.two_slit;
    g.expect(rep.max_pointwise_diff <= 1e-3,
             "averaged density deviates from |psi1|^2 + |psi2|^2 by " +
                 format_double(rep.max_pointwise_diff));
    g.expect(rep.visibility_averaged < 0.05,
             "averaged visibility " + format_double(rep.visibility_averaged) + " >= 0.05");
    g.expect(rep.visibility_control > 0.9,
             "control visibility " + format_double(rep.visibility_control) + " <= 0.9");
    return "averaged visibility " + format_double(rep.visibility_averaged) +
           ", control " + format_double(rep.visibility_control) +
           ", max pointwise diff " + format_double(rep.max_pointwise_diff);
}

// --- criterion 8 -----------------------------------------------------------

std::string check_equivariance() {
    Gate g;
    const GridSpec grid = GridSpec::line(4096, 60.0);
    PacketParams p;
    p.center = {0.0};
    p.momentum = {1.0};
    p.sigma = 1.0;
    const WaveField psi0 = synthesize_packets(grid, 1, {{p, 0}});

    const double t_loc = 1.0, tau = 0.1, t_end = 1.5;
    const Region box(grid, {1}, {{-8.5}}, {{10.5}});

    FieldHistory history;
    history.add_base(0.0, psi0);
    const WaveField at_loc = history.field_at(t_loc, true);
    const auto report = coincidence_report(at_loc, box);
    g.expect(report.pass, "impulsive event is not coincident");
    history.add_base(t_loc, apply_piecewise_impulse(at_loc, box, {5.0}, tau));

    EnsembleSpec spec;
    spec.count = 10000;
    spec.seed = 777;
    const auto x0 = sample_quantum_equilibrium(psi0, spec);

    EnsembleOptions opt;
    opt.dt_max = 0.02;
    auto ens = integrate_ensemble(history, x0, 0.0, t_end, spec.node_epsilon, opt);

    const double ks = equivariance_distance(history.field_at(t_end), ens.positions.back());
    const double crit = ks_critical_1pct(spec.count);
    g.expect(ks < crit, "KS distance " + format_double(ks) + " >= critical " +
                            format_double(crit));
    const double flagged_frac =
        static_cast<double>(ens.flagged_count) / static_cast<double>(spec.count);
    g.expect(flagged_frac < 1e-3,
             "flagged fraction " + format_double(flagged_frac) + " >= 1e-3");
    return "N = 10000 through free evolution + coincident impulse: KS = " +
           format_double(ks) + " (critical " + format_double(crit) + "), flagged " +
           std::to_string(ens.flagged_count);
}

// --- criterion 9 -----------------------------------------------------------

std::string sg_envelope(const ExperimentConfig& config, Gate& g) {
    const auto result = run_stern_gerlach(config);
    const auto& det = result.stern_gerlach->detectors;
    const auto n = static_cast<double>(config.ensemble.count - det.flagged);
    std::ostringstream out;
    for (std::size_t b = 0; b < det.labels.size(); ++b) {
        const double p = det.expected[b];
        const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) / n);
        const double dev = std::abs(det.frequencies[b] - p);
        out << " label " << det.labels[b] << ": freq " << format_double(det.frequencies[b])
            << " vs " << format_double(p) << " (" << format_double(dev / sigma)
            << " sigma);";
        g.expect(dev <= 3.0 * sigma,
                 config.name + ": detector " + std::to_string(det.labels[b]) +
                     " frequency off by " + format_double(dev / sigma) + " sigma");
    }
    g.expect(det.flagged < config.ensemble.count / 100,
             config.name + ": too many flagged trajectories");
    return out.str();
}

std::string check_stern_gerlach() {
    Gate g;
    std::string detail = "spin-1/2:";
    detail += sg_envelope(canonical_stern_gerlach_half(), g);
    detail += " spin-1:";
    detail += sg_envelope(canonical_stern_gerlach_spin1(), g);
    return detail;
}

// --- criterion 10 ----------------------------------------------------------

std::string check_decoherence_matrix() {
    Gate g;

    // closed form vs direct quadrature of the pointer overlap integral
    double worst = 0.0;
    const PointerModel models[] = {{1.0, 0.0, 0.0}, {0.5, 12.0, 0.0}, {2.0, 30.0, 0.0}};
    for (const auto& model : models) {
        for (double a : {0.0, 0.3, 1.7}) {
            for (double b : {0.0, -0.9, 2.4}) {
                const double tau = 1.3;
                // Simpson quadrature over +-12 widths around both centres
                const double lo = std::min(a, b) * tau - 12.0 * model.width;
                const double hi = std::max(a, b) * tau + 12.0 * model.width;
                const std::size_t n = 4000;
                const double h = (hi - lo) / static_cast<double>(n);
                auto phi = [&](double y, double shift) {
                    const double u = y - shift;
                    const double amp = std::pow(2.0 * 3.14159265358979324 * model.width *
                                                    model.width,
                                                -0.25) *
                                       std::exp(-u * u / (4.0 * model.width * model.width));
                    return std::polar(amp, model.carrier * u);
                };
                cdouble integral{};
                for (std::size_t i = 0; i <= n; ++i) {
                    const double y = lo + h * static_cast<double>(i);
                    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                    integral += w * phi(y, a * tau) * std::conj(phi(y, b * tau));
                }
                integral *= h / 3.0;
                const cdouble closed = pointer_overlap(model, a, b, tau);
                worst = std::max(worst, std::abs(closed - integral));
            }
        }
    }
    g.expect(worst < 1e-8, "closed form vs quadrature: " + format_double(worst));

    // quasi-classical regime: k0 w >= 20, wide eta spread
    PointerModel quasi{1.0, 25.0, 0.0};
    ParamDensity density;
    density.eta = {Marginal::uniform(0.0, 2.0), Marginal::uniform(0.0, 2.0),
                   Marginal::uniform(0.0, 2.0)};
    const auto dec = decoherence_matrix(quasi, density, 1.0);
    for (std::size_t k = 0; k < dec.matrix.dim(); ++k)
        g.expect(std::abs(dec.matrix.at(k, k) - cdouble(1.0, 0.0)) < 1e-14,
                 "diagonal differs from 1");
    g.expect(dec.max_offdiagonal < 1e-2,
             "quasi-classical off-diagonal " + format_double(dec.max_offdiagonal) +
                 " >= 1e-2");

    // monotonicity in the eta spread (pure Gaussian pointer)
    PointerModel plain{1.0, 0.0, 0.0};
    double prev = 2.0;
    for (double spread : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        ParamDensity d2;
        d2.eta = {Marginal::uniform(0.0, spread), Marginal::uniform(0.0, spread)};
        const auto m = decoherence_matrix(plain, d2, 1.0);
        g.expect(m.max_offdiagonal <= prev + 1e-12,
                 "off-diagonal grew with eta spread " + format_double(spread));
        prev = m.max_offdiagonal;
    }

    return "closed form vs quadrature max " + format_double(worst) +
           "; quasi-classical max off-diagonal " + format_double(dec.max_offdiagonal);
}

// --- criterion 11 ----------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string check_determinism() {
    Gate g;
    namespace fs = std::filesystem;
    auto config = canonical_stern_gerlach_half();
    config.ensemble.count = 500; // determinism does not depend on N

    const fs::path base = fs::temp_directory_path() / "qmeas_determinism";
    fs::remove_all(base);
    const fs::path dir1 = base / "run1", dir2 = base / "run2";
    write_result_files(run_experiment(config), dir1);
    write_result_files(run_experiment(config), dir2);

    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir1)) {
        const auto name = entry.path().filename();
        g.expect(fs::exists(dir2 / name), "missing second copy of " + name.string());
        g.expect(slurp(entry.path()) == slurp(dir2 / name),
                 "byte difference in " + name.string());
        ++files;
    }
    g.expect(files > 0, "no output files produced");
    fs::remove_all(base);
    return std::to_string(files) + " result files byte-identical across two seeded runs";
}

} // namespace

const std::vector<Check>& all_checks() {
    static const std::vector<Check> checks = {
        {"operator_identities", 1, [] { return timed("operator_identities", check_operator_identities); }},
        {"bch_scaling", 2, [] { return timed("bch_scaling", check_bch_scaling); }},
        {"impulse_invariance", 3, [] { return timed("impulse_invariance", check_impulse_invariance); }},
        {"kick", 4, [] { return timed("kick", check_kick); }},
        {"extended_impulsive", 5, [] { return timed("extended_impulsive", check_extended_impulsive); }},
        {"epr_tables", 6, [] { return timed("epr_tables", check_epr_tables); }},
        {"two_slit_visibility", 7, [] { return timed("two_slit_visibility", check_two_slit); }},
        {"equivariance", 8, [] { return timed("equivariance", check_equivariance); }},
        {"stern_gerlach", 9, [] { return timed("stern_gerlach", check_stern_gerlach); }},
        {"decoherence_matrix", 10, [] { return timed("decoherence_matrix", check_decoherence_matrix); }},
        {"determinism", 11, [] { return timed("determinism", check_determinism); }},
    };
    return checks;
}

CheckResult run_check(const std::string& name) {
    for (const auto& c : all_checks())
        if (c.name == name) return c.fn();
    throw std::invalid_argument("unknown check: " + name);
}

} // namespace qmeas
