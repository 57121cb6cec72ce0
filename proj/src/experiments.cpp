#include "qmeas/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qmeas/operator_algebra.hpp"
#include "qmeas/rng.hpp"

namespace qmeas {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

void require(bool cond, const std::string& msg) {
    if (!cond) throw ExperimentError(msg);
}

double sum_weight_sq(const std::vector<std::pair<PacketParams, std::size_t>>& packets) {
    double s = 0.0;
    for (const auto& [p, spin] : packets) s += std::norm(p.weight);
    return s;
}

} // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
    case Scenario::SternGerlach: return "stern_gerlach";
    case Scenario::TwoSlit: return "two_slit";
    case Scenario::Epr: return "epr";
    case Scenario::PointLocalisation: return "point_localisation";
    }
    return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "stern_gerlach") return Scenario::SternGerlach;
    if (name == "two_slit") return Scenario::TwoSlit;
    if (name == "epr") return Scenario::Epr;
    if (name == "point_localisation") return Scenario::PointLocalisation;
    throw ExperimentError("unknown scenario: " + name);
}

Region RegionLayout::build(const GridSpec& grid) const {
    return Region(grid, labels, lo, hi);
}

std::vector<double> deflection_weights(std::size_t spin_dim) {
    std::vector<double> w(spin_dim, 0.0);
    if (spin_dim == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t s = 0; s < spin_dim; ++s)
        w[s] = 1.0 - 2.0 * static_cast<double>(s) / static_cast<double>(spin_dim - 1);
    return w;
}

void ExperimentConfig::validate() const {
    if (scenario != Scenario::Epr) {
        grid.validate();
        require(!packets.empty(), "config: no packets");
        const double wsq = sum_weight_sq(packets);
        require(std::abs(wsq - 1.0) < 1e-9,
                "config: packet weights must satisfy sum |c|^2 = 1 (got " +
                    std::to_string(wsq) + ")");
        for (const auto& [p, spin] : packets)
            require(spin < spin_dim, "config: packet spin index out of range");
    }
    require(times.t_def >= 0.0 && times.t_loc >= times.t_def && times.tau >= 0.0,
            "config: stage times must be ordered 0 <= t_def <= t_loc, tau >= 0");
    require(times.t_end >= times.t_loc, "config: t_end must not precede t_loc");
    if (scenario == Scenario::SternGerlach || scenario == Scenario::TwoSlit) {
        require(!regions.labels.empty(), "config: scenario needs detector regions");
        require(density.eta.size() == regions.labels.size(),
                "config: eta marginal count must match region count");
        regions.build(grid); // throws on overlap/misalignment
    }
    if (scenario == Scenario::SternGerlach)
        require(ensemble.count >= 1, "config: ensemble count must be >= 1");
    if (scenario == Scenario::PointLocalisation) {
        require(regions.labels.size() == 1, "config: point localisation needs one region");
        require(split_dt > 0.0 && split_dt * std::abs(impulse_eta) < 0.1,
                "config: split_dt * |eta| must stay below 0.1");
        require(ensemble.count >= 1, "config: ensemble count must be >= 1");
    }
}

double fringe_visibility(const GridSpec& grid, const std::vector<double>& density,
                         double window_halfwidth) {
    require(grid.dims() == 1, "fringe_visibility: 1-D grids only");
    const auto& ax = grid.axes[0];
    double lo = 1e300, hi = -1e300;
    for (std::size_t j = 0; j < ax.points; ++j) {
        const double x = ax.coordinate(j);
        if (std::abs(x) > window_halfwidth) continue;
        lo = std::min(lo, density[j]);
        hi = std::max(hi, density[j]);
    }
    if (hi <= 0.0 || lo > hi) return 0.0;
    return (hi - lo) / (hi + lo);
}

namespace {

// local fringe wavenumber at the window centre for two free Gaussian branches
double fringe_wavenumber_estimate(const PacketParams& a, const PacketParams& b,
                                  double t) {
    const double sigma = a.sigma;
    const double beta = t / (4.0 * sigma * sigma * sigma * sigma + t * t);
    const double dp = a.momentum[0] - b.momentum[0];
    const double dx0 = a.center[0] - b.center[0];
    return std::abs(dp - beta * (dx0 + dp * t));
}

DetectorStats assign_outcomes(const std::vector<std::vector<double>>& positions,
                              const std::vector<bool>& flagged, const Region& regions,
                              const std::vector<double>& expected) {
    DetectorStats st;
    for (const auto& box : regions.boxes()) st.labels.push_back(box.label);
    st.counts.assign(st.labels.size(), 0);
    st.expected = expected;

    std::size_t unflagged = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (flagged[i]) {
            ++st.flagged;
            continue;
        }
        ++unflagged;
        const auto label = regions.label_at(positions[i]);
        if (!label) {
            ++st.ex_count;
            continue;
        }
        for (std::size_t b = 0; b < st.labels.size(); ++b)
            if (st.labels[b] == *label) {
                ++st.counts[b];
                break;
            }
    }
    st.frequencies.assign(st.labels.size(), 0.0);
    if (unflagged > 0)
        for (std::size_t b = 0; b < st.labels.size(); ++b)
            st.frequencies[b] =
                static_cast<double>(st.counts[b]) / static_cast<double>(unflagged);
    return st;
}

} // namespace

ExperimentResult run_stern_gerlach(const ExperimentConfig& config) {
    config.validate();
    require(config.scenario == Scenario::SternGerlach, "config: wrong scenario");

    ExperimentResult result;
    result.scenario = scenario_name(config.scenario);
    result.config_name = config.name;
    result.seed = config.ensemble.seed;
    SternGerlachReport rep;

    const Region regions = config.regions.build(config.grid);
    const WaveField psi0 = synthesize_packets(config.grid, config.spin_dim, config.packets);

    FieldHistory history;
    history.add_base(0.0, psi0);

    // deflection imprint at t_def
    const auto weights = deflection_weights(config.spin_dim);
    std::vector<double> alphas(config.spin_dim), dps(config.spin_dim);
    for (std::size_t s = 0; s < config.spin_dim; ++s) {
        alphas[s] = weights[s] * config.deflection.alpha;
        dps[s] = weights[s] * config.deflection.delta_p;
    }
    const WaveField at_def = history.field_at(config.times.t_def, /*left_limit=*/true);
    const WaveField deflected = apply_sg_deflection(at_def, alphas, dps, config.deflection.axis);
    if (config.times.t_def > 0.0) {
        history.add_base(config.times.t_def, deflected);
    } else {
        history = FieldHistory{};
        history.add_base(0.0, deflected);
    }

    // localisation stage
    const WaveField at_loc = history.field_at(config.times.t_loc, /*left_limit=*/true);
    rep.coincidence = coincidence_report(at_loc, regions);
    require(rep.coincidence.pass, "stern_gerlach: coincidence condition failed at t_loc");

    // branch disjointness at the detectors
    for (std::size_t s1 = 0; s1 < config.spin_dim; ++s1)
        for (std::size_t s2 = s1 + 1; s2 < config.spin_dim; ++s2) {
            const auto ov = overlap_integral(extract_component(at_loc, s1),
                                             extract_component(at_loc, s2));
            rep.max_branch_overlap = std::max(rep.max_branch_overlap, ov.density_overlap);
        }
    require(rep.max_branch_overlap < 1e-6,
            "stern_gerlach: branch overlap at detectors above 1e-6");

    rep.drawn_etas = sample_params(config.density, config.ensemble.seed);

    // extended impulsive step (strong-coincidence gated); the history carries
    // the identical evolution for the trajectory ensemble
    const WaveField after_window = extended_impulsive_evolve(
        at_loc, regions, rep.drawn_etas.etas, config.times.tau);
    const WaveField imprinted =
        apply_piecewise_impulse(at_loc, regions, rep.drawn_etas.etas, config.times.tau);
    history.add_base(config.times.t_loc, imprinted);

    const double t_final = std::max(config.times.t_end, after_window.time);
    result.final_field = free_propagate(after_window, t_final - after_window.time);

    const auto k_before = kinetic_stats(at_loc);
    const auto k_after = kinetic_stats(imprinted);
    rep.kinetic_spread = k_before.spread;
    rep.kinetic_shift_rate = config.times.tau > 0.0
                                 ? std::abs(k_after.mean - k_before.mean) / config.times.tau
                                 : 0.0;

    // trajectory ensemble
    const auto x0 = sample_quantum_equilibrium(psi0, config.ensemble);
    EnsembleOptions opt;
    opt.dt_max = config.trajectory_dt_max;
    opt.observe_times = {config.times.t_loc};
    opt.record_paths_for = std::min<std::size_t>(32, config.ensemble.count);
    opt.threads = config.threads;
    const double t_end = std::max(config.times.t_end, config.times.t_loc);
    auto ens = integrate_ensemble(history, x0, 0.0, t_end, config.ensemble.node_epsilon, opt);

    std::vector<double> expected;
    for (std::size_t b = 0; b < regions.size(); ++b)
        expected.push_back(b < rep.coincidence.interior_mass.size()
                               ? rep.coincidence.interior_mass[b]
                               : 0.0);

    // positions at t_loc
    std::size_t obs_idx = 0;
    for (std::size_t i = 0; i < ens.observed_times.size(); ++i)
        if (std::abs(ens.observed_times[i] - config.times.t_loc) < 1e-9) obs_idx = i;
    rep.detectors = assign_outcomes(ens.positions[obs_idx], ens.flagged, regions, expected);

    const WaveField final_field = history.field_at(t_end);
    rep.equivariance_ks = equivariance_distance(final_field, ens.positions.back());
    rep.ks_critical = ks_critical_1pct(config.ensemble.count);

    for (auto& path : ens.recorded_paths)
        if (!path.flagged) path.outcome = detector_assignment(path, regions, config.times.t_loc);
    result.sample_paths = std::move(ens.recorded_paths);
    result.pointer_decoherence =
        decoherence_matrix(config.pointer, config.density, config.times.tau);
    result.stern_gerlach = std::move(rep);
    return result;
}

ExperimentResult run_two_slit(const ExperimentConfig& config) {
    config.validate();
    require(config.scenario == Scenario::TwoSlit, "config: wrong scenario");
    require(config.packets.size() == 2 && config.spin_dim == 1,
            "two_slit: expects two scalar packets");

    ExperimentResult result;
    result.scenario = scenario_name(config.scenario);
    result.config_name = config.name;
    result.seed = config.ensemble.seed;
    TwoSlitReport rep;

    const Region regions = config.regions.build(config.grid);
    const WaveField psi0 = synthesize_packets(config.grid, 1, config.packets);

    // normalized branch fields
    std::vector<WaveField> branches0;
    std::vector<cdouble> coeffs;
    for (const auto& [p, spin] : config.packets) {
        PacketParams unit = p;
        unit.weight = 1.0;
        branches0.push_back(synthesize_packets(config.grid, 1, {{unit, 0}}));
        coeffs.push_back(p.weight);
    }

    const double t_loc = config.times.t_loc;
    const WaveField b1_loc = free_propagate(branches0[0], t_loc);
    const WaveField b2_loc = free_propagate(branches0[1], t_loc);
    rep.branch_overlap_at_localisation = overlap_integral(b1_loc, b2_loc).density_overlap;
    require(rep.branch_overlap_at_localisation < 1e-6,
            "two_slit: branches overlap at localisation (experiment not discerning)");

    const WaveField at_loc = free_propagate(psi0, t_loc);
    rep.coincidence = coincidence_report(at_loc, regions);

    rep.drawn_etas = sample_params(config.density, config.ensemble.seed);
    const WaveField after_window = extended_impulsive_evolve(
        at_loc, regions, rep.drawn_etas.etas, config.times.tau);

    FieldHistory history;
    history.add_base(0.0, psi0);
    history.add_base(t_loc, apply_piecewise_impulse(at_loc, regions, rep.drawn_etas.etas,
                                                    config.times.tau));

    const double t_end = config.times.t_end;
    const WaveField screen = free_propagate(after_window, t_end - after_window.time);
    result.final_field = screen;
    rep.screen_coherent = total_density(screen);

    const WaveField b1_end = free_propagate(branches0[0], t_end);
    const WaveField b2_end = free_propagate(branches0[1], t_end);

    rep.screen_incoherent.assign(config.grid.num_points(), 0.0);
    const auto d1 = total_density(b1_end);
    const auto d2 = total_density(b2_end);
    for (std::size_t j = 0; j < d1.size(); ++j)
        rep.screen_incoherent[j] = std::norm(coeffs[0]) * d1[j] + std::norm(coeffs[1]) * d2[j];

    const auto phase_matrix = phase_average_matrix(config.density, config.times.tau);
    rep.phase_average = phase_matrix.matrix.at(0, 1);
    std::vector<Branch> branch_list;
    branch_list.push_back({0, coeffs[0], b1_end});
    branch_list.push_back({1, coeffs[1], b2_end});
    rep.screen_averaged = averaged_density(branch_list, phase_matrix.matrix);

    rep.screen_control = total_density(free_propagate(psi0, t_end));

    rep.fringe_wavenumber = fringe_wavenumber_estimate(config.packets[0].first,
                                                       config.packets[1].first, t_end);
    rep.window_halfwidth = config.screen_window_half > 0.0
                               ? config.screen_window_half
                               : 1.5 * kTwoPi / std::max(rep.fringe_wavenumber, 1e-9);

    rep.visibility_coherent =
        fringe_visibility(config.grid, rep.screen_coherent, rep.window_halfwidth);
    rep.visibility_averaged =
        fringe_visibility(config.grid, rep.screen_averaged, rep.window_halfwidth);
    rep.visibility_control =
        fringe_visibility(config.grid, rep.screen_control, rep.window_halfwidth);

    for (std::size_t j = 0; j < d1.size(); ++j)
        rep.max_pointwise_diff = std::max(
            rep.max_pointwise_diff,
            std::abs(rep.screen_averaged[j] - rep.screen_incoherent[j]));

    if (config.ensemble.count > 0) {
        const auto x0 = sample_quantum_equilibrium(psi0, config.ensemble);
        EnsembleOptions opt;
        opt.dt_max = config.trajectory_dt_max;
        opt.record_paths_for = std::min<std::size_t>(32, config.ensemble.count);
        opt.threads = config.threads;
        auto ens = integrate_ensemble(history, x0, 0.0, t_end,
                                      config.ensemble.node_epsilon, opt);
        result.sample_paths = std::move(ens.recorded_paths);
    }

    result.two_slit = std::move(rep);
    return result;
}

namespace {

struct EprMachine {
    ProjectorPartition z_partition;
    ProjectorPartition x_partition;
    std::vector<std::vector<cdouble>> z_states; // |+z>, |-z>
    std::vector<std::vector<cdouble>> x_states; // |+x>, |-x>
    std::vector<cdouble> singlet;               // 4-vector, z (x) z basis

    EprMachine()
        : z_partition({make_projector({{cdouble(1, 0), cdouble(0, 0)}}),
                       make_projector({{cdouble(0, 0), cdouble(1, 0)}})}),
          x_partition({make_projector({{cdouble(M_SQRT1_2, 0), cdouble(M_SQRT1_2, 0)}}),
                       make_projector({{cdouble(M_SQRT1_2, 0), cdouble(-M_SQRT1_2, 0)}})}),
          z_states{{cdouble(1, 0), cdouble(0, 0)}, {cdouble(0, 0), cdouble(1, 0)}},
          x_states{{cdouble(M_SQRT1_2, 0), cdouble(M_SQRT1_2, 0)},
                   {cdouble(M_SQRT1_2, 0), cdouble(-M_SQRT1_2, 0)}},
          singlet{cdouble(0, 0), cdouble(M_SQRT1_2, 0), cdouble(-M_SQRT1_2, 0),
                  cdouble(0, 0)} {}

    // U of the deflection window: phase e^{i alpha} on the P_{+z} (x) I block
    Operator interaction(double alpha) const {
        return two_factor_exp(z_partition, x_partition, {{alpha, alpha}, {0.0, 0.0}});
    }

    // amplitude <s1_z, s2_x | U(alpha) | singlet>
    cdouble amplitude(const Operator& u, std::size_t s1, std::size_t s2) const {
        std::vector<cdouble> bra(4);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                bra[2 * i + j] = z_states[s1][i] * x_states[s2][j];
        cdouble a{};
        for (std::size_t r = 0; r < 4; ++r) {
            cdouble row{};
            for (std::size_t c = 0; c < 4; ++c) row += u.at(r, c) * singlet[c];
            a += std::conj(bra[r]) * row;
        }
        return a;
    }

    EprRow row(double alpha) const {
        const Operator u = interaction(alpha);
        EprRow r;
        r.alpha = alpha;
        std::array<cdouble, 4> amp{};
        for (std::size_t s1 = 0; s1 < 2; ++s1)
            for (std::size_t s2 = 0; s2 < 2; ++s2) amp[2 * s1 + s2] = amplitude(u, s1, s2);

        r.coherent_plus = std::norm(amp[0] + amp[2]);
        r.coherent_minus = std::norm(amp[1] + amp[3]);
        r.formula_plus = 0.5 * (1.0 - std::cos(alpha));
        r.formula_minus = 0.5 * (1.0 + std::cos(alpha));
        r.incoherent_plus = std::norm(amp[0]) + std::norm(amp[2]);
        r.incoherent_minus = std::norm(amp[1]) + std::norm(amp[3]);
        for (std::size_t i = 0; i < 4; ++i) r.joint[i] = std::norm(amp[i]);

        const double pa0 = r.joint[0] + r.joint[1];
        const double pa1 = r.joint[2] + r.joint[3];
        const double pb0 = r.joint[0] + r.joint[2];
        const double pb1 = r.joint[1] + r.joint[3];
        r.bnl = std::max(std::max(std::abs(r.joint[0] - pa0 * pb0),
                                  std::abs(r.joint[1] - pa0 * pb1)),
                         std::max(std::abs(r.joint[2] - pa1 * pb0),
                                  std::abs(r.joint[3] - pa1 * pb1)));
        return r;
    }
};

} // namespace

ExperimentResult run_epr(const ExperimentConfig& config) {
    require(config.scenario == Scenario::Epr, "config: wrong scenario");

    ExperimentResult result;
    result.scenario = scenario_name(config.scenario);
    result.config_name = config.name;
    result.seed = config.ensemble.seed;
    EprReport rep;

    const EprMachine machine;
    rep.before = machine.row(0.0);

    std::vector<double> alphas = config.epr_alphas;
    if (alphas.empty()) {
        Rng rng = substream(config.ensemble.seed, "epr-alpha");
        for (int i = 0; i < 20; ++i) alphas.push_back(rng.uniform(0.0, kTwoPi));
    }
    for (double a : alphas) {
        rep.rows.push_back(machine.row(a));
        const auto& r = rep.rows.back();
        rep.max_coherent_vs_formula =
            std::max({rep.max_coherent_vs_formula,
                      std::abs(r.coherent_plus - r.formula_plus),
                      std::abs(r.coherent_minus - r.formula_minus)});
    }

    // overbar average of the coherent-summed marginals over the alpha density
    ParamDensity alpha_density;
    alpha_density.eta = {config.epr_alpha_density};
    const auto avg_plus = overbar_average(
        [&](const StochasticParams& p) {
            return cdouble(machine.row(p.etas[0]).coherent_plus, 0.0);
        },
        alpha_density);
    const auto avg_minus = overbar_average(
        [&](const StochasticParams& p) {
            return cdouble(machine.row(p.etas[0]).coherent_minus, 0.0);
        },
        alpha_density);
    rep.averaged_plus = avg_plus.value.real();
    rep.averaged_minus = avg_minus.value.real();
    rep.averaged_marginals_half = std::abs(rep.averaged_plus - 0.5) < 1e-10 &&
                                  std::abs(rep.averaged_minus - 0.5) < 1e-10;

    rep.coherent_table_changed = false;
    for (const auto& r : rep.rows) {
        if (std::abs(r.coherent_plus - rep.before.coherent_plus) > 1e-9 ||
            std::abs(r.coherent_minus - rep.before.coherent_minus) > 1e-9)
            rep.coherent_table_changed = true;
    }

    result.epr = std::move(rep);
    return result;
}

ExperimentResult run_point_localisation(const ExperimentConfig& config) {
    config.validate();
    require(config.scenario == Scenario::PointLocalisation, "config: wrong scenario");

    ExperimentResult result;
    result.scenario = scenario_name(config.scenario);
    result.config_name = config.name;
    result.seed = config.ensemble.seed;
    PointLocalisationReport rep;

    const Region region = config.regions.build(config.grid);
    const WaveField psi0 = synthesize_packets(config.grid, config.spin_dim, config.packets);
    const double t_loc = config.times.t_loc;
    const double tau = config.times.tau;
    const std::vector<double> etas{config.impulse_eta};

    const WaveField at_loc = free_propagate(psi0, t_loc);

    // instantaneous-limit invariance: the pure imprint must not move density
    {
        const WaveField imprinted = apply_piecewise_impulse(at_loc, region, etas, tau);
        const auto before = total_density(at_loc);
        const auto after = total_density(imprinted);
        for (std::size_t j = 0; j < before.size(); ++j)
            rep.impulse_density_change =
                std::max(rep.impulse_density_change, std::abs(after[j] - before[j]));
    }

    // full dynamics through the window, recorded into the history
    FieldHistory history;
    history.add_base(0.0, psi0);
    auto record_p = [&](const WaveField& f) {
        rep.p_history_t.push_back(f.time);
        rep.p_history.push_back(momentum_expectation(f)[0]);
    };
    record_p(psi0);
    record_p(at_loc);
    rep.p_before = rep.p_history.back();

    const auto n_steps =
        static_cast<std::size_t>(std::max(1.0, std::ceil(tau / config.split_dt)));
    const double dt = tau / static_cast<double>(n_steps);
    WaveField inside = at_loc;
    for (std::size_t k = 0; k < n_steps; ++k) {
        inside = split_step_evolve(inside, region, etas, dt, 1);
        history.add_base(inside.time, inside);
        record_p(inside);
    }
    rep.p_after = rep.p_history.back();

    const double t_end = std::max(config.times.t_end, t_loc + tau);
    if (t_end > inside.time) record_p(free_propagate(inside, t_end - inside.time));
    result.final_field = history.field_at(t_end);

    // ensemble bounce statistics
    const auto x0 = sample_quantum_equilibrium(psi0, config.ensemble);
    EnsembleOptions opt;
    opt.dt_max = config.trajectory_dt_max;
    opt.observe_times = {t_loc};
    opt.record_paths_for = std::min<std::size_t>(32, config.ensemble.count);
    opt.threads = config.threads;
    auto ens = integrate_ensemble(history, x0, 0.0, t_end, config.ensemble.node_epsilon, opt);
    rep.flagged = ens.flagged_count;

    std::size_t loc_idx = 0;
    for (std::size_t i = 0; i < ens.observed_times.size(); ++i)
        if (std::abs(ens.observed_times[i] - t_loc) < 1e-9) loc_idx = i;

    auto mean_axis0 = [&](const std::vector<std::vector<double>>& pos) {
        double m = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (ens.flagged[i]) continue;
            m += pos[i][0];
            ++n;
        }
        return n ? m / static_cast<double>(n) : 0.0;
    };
    const double mean0 = mean_axis0(x0);
    const double mean_loc = mean_axis0(ens.positions[loc_idx]);
    const double mean_end = mean_axis0(ens.positions.back());
    rep.ensemble_velocity_before = t_loc > 0.0 ? (mean_loc - mean0) / t_loc : 0.0;
    const double after_span = t_end - t_loc;
    rep.ensemble_velocity_after =
        after_span > 0.0 ? (mean_end - mean_loc) / after_span : 0.0;

    for (auto& path : ens.recorded_paths)
        if (!path.flagged) path.outcome = detector_assignment(path, region, t_end);
    result.sample_paths = std::move(ens.recorded_paths);
    result.point_localisation = std::move(rep);
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    switch (config.scenario) {
    case Scenario::SternGerlach: return run_stern_gerlach(config);
    case Scenario::TwoSlit: return run_two_slit(config);
    case Scenario::Epr: return run_epr(config);
    case Scenario::PointLocalisation: return run_point_localisation(config);
    }
    throw ExperimentError("run_experiment: unknown scenario");
}

// ---------------------------------------------------------------------------
// canonical configurations

ExperimentConfig canonical_stern_gerlach_half() {
    ExperimentConfig c;
    c.name = "stern_gerlach_half";
    c.scenario = Scenario::SternGerlach;
    c.grid = GridSpec::line(2048, 60.0);
    c.spin_dim = 2;

    PacketParams base;
    base.momentum = {0.0};
    base.center = {0.0};
    base.sigma = 0.8;
    PacketParams up = base, down = base;
    up.weight = cdouble(M_SQRT1_2, 0.0);
    down.weight = cdouble(M_SQRT1_2, 0.0);
    c.packets = {{up, 0}, {down, 1}};

    c.deflection.alpha = 0.3;
    c.deflection.delta_p = 9.0;

    // branches reach +-9 at t_loc; box edges 8.4 away (> 7.5 spread widths)
    c.regions.labels = {1, -1};
    c.regions.lo = {{0.6}, {-17.4}};
    c.regions.hi = {{17.4}, {-0.6}};

    c.pointer.width = 1.0;
    c.pointer.carrier = 25.0;
    c.pointer.neutral_offset = 100.0;
    c.density.eta = {Marginal::uniform(0.0, 62.8), Marginal::uniform(0.0, 62.8)};
    c.density.y = Marginal::uniform(0.0, 1.0);

    c.ensemble.count = 10000;
    c.ensemble.seed = 20001;
    c.times.t_def = 0.2;
    c.times.t_loc = 1.2;
    c.times.tau = 0.1;
    c.times.t_end = 1.3;
    c.trajectory_dt_max = 0.02;
    return c;
}

ExperimentConfig canonical_stern_gerlach_spin1() {
    ExperimentConfig c = canonical_stern_gerlach_half();
    c.name = "stern_gerlach_spin1";
    c.grid = GridSpec::line(4096, 80.0);
    c.spin_dim = 3;

    PacketParams base;
    base.momentum = {0.0};
    base.center = {0.0};
    base.sigma = 0.8;
    PacketParams top = base, mid = base, bot = base;
    top.weight = cdouble(0.5, 0.0);
    mid.weight = cdouble(M_SQRT1_2, 0.0);
    bot.weight = cdouble(0.5, 0.0);
    c.packets = {{top, 0}, {mid, 1}, {bot, 2}};

    c.deflection.delta_p = 18.0;
    c.regions.labels = {1, 0, -1};
    c.regions.lo = {{9.6}, {-8.4}, {-26.4}};
    c.regions.hi = {{26.4}, {8.4}, {-9.6}};
    c.density.eta = {Marginal::uniform(0.0, 62.8), Marginal::uniform(0.0, 62.8),
                     Marginal::uniform(0.0, 62.8)};
    c.ensemble.seed = 20002;
    return c;
}

ExperimentConfig canonical_two_slit() {
    ExperimentConfig c;
    c.name = "two_slit";
    c.scenario = Scenario::TwoSlit;
    c.grid = GridSpec::line(4096, 80.0);
    c.spin_dim = 1;

    PacketParams left, right;
    left.weight = cdouble(M_SQRT1_2, 0.0);
    left.center = {-15.0};
    left.momentum = {15.0};
    left.sigma = 1.0;
    right.weight = cdouble(M_SQRT1_2, 0.0);
    right.center = {15.0};
    right.momentum = {-15.0};
    right.sigma = 1.0;
    c.packets = {{left, 0}, {right, 0}};

    // boxes around the branch positions at t_loc = 0.1 (centers -+13.5)
    c.regions.labels = {1, 2};
    c.regions.lo = {{-21.3}, {5.7}};
    c.regions.hi = {{-5.7}, {21.3}};

    // full-period spread: eta uniform on [0, 2 pi / tau], tau = 0.1
    c.density.eta = {Marginal::uniform(0.0, 62.83185307179586),
                     Marginal::uniform(0.0, 62.83185307179586)};
    c.density.y = Marginal::uniform(0.0, 1.0);

    c.ensemble.count = 0; // density-level scenario
    c.ensemble.seed = 20003;
    c.times.t_loc = 0.1;
    c.times.tau = 0.1;
    c.times.t_end = 1.0;
    return c;
}

ExperimentConfig canonical_epr() {
    ExperimentConfig c;
    c.name = "epr";
    c.scenario = Scenario::Epr;
    c.spin_dim = 2;
    c.ensemble.seed = 20004;
    c.epr_alpha_density = Marginal::uniform(0.0, kTwoPi);
    return c;
}

ExperimentConfig canonical_point_localisation() {
    ExperimentConfig c;
    c.name = "point_localisation";
    c.scenario = Scenario::PointLocalisation;
    c.grid = GridSpec::line(4096, 60.0);
    c.spin_dim = 1;

    PacketParams p;
    p.weight = cdouble(1.0, 0.0);
    p.center = {-8.0};
    p.momentum = {4.0};
    p.sigma = 1.0;
    c.packets = {{p, 0}};

    c.regions.labels = {1};
    c.regions.lo = {{-2.0}};
    c.regions.hi = {{6.0}};

    c.impulse_eta = 3.0;
    c.split_dt = 0.02;
    c.ensemble.count = 2000;
    c.ensemble.seed = 20005;
    c.times.t_loc = 1.5;
    c.times.tau = 0.2;
    c.times.t_end = 2.2;
    c.trajectory_dt_max = 0.01;
    return c;
}

} // namespace qmeas
