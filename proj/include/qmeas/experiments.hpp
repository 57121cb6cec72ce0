#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmeas/bohmian.hpp"
#include "qmeas/grid_field.hpp"
#include "qmeas/stochastic.hpp"

namespace qmeas {

class ExperimentError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Scenario { SternGerlach, TwoSlit, Epr, PointLocalisation };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct StageTimes {
    double t_def = 0.0; // deflection imprint
    double t_loc = 0.0; // localisation trigger
    double tau = 0.0;   // impulsive window
    double t_end = 0.0; // end of run / screen time
};

struct DeflectionParams {
    double alpha = 0.0;   // mu B_z(0), phase of the extreme component
    double delta_p = 0.0; // mu dB_z/dz, momentum kick of the extreme component
    std::size_t axis = 0;
};

struct RegionLayout {
    std::vector<int> labels;
    std::vector<std::vector<double>> lo;
    std::vector<std::vector<double>> hi;

    Region build(const GridSpec& grid) const;
};

struct ExperimentConfig {
    std::string name;
    Scenario scenario = Scenario::SternGerlach;
    GridSpec grid;
    std::size_t spin_dim = 1;
    std::vector<std::pair<PacketParams, std::size_t>> packets;
    RegionLayout regions;
    DeflectionParams deflection;
    PointerModel pointer;
    ParamDensity density;
    EnsembleSpec ensemble;
    StageTimes times;
    double trajectory_dt_max = 0.05;
    std::size_t threads = 1;

    // point localisation
    double impulse_eta = 0.0;
    double split_dt = 0.01;

    // EPR
    std::vector<double> epr_alphas; // empty -> 20 seeded draws from the density
    Marginal epr_alpha_density = Marginal::uniform(0.0, 6.283185307179586);

    // two-slit screen window halfwidth; 0 = 1.5 fringe periods (auto)
    double screen_window_half = 0.0;

    void validate() const;
};

// Per-component deflection weights: +1 for the top component, -1 for the
// bottom, linear in between (m/s for spin s).
std::vector<double> deflection_weights(std::size_t spin_dim);

struct DetectorStats {
    std::vector<int> labels;
    std::vector<std::size_t> counts;
    std::size_t ex_count = 0;
    std::size_t flagged = 0;
    std::vector<double> frequencies; // among unflagged trajectories
    std::vector<double> expected;    // |c_m|^2 branch weights
};

struct SternGerlachReport {
    DetectorStats detectors;
    CoincidenceResult coincidence;
    double max_branch_overlap = 0.0; // pairwise density overlap at t_loc
    double equivariance_ks = 0.0;
    double ks_critical = 0.0;
    StochasticParams drawn_etas;
    double kinetic_spread = 0.0;     // Delta K at localisation
    double kinetic_shift_rate = 0.0; // |d<K>|/tau across the impulse
};

struct TwoSlitReport {
    double branch_overlap_at_localisation = 0.0;
    CoincidenceResult coincidence;
    std::vector<double> screen_coherent;   // single eta draw
    std::vector<double> screen_averaged;   // overbar average
    std::vector<double> screen_incoherent; // |psi1|^2 + |psi2|^2
    std::vector<double> screen_control;    // no localisation
    double visibility_coherent = 0.0;
    double visibility_averaged = 0.0;
    double visibility_control = 0.0;
    double max_pointwise_diff = 0.0; // averaged vs incoherent
    cdouble phase_average{};         // E[e^{-i tau (eta_1 - eta_2)}]
    double window_halfwidth = 0.0;
    double fringe_wavenumber = 0.0;
    StochasticParams drawn_etas;
};

struct EprRow {
    double alpha = 0.0;
    double coherent_plus = 0.0, coherent_minus = 0.0;     // summed amplitudes, squared
    double formula_plus = 0.0, formula_minus = 0.0;       // (1 -+ cos alpha)/2
    double incoherent_plus = 0.0, incoherent_minus = 0.0; // proper marginals
    std::array<double, 4> joint{};                        // p(s1_z, s2_x)
    double bnl = 0.0; // max |p(a,b) - p(a) p(b)|
};

struct EprReport {
    EprRow before; // alpha = 0
    std::vector<EprRow> rows;
    double averaged_plus = 0.0, averaged_minus = 0.0; // quadrature over alpha
    bool averaged_marginals_half = false;
    bool coherent_table_changed = false;
    double max_coherent_vs_formula = 0.0;
};

struct PointLocalisationReport {
    double impulse_density_change = 0.0; // pure phase imprint, pointwise
    std::vector<double> p_history_t;
    std::vector<double> p_history; // <P> along the run (axis 0)
    double p_before = 0.0;
    double p_after = 0.0;
    double ensemble_velocity_before = 0.0;
    double ensemble_velocity_after = 0.0;
    std::size_t flagged = 0;
};

struct ExperimentResult {
    std::string scenario;
    std::string config_name;
    std::uint64_t seed = 0;
    std::optional<SternGerlachReport> stern_gerlach;
    std::optional<TwoSlitReport> two_slit;
    std::optional<EprReport> epr;
    std::optional<PointLocalisationReport> point_localisation;
    std::optional<DecoherenceMatrix> pointer_decoherence;
    std::vector<Trajectory> sample_paths;
    std::optional<WaveField> final_field;
};

ExperimentResult run_stern_gerlach(const ExperimentConfig& config);
ExperimentResult run_two_slit(const ExperimentConfig& config);
ExperimentResult run_epr(const ExperimentConfig& config);
ExperimentResult run_point_localisation(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

double fringe_visibility(const GridSpec& grid, const std::vector<double>& density,
                         double window_halfwidth);

// canonical configurations; the shipped JSON files mirror these
ExperimentConfig canonical_stern_gerlach_half();
ExperimentConfig canonical_stern_gerlach_spin1();
ExperimentConfig canonical_two_slit();
ExperimentConfig canonical_epr();
ExperimentConfig canonical_point_localisation();

} // namespace qmeas
