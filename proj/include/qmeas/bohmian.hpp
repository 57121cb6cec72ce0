#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qmeas/grid_field.hpp"

namespace qmeas {

class BohmianError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> positions;
    std::optional<int> outcome;
    bool flagged = false;

    std::vector<double> position_at(double t) const; // linear interpolation
};

struct EnsembleSpec {
    std::size_t count = 1;
    std::uint64_t seed = 0;
    double node_epsilon = 1e-8; // relative to peak guiding density
};

// Velocity/density tables of one field snapshot. Scalar fields use
// v = Im(grad psi / psi); spinor fields the total current
// sum_s Im(psi_s* grad psi_s) / sum_s |psi_s|^2, which transports the
// physical density without inter-component beats. Lookup interpolates
// linearly and reports node proximity through the return flag.
class FlowSnapshot {
  public:
    FlowSnapshot() = default;
    explicit FlowSnapshot(const WaveField& f);
    // from precomputed tables (the streaming integrator path)
    FlowSnapshot(GridSpec grid, double t, std::vector<double> dens,
                 std::vector<std::vector<double>> v);

    double time = 0.0;

    // false when the local density is below eps * peak (trajectory near a
    // wavefunction node)
    bool velocity(const std::vector<double>& x, double node_epsilon,
                  std::vector<double>& v_out) const;
    double density(const std::vector<double>& x) const;
    double peak_density() const { return max_dens_; }

  private:
    GridSpec grid_;
    std::vector<double> dens_;
    std::vector<std::vector<double>> v_;
    double max_dens_ = 0.0;
};

// v = Im(grad psi / psi) at one point (spectral gradient + linear
// interpolation); spinor fields follow the FlowSnapshot current rule.
// Throws BohmianError on node proximity.
std::vector<double> velocity_at(const WaveField& f, const std::vector<double>& x,
                                double node_epsilon = 1e-8);

// N i.i.d. positions with density |psi|^2: inverse CDF in 1-D, rejection in
// 2-D. Deterministic given spec.seed.
std::vector<std::vector<double>> sample_quantum_equilibrium(const WaveField& f,
                                                            const EnsembleSpec& spec);

// Wave history: free evolution between instantaneous events. Bases must be
// inserted in time order; field_at free-propagates from the latest base at or
// before t.
class FieldHistory {
  public:
    void add_base(double t, WaveField f);
    // left_limit selects the pre-event field at an exact event time
    WaveField field_at(double t, bool left_limit = false) const;
    bool is_base_time(double t) const;
    const std::vector<double>& base_times() const { return times_; }

  private:
    std::vector<double> times_;
    std::vector<WaveField> bases_;
};

struct EnsembleOptions {
    double dt_max = 0.05;
    std::vector<double> observe_times; // snapped onto step boundaries
    std::size_t record_paths_for = 0;  // full paths kept for this many trajectories
    std::size_t threads = 1;
};

struct EnsembleResult {
    // positions[obs][trajectory] for each observation time
    std::vector<double> observed_times;
    std::vector<std::vector<std::vector<double>>> positions;
    std::vector<bool> flagged;
    std::size_t flagged_count = 0;
    std::vector<Trajectory> recorded_paths;
    double dt_used = 0.0;
};

// RK4 transport of the whole ensemble through the history, with step halving
// near nodes (10 levels, then the trajectory is flagged and frozen).
EnsembleResult integrate_ensemble(const FieldHistory& history,
                                  const std::vector<std::vector<double>>& x0,
                                  double t0, double t_end, double node_epsilon,
                                  const EnsembleOptions& options);

Trajectory integrate_trajectory(const FieldHistory& history,
                                const std::vector<double>& x0, double dt,
                                double t0, double t_end,
                                double node_epsilon = 1e-8);

// Kolmogorov-Smirnov distance between the empirical CDF of `positions` and
// the grid CDF of |psi|^2 (1-D fields).
double equivariance_distance(const WaveField& f,
                             const std::vector<std::vector<double>>& positions);

// asymptotic 1% critical value 1.63 / sqrt(N)
double ks_critical_1pct(std::size_t n);

std::optional<int> detector_assignment(const Trajectory& t, const Region& regions,
                                       double t_loc);

} // namespace qmeas
