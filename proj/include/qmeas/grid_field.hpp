#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmeas {

using cdouble = std::complex<double>;

class FieldError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Periodic grid, 1 or 2 axes, natural units (hbar = m = 1). Points per axis
// must be a power of two (spectral propagation). Coordinates are centered:
// x_j = -L/2 + j h.
struct GridSpec {
    struct Axis {
        std::size_t points = 0;
        double length = 0.0;
        double spacing() const { return length / static_cast<double>(points); }
        double coordinate(std::size_t j) const {
            return -0.5 * length + spacing() * static_cast<double>(j);
        }
        bool operator==(const Axis&) const = default;
    };

    std::vector<Axis> axes;

    static GridSpec line(std::size_t points, double length);
    static GridSpec plane(std::size_t nx, double lx, std::size_t ny, double ly);

    std::size_t dims() const { return axes.size(); }
    std::size_t num_points() const;
    double cell_volume() const;
    void validate() const;

    // flat index <-> per-axis indices (axis-0 major)
    std::size_t flat(const std::vector<std::size_t>& idx) const;
    std::vector<std::size_t> unflatten(std::size_t flat_index) const;

    bool operator==(const GridSpec&) const = default;
};

// Axis-aligned detector boxes with integer labels. Edges snap to the nearest
// grid node at construction; the interior is half-open [lo, hi) in index
// space, so node ilo is inside and node ihi is outside.
class Region {
  public:
    struct Box {
        int label = 0;
        std::vector<std::size_t> lo; // node index per axis, inclusive
        std::vector<std::size_t> hi; // node index per axis, exclusive
        std::vector<double> lo_coord; // snapped edge coordinates
        std::vector<double> hi_coord;
    };

    Region(const GridSpec& grid, const std::vector<int>& labels,
           const std::vector<std::vector<double>>& lo_edges,
           const std::vector<std::vector<double>>& hi_edges);

    const GridSpec& grid() const { return grid_; }
    const std::vector<Box>& boxes() const { return boxes_; }
    std::size_t size() const { return boxes_.size(); }

    bool contains(const Box& box, const std::vector<std::size_t>& idx) const;
    // detector label at a real-space point, nullopt = "ex"
    std::optional<int> label_at(const std::vector<double>& x) const;

    // characteristic-function mask per flat grid index: box ordinal + 1, or 0
    // for the exterior.
    std::vector<std::uint32_t> interior_mask() const;

  private:
    GridSpec grid_;
    std::vector<Box> boxes_;
};

// One Gaussian packet of the synthesis family.
// `momentum` is the packet's group velocity: the synthesized phase is
// e^{+i p.x}, the convention under which <P> = p and the packet moves with
// velocity +p under free_propagate.
struct PacketParams {
    cdouble weight{1.0, 0.0};
    double phase = 0.0; // extra global phase alpha_m, radians
    std::vector<double> momentum;
    std::vector<double> center;
    double sigma = 1.0;
};

// Complex amplitudes per (grid point, spin component), component-major:
// amp[s * num_points + flat]. Immutable by convention; operations return new
// fields.
struct WaveField {
    GridSpec grid;
    std::size_t spin_dim = 1;
    std::vector<cdouble> amp;
    double time = 0.0;

    std::size_t num_points() const { return grid.num_points(); }
    const cdouble& at(std::size_t spin, std::size_t flat) const {
        return amp[spin * num_points() + flat];
    }
    cdouble& at(std::size_t spin, std::size_t flat) {
        return amp[spin * num_points() + flat];
    }
};

double field_norm(const WaveField& f); // sqrt(sum |psi|^2 dV)
// |psi|^2 summed over spin components, per grid point
std::vector<double> total_density(const WaveField& f);
// sum of components per grid point (the guiding scalar for trajectories)
std::vector<cdouble> component_sum(const WaveField& f);
// one spin component as a scalar field
WaveField extract_component(const WaveField& f, std::size_t spin);

WaveField synthesize_packets(
    const GridSpec& grid, std::size_t spin_dim,
    const std::vector<std::pair<PacketParams, std::size_t>>& packets);

WaveField free_propagate(const WaveField& f, double duration);

// Multiplies the amplitudes inside box k by e^{-i eta_k tau}; exterior
// untouched. Leaves |psi|^2 pointwise invariant.
WaveField apply_piecewise_impulse(const WaveField& f, const Region& regions,
                                  const std::vector<double>& etas, double tau);

// Spin-1/2 deflection imprint: component +/- gains e^{+-i alpha} e^{+-i x Dp}
// along `axis`.
WaveField apply_sg_deflection(const WaveField& f, double alpha, double delta_p,
                              std::size_t axis = 0);
// General per-component imprint for spin s.
WaveField apply_sg_deflection(const WaveField& f, const std::vector<double>& alphas,
                              const std::vector<double>& delta_ps, std::size_t axis = 0);

// Strang-split evolution under the piecewise-constant potential
// V = sum_k eta_k chi_k. Requires dt * max|eta| < 0.1.
WaveField split_step_evolve(const WaveField& f, const Region& regions,
                            const std::vector<double>& etas, double dt,
                            std::size_t steps);

// Extended impulsive step: phase imprint per box, then free propagation
// over the window.
// Refuses unless the strong coincidence report passes.
WaveField extended_impulsive_evolve(const WaveField& f, const Region& regions,
                                    const std::vector<double>& etas, double tau);

struct CoincidenceSettings {
    int derivative_order = 2;
    double mass_tol = 1e-6;
    double deriv_tol = 1e-6; // relative to max |psi|
};

struct CoincidenceResult {
    std::vector<double> interior_mass;
    double exterior_mass = 0.0;
    std::vector<double> max_boundary_diff; // per derivative order, h^r-scaled
    double max_amplitude = 0.0;
    bool mass_pass = false;
    bool derivative_pass = false;
    bool pass = false;
};

CoincidenceResult coincidence_report(const WaveField& f, const Region& regions,
                                     const CoincidenceSettings& s = {});

std::vector<double> momentum_expectation(const WaveField& f);

struct KickReport {
    std::vector<double> measured;  // <P>_after - <P>_before
    std::vector<double> predicted; // -tau * integral grad V |psi|^2
    double max_abs_error = 0.0;
};

// Applies psi -> e^{-i V tau} psi and compares the momentum shift with the
// quadrature of -tau grad V |psi|^2. V is sampled on the grid.
KickReport kick_check(const WaveField& f, const std::vector<double>& potential,
                      double tau);

struct OverlapResult {
    cdouble inner_product;
    double density_overlap; // integral |psi1|^2 |psi2|^2
};

OverlapResult overlap_integral(const WaveField& f1, const WaveField& f2);

struct CommutatorReport {
    double max_action = 0.0;        // max |[K,V] psi| over the grid
    double max_deviation = 0.0;     // max |[K,V]psi - rhs| (smooth branch)
    double rhs_scale = 0.0;         // max |rhs|
    double max_amplitude = 0.0;     // max |psi|
};

// Evaluates [K,V]psi with K = -laplacian/2 (spectral) and, when
// compare_rhs, checks it against -(laplacian V psi + 2 grad V . grad psi)/2
// with finite-difference potential derivatives.
CommutatorReport commutator_action_check(const WaveField& f,
                                         const std::vector<double>& potential,
                                         bool compare_rhs);

// Samples V = sum_k eta_k chi_{D_k} on the grid.
std::vector<double> sample_box_potential(const Region& regions,
                                         const std::vector<double>& etas);

struct KineticStats {
    double mean = 0.0;
    double spread = 0.0; // std dev of K over the momentum density
};

KineticStats kinetic_stats(const WaveField& f);

// |k| below which `quantile` of the momentum-space mass lies; used for the
// trajectory CFL estimate.
double momentum_quantile(const WaveField& f, double quantile);

// Spectral gradient of a scalar grid function along `axis`.
std::vector<cdouble> spectral_gradient(const GridSpec& grid,
                                       const std::vector<cdouble>& values,
                                       std::size_t axis);

} // namespace qmeas
