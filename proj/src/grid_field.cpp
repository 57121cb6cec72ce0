#include "qmeas/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmeas/fft.hpp"

namespace qmeas {

namespace {

constexpr double kQuarterRootTwoPi = 0.63161877774606470; // (2 pi)^(-1/4)

void require(bool cond, const char* msg) {
    if (!cond) throw FieldError(msg);
}

// forward/backward momentum transform of one spin component
void component_fft(const GridSpec& grid, std::vector<cdouble>& comp, bool inverse) {
    if (grid.dims() == 1) {
        fft(std::span<cdouble>(comp.data(), comp.size()), inverse);
        return;
    }
    const std::size_t n0 = grid.axes[0].points, n1 = grid.axes[1].points;
    for (std::size_t i0 = 0; i0 < n0; ++i0)
        fft_strided(comp, i0 * n1, 1, n1, inverse);
    for (std::size_t i1 = 0; i1 < n1; ++i1)
        fft_strided(comp, i1, n1, n0, inverse);
}

std::vector<cdouble> component_of(const WaveField& f, std::size_t s) {
    const std::size_t n = f.num_points();
    return std::vector<cdouble>(f.amp.begin() + s * n, f.amp.begin() + (s + 1) * n);
}

void store_component(WaveField& f, std::size_t s, const std::vector<cdouble>& comp) {
    std::copy(comp.begin(), comp.end(), f.amp.begin() + s * f.num_points());
}

double wavenumber_at(const GridSpec& grid, std::size_t axis, std::size_t j) {
    return fft_wavenumber(j, grid.axes[axis].points, grid.axes[axis].length);
}

// k^2 over the flattened momentum grid
std::vector<double> k_squared(const GridSpec& grid) {
    std::vector<double> k2(grid.num_points(), 0.0);
    if (grid.dims() == 1) {
        for (std::size_t j = 0; j < k2.size(); ++j) {
            const double k = wavenumber_at(grid, 0, j);
            k2[j] = k * k;
        }
        return k2;
    }
    const std::size_t n0 = grid.axes[0].points, n1 = grid.axes[1].points;
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
        const double k0 = wavenumber_at(grid, 0, i0);
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const double k1 = wavenumber_at(grid, 1, i1);
            k2[i0 * n1 + i1] = k0 * k0 + k1 * k1;
        }
    }
    return k2;
}

} // namespace

GridSpec GridSpec::line(std::size_t points, double length) {
    GridSpec g;
    g.axes.push_back({points, length});
    g.validate();
    return g;
}

GridSpec GridSpec::plane(std::size_t nx, double lx, std::size_t ny, double ly) {
    GridSpec g;
    g.axes.push_back({nx, lx});
    g.axes.push_back({ny, ly});
    g.validate();
    return g;
}

std::size_t GridSpec::num_points() const {
    std::size_t n = 1;
    for (const auto& ax : axes) n *= ax.points;
    return n;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (const auto& ax : axes) v *= ax.spacing();
    return v;
}

void GridSpec::validate() const {
    require(dims() == 1 || dims() == 2, "GridSpec: dims must be 1 or 2");
    for (const auto& ax : axes) {
        require(is_power_of_two(ax.points), "GridSpec: points per axis must be a power of two");
        require(ax.length > 0.0 && std::isfinite(ax.length), "GridSpec: invalid extent");
    }
}

std::size_t GridSpec::flat(const std::vector<std::size_t>& idx) const {
    if (dims() == 1) return idx[0];
    return idx[0] * axes[1].points + idx[1];
}

std::vector<std::size_t> GridSpec::unflatten(std::size_t flat_index) const {
    if (dims() == 1) return {flat_index};
    return {flat_index / axes[1].points, flat_index % axes[1].points};
}

Region::Region(const GridSpec& grid, const std::vector<int>& labels,
               const std::vector<std::vector<double>>& lo_edges,
               const std::vector<std::vector<double>>& hi_edges)
    : grid_(grid) {
    grid_.validate();
    require(labels.size() == lo_edges.size() && labels.size() == hi_edges.size(),
            "Region: label/edge count mismatch");
    require(!labels.empty(), "Region: no boxes");

    for (std::size_t b = 0; b < labels.size(); ++b) {
        require(lo_edges[b].size() == grid_.dims() && hi_edges[b].size() == grid_.dims(),
                "Region: edge dimensionality mismatch");
        Box box;
        box.label = labels[b];
        for (std::size_t a = 0; a < grid_.dims(); ++a) {
            const auto& ax = grid_.axes[a];
            const double h = ax.spacing();
            auto snap = [&](double edge) {
                const double raw = (edge + 0.5 * ax.length) / h;
                const long idx = std::lround(raw);
                require(idx >= 0 && idx <= static_cast<long>(ax.points),
                        "Region: edge outside the grid");
                return static_cast<std::size_t>(idx);
            };
            const std::size_t lo = snap(lo_edges[b][a]);
            const std::size_t hi = snap(hi_edges[b][a]);
            require(lo < hi, "Region: empty box after snapping");
            box.lo.push_back(lo);
            box.hi.push_back(hi);
            box.lo_coord.push_back(ax.coordinate(lo));
            box.hi_coord.push_back(-0.5 * ax.length + h * static_cast<double>(hi));
        }
        boxes_.push_back(std::move(box));
    }

    // pairwise disjoint in index space
    for (std::size_t i = 0; i < boxes_.size(); ++i)
        for (std::size_t j = i + 1; j < boxes_.size(); ++j) {
            bool overlap = true;
            for (std::size_t a = 0; a < grid_.dims(); ++a)
                if (boxes_[i].hi[a] <= boxes_[j].lo[a] || boxes_[j].hi[a] <= boxes_[i].lo[a])
                    overlap = false;
            require(!overlap, "Region: boxes overlap");
        }
}

bool Region::contains(const Box& box, const std::vector<std::size_t>& idx) const {
    for (std::size_t a = 0; a < grid_.dims(); ++a)
        if (idx[a] < box.lo[a] || idx[a] >= box.hi[a]) return false;
    return true;
}

std::optional<int> Region::label_at(const std::vector<double>& x) const {
    require(x.size() == grid_.dims(), "Region::label_at: dimensionality mismatch");
    for (const auto& box : boxes_) {
        bool inside = true;
        for (std::size_t a = 0; a < grid_.dims(); ++a)
            if (x[a] < box.lo_coord[a] || x[a] >= box.hi_coord[a]) inside = false;
        if (inside) return box.label;
    }
    return std::nullopt;
}

std::vector<std::uint32_t> Region::interior_mask() const {
    std::vector<std::uint32_t> mask(grid_.num_points(), 0);
    for (std::size_t b = 0; b < boxes_.size(); ++b) {
        const auto& box = boxes_[b];
        if (grid_.dims() == 1) {
            for (std::size_t j = box.lo[0]; j < box.hi[0]; ++j)
                mask[j] = static_cast<std::uint32_t>(b + 1);
        } else {
            const std::size_t n1 = grid_.axes[1].points;
            for (std::size_t i0 = box.lo[0]; i0 < box.hi[0]; ++i0)
                for (std::size_t i1 = box.lo[1]; i1 < box.hi[1]; ++i1)
                    mask[i0 * n1 + i1] = static_cast<std::uint32_t>(b + 1);
        }
    }
    return mask;
}

double field_norm(const WaveField& f) {
    double s = 0.0;
    for (const auto& z : f.amp) s += std::norm(z);
    return std::sqrt(s * f.grid.cell_volume());
}

std::vector<double> total_density(const WaveField& f) {
    const std::size_t n = f.num_points();
    std::vector<double> dens(n, 0.0);
    for (std::size_t s = 0; s < f.spin_dim; ++s)
        for (std::size_t j = 0; j < n; ++j) dens[j] += std::norm(f.at(s, j));
    return dens;
}

std::vector<cdouble> component_sum(const WaveField& f) {
    const std::size_t n = f.num_points();
    std::vector<cdouble> g(n, cdouble{});
    for (std::size_t s = 0; s < f.spin_dim; ++s)
        for (std::size_t j = 0; j < n; ++j) g[j] += f.at(s, j);
    return g;
}

WaveField extract_component(const WaveField& f, std::size_t spin) {
    require(spin < f.spin_dim, "extract_component: spin index out of range");
    WaveField out;
    out.grid = f.grid;
    out.spin_dim = 1;
    out.time = f.time;
    const std::size_t n = f.num_points();
    out.amp.assign(f.amp.begin() + spin * n, f.amp.begin() + (spin + 1) * n);
    return out;
}

WaveField synthesize_packets(
    const GridSpec& grid, std::size_t spin_dim,
    const std::vector<std::pair<PacketParams, std::size_t>>& packets) {
    grid.validate();
    require(spin_dim >= 1, "synthesize_packets: spin_dim must be >= 1");
    require(!packets.empty(), "synthesize_packets: no packets");

    WaveField f;
    f.grid = grid;
    f.spin_dim = spin_dim;
    f.amp.assign(spin_dim * grid.num_points(), cdouble{});
    f.time = 0.0;

    const std::size_t d = grid.dims();
    for (const auto& [p, spin] : packets) {
        require(spin < spin_dim, "synthesize_packets: spin index out of range");
        require(p.sigma > 0.0, "synthesize_packets: sigma must be positive");
        require(p.momentum.size() == d && p.center.size() == d,
                "synthesize_packets: parameter dimensionality mismatch");
        for (std::size_t a = 0; a < d; ++a) {
            const double margin = 0.5 * grid.axes[a].length - std::abs(p.center[a]);
            require(margin >= 5.0 * p.sigma, "synthesize_packets: packet touching boundary");
        }
        const double amp1d = kQuarterRootTwoPi / std::sqrt(p.sigma);
        const double norm_factor = std::pow(amp1d, static_cast<double>(d));

        const std::size_t npts = grid.num_points();
        for (std::size_t j = 0; j < npts; ++j) {
            const auto idx = grid.unflatten(j);
            double r2 = 0.0, px = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double x = grid.axes[a].coordinate(idx[a]);
                const double u = x - p.center[a];
                r2 += u * u;
                px += p.momentum[a] * x;
            }
            const double gauss = std::exp(-r2 / (4.0 * p.sigma * p.sigma));
            f.at(spin, j) += p.weight * std::polar(norm_factor * gauss, p.phase + px);
        }
    }

    const double nrm = field_norm(f);
    require(nrm > 1e-12, "synthesize_packets: zero total norm");
    for (auto& z : f.amp) z /= nrm;

    // boundary amplitude margin: periodic wraparound must stay undetectable
    double max_amp = 0.0;
    for (const auto& z : f.amp) max_amp = std::max(max_amp, std::abs(z));
    double boundary_amp = 0.0;
    const std::size_t npts = grid.num_points();
    for (std::size_t j = 0; j < npts; ++j) {
        const auto idx = grid.unflatten(j);
        bool on_boundary = false;
        for (std::size_t a = 0; a < d; ++a)
            if (idx[a] == 0 || idx[a] + 1 == grid.axes[a].points) on_boundary = true;
        if (!on_boundary) continue;
        for (std::size_t s = 0; s < spin_dim; ++s)
            boundary_amp = std::max(boundary_amp, std::abs(f.at(s, j)));
    }
    require(boundary_amp < 1e-10 * max_amp, "synthesize_packets: packet touching boundary");
    return f;
}

WaveField free_propagate(const WaveField& f, double duration) {
    require(duration >= 0.0, "free_propagate: negative duration");
    WaveField out = f;
    out.time = f.time + duration;
    if (duration == 0.0) return out;

    const auto k2 = k_squared(f.grid);
    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        auto comp = component_of(f, s);
        component_fft(f.grid, comp, false);
        for (std::size_t j = 0; j < comp.size(); ++j)
            comp[j] *= std::polar(1.0, -0.5 * duration * k2[j]);
        component_fft(f.grid, comp, true);
        store_component(out, s, comp);
    }
    return out;
}

WaveField apply_piecewise_impulse(const WaveField& f, const Region& regions,
                                  const std::vector<double>& etas, double tau) {
    require(regions.grid() == f.grid, "apply_piecewise_impulse: region grid mismatch");
    require(etas.size() == regions.size(), "apply_piecewise_impulse: eta count mismatch");

    const auto mask = regions.interior_mask();
    std::vector<cdouble> phases(regions.size());
    for (std::size_t b = 0; b < regions.size(); ++b)
        phases[b] = std::polar(1.0, -etas[b] * tau);

    WaveField out = f;
    const std::size_t n = f.num_points();
    for (std::size_t s = 0; s < f.spin_dim; ++s)
        for (std::size_t j = 0; j < n; ++j)
            if (mask[j]) out.at(s, j) = f.at(s, j) * phases[mask[j] - 1];
    return out;
}

WaveField apply_sg_deflection(const WaveField& f, double alpha, double delta_p,
                              std::size_t axis) {
    require(f.spin_dim == 2, "apply_sg_deflection: spin dim mismatch (expected 2)");
    return apply_sg_deflection(f, std::vector<double>{alpha, -alpha},
                               std::vector<double>{delta_p, -delta_p}, axis);
}

WaveField apply_sg_deflection(const WaveField& f, const std::vector<double>& alphas,
                              const std::vector<double>& delta_ps, std::size_t axis) {
    require(alphas.size() == f.spin_dim && delta_ps.size() == f.spin_dim,
            "apply_sg_deflection: spin dim mismatch");
    require(axis < f.grid.dims(), "apply_sg_deflection: invalid axis");

    WaveField out = f;
    const std::size_t n = f.num_points();
    for (std::size_t s = 0; s < f.spin_dim; ++s)
        for (std::size_t j = 0; j < n; ++j) {
            const auto idx = f.grid.unflatten(j);
            const double x = f.grid.axes[axis].coordinate(idx[axis]);
            out.at(s, j) = f.at(s, j) * std::polar(1.0, alphas[s] + delta_ps[s] * x);
        }
    return out;
}

WaveField split_step_evolve(const WaveField& f, const Region& regions,
                            const std::vector<double>& etas, double dt,
                            std::size_t steps) {
    require(regions.grid() == f.grid, "split_step_evolve: region grid mismatch");
    require(etas.size() == regions.size(), "split_step_evolve: eta count mismatch");
    require(dt > 0.0, "split_step_evolve: dt must be positive");
    double eta_max = 0.0;
    for (double e : etas) eta_max = std::max(eta_max, std::abs(e));
    require(dt * eta_max < 0.1, "split_step_evolve: dt*max|eta| >= 0.1 (accuracy guard)");

    const auto mask = regions.interior_mask();
    const auto k2 = k_squared(f.grid);
    std::vector<cdouble> half_phase(regions.size());
    for (std::size_t b = 0; b < regions.size(); ++b)
        half_phase[b] = std::polar(1.0, -0.5 * etas[b] * dt);

    WaveField out = f;
    const std::size_t n = f.num_points();
    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        auto comp = component_of(f, s);
        for (std::size_t step = 0; step < steps; ++step) {
            for (std::size_t j = 0; j < n; ++j)
                if (mask[j]) comp[j] *= half_phase[mask[j] - 1];
            component_fft(f.grid, comp, false);
            for (std::size_t j = 0; j < n; ++j)
                comp[j] *= std::polar(1.0, -0.5 * dt * k2[j]);
            component_fft(f.grid, comp, true);
            for (std::size_t j = 0; j < n; ++j)
                if (mask[j]) comp[j] *= half_phase[mask[j] - 1];
        }
        store_component(out, s, comp);
    }
    out.time = f.time + dt * static_cast<double>(steps);
    return out;
}

WaveField extended_impulsive_evolve(const WaveField& f, const Region& regions,
                                    const std::vector<double>& etas, double tau) {
    const auto report = coincidence_report(f, regions);
    if (!report.pass)
        throw FieldError("extended_impulsive_evolve: strong coincidence condition violated");
    return free_propagate(apply_piecewise_impulse(f, regions, etas, tau), tau);
}

CoincidenceResult coincidence_report(const WaveField& f, const Region& regions,
                                     const CoincidenceSettings& s) {
    require(regions.grid() == f.grid, "coincidence_report: region grid mismatch");
    CoincidenceResult rep;
    rep.max_boundary_diff.assign(static_cast<std::size_t>(std::max(s.derivative_order, 0)), 0.0);

    const auto dens = total_density(f);
    const auto mask = regions.interior_mask();
    const double dv = f.grid.cell_volume();

    rep.interior_mass.assign(regions.size(), 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < dens.size(); ++j) {
        total += dens[j] * dv;
        if (mask[j]) rep.interior_mass[mask[j] - 1] += dens[j] * dv;
    }
    rep.exterior_mass = total - std::accumulate(rep.interior_mass.begin(),
                                                rep.interior_mass.end(), 0.0);

    for (const auto& z : f.amp) rep.max_amplitude = std::max(rep.max_amplitude, std::abs(z));

    // h^r-scaled central differences of each component at box-edge nodes,
    // along the axis normal to the edge.
    auto probe = [&](std::size_t spin, const std::vector<std::size_t>& idx, std::size_t axis) {
        const std::size_t n_ax = f.grid.axes[axis].points;
        auto shifted = [&](long offset) {
            auto q = idx;
            q[axis] = static_cast<std::size_t>(
                (static_cast<long>(idx[axis]) + offset + static_cast<long>(n_ax)) %
                static_cast<long>(n_ax));
            return f.at(spin, f.grid.flat(q));
        };
        const cdouble m2 = shifted(-2), m1 = shifted(-1), c0 = shifted(0), p1 = shifted(1),
                      p2 = shifted(2);
        if (s.derivative_order >= 1)
            rep.max_boundary_diff[0] =
                std::max(rep.max_boundary_diff[0], std::abs(0.5 * (p1 - m1)));
        if (s.derivative_order >= 2)
            rep.max_boundary_diff[1] =
                std::max(rep.max_boundary_diff[1], std::abs(p1 - 2.0 * c0 + m1));
        for (int r = 3; r <= s.derivative_order; ++r) {
            // fall back to the widest stencil we carry; orders above 4 are not
            // distinguished further
            const cdouble d3 = 0.5 * (p2 - 2.0 * p1 + 2.0 * m1 - m2);
            rep.max_boundary_diff[static_cast<std::size_t>(r - 1)] =
                std::max(rep.max_boundary_diff[static_cast<std::size_t>(r - 1)], std::abs(d3));
        }
    };

    for (const auto& box : regions.boxes()) {
        for (std::size_t axis = 0; axis < f.grid.dims(); ++axis) {
            for (const std::size_t edge : {box.lo[axis], box.hi[axis]}) {
                for (std::size_t s_idx = 0; s_idx < f.spin_dim; ++s_idx) {
                    if (f.grid.dims() == 1) {
                        std::vector<std::size_t> idx{edge % f.grid.axes[0].points};
                        probe(s_idx, idx, axis);
                    } else {
                        const std::size_t other = 1 - axis;
                        for (std::size_t t = box.lo[other]; t < box.hi[other]; ++t) {
                            std::vector<std::size_t> idx(2);
                            idx[axis] = edge % f.grid.axes[axis].points;
                            idx[other] = t;
                            probe(s_idx, idx, axis);
                        }
                    }
                }
            }
        }
    }

    rep.mass_pass = rep.exterior_mass < s.mass_tol;
    double worst = 0.0;
    for (double d : rep.max_boundary_diff) worst = std::max(worst, d);
    rep.derivative_pass = worst < s.deriv_tol * std::max(rep.max_amplitude, 1e-300);
    rep.pass = rep.mass_pass && rep.derivative_pass;
    return rep;
}

std::vector<double> momentum_expectation(const WaveField& f) {
    const std::size_t d = f.grid.dims();
    std::vector<double> result(d, 0.0);
    double total = 0.0;

    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        auto comp = component_of(f, s);
        component_fft(f.grid, comp, false);
        for (std::size_t j = 0; j < comp.size(); ++j) {
            const double w = std::norm(comp[j]);
            if (w == 0.0) continue;
            total += w;
            const auto idx = f.grid.unflatten(j);
            for (std::size_t a = 0; a < d; ++a)
                result[a] += w * wavenumber_at(f.grid, a, idx[a]);
        }
    }
    require(total > 0.0, "momentum_expectation: zero field");
    for (auto& r : result) r /= total;
    return result;
}

namespace {

// fourth-order central difference along an axis, periodic wrap
std::vector<double> fd_gradient(const GridSpec& grid, const std::vector<double>& v,
                                std::size_t axis) {
    const std::size_t n = grid.num_points();
    std::vector<double> g(n, 0.0);
    const double h = grid.axes[axis].spacing();
    const std::size_t n_ax = grid.axes[axis].points;
    for (std::size_t j = 0; j < n; ++j) {
        auto idx = grid.unflatten(j);
        auto at_offset = [&](long o) {
            auto q = idx;
            q[axis] = static_cast<std::size_t>(
                (static_cast<long>(idx[axis]) + o + 2 * static_cast<long>(n_ax)) %
                static_cast<long>(n_ax));
            return v[grid.flat(q)];
        };
        g[j] = (-at_offset(2) + 8.0 * at_offset(1) - 8.0 * at_offset(-1) + at_offset(-2)) /
               (12.0 * h);
    }
    return g;
}

std::vector<double> fd_laplacian(const GridSpec& grid, const std::vector<double>& v) {
    const std::size_t n = grid.num_points();
    std::vector<double> lap(n, 0.0);
    for (std::size_t axis = 0; axis < grid.dims(); ++axis) {
        const double h2 = grid.axes[axis].spacing() * grid.axes[axis].spacing();
        const std::size_t n_ax = grid.axes[axis].points;
        for (std::size_t j = 0; j < n; ++j) {
            auto idx = grid.unflatten(j);
            auto at_offset = [&](long o) {
                auto q = idx;
                q[axis] = static_cast<std::size_t>(
                    (static_cast<long>(idx[axis]) + o + 2 * static_cast<long>(n_ax)) %
                    static_cast<long>(n_ax));
                return v[grid.flat(q)];
            };
            lap[j] += (-at_offset(2) + 16.0 * at_offset(1) - 30.0 * at_offset(0) +
                       16.0 * at_offset(-1) - at_offset(-2)) /
                      (12.0 * h2);
        }
    }
    return lap;
}

} // namespace

KickReport kick_check(const WaveField& f, const std::vector<double>& potential,
                      double tau) {
    require(potential.size() == f.num_points(), "kick_check: potential size mismatch");

    WaveField kicked = f;
    const std::size_t n = f.num_points();
    for (std::size_t s = 0; s < f.spin_dim; ++s)
        for (std::size_t j = 0; j < n; ++j)
            kicked.at(s, j) = f.at(s, j) * std::polar(1.0, -potential[j] * tau);

    KickReport rep;
    const auto before = momentum_expectation(f);
    const auto after = momentum_expectation(kicked);
    rep.measured.resize(before.size());
    for (std::size_t a = 0; a < before.size(); ++a) rep.measured[a] = after[a] - before[a];

    const auto dens = total_density(f);
    const double dv = f.grid.cell_volume();
    double mass = 0.0;
    for (double w : dens) mass += w * dv;
    rep.predicted.assign(f.grid.dims(), 0.0);
    for (std::size_t a = 0; a < f.grid.dims(); ++a) {
        const auto grad = fd_gradient(f.grid, potential, a);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += grad[j] * dens[j] * dv;
        rep.predicted[a] = -tau * acc / mass;
    }
    for (std::size_t a = 0; a < rep.measured.size(); ++a)
        rep.max_abs_error = std::max(rep.max_abs_error,
                                     std::abs(rep.measured[a] - rep.predicted[a]));
    return rep;
}

OverlapResult overlap_integral(const WaveField& f1, const WaveField& f2) {
    require(f1.grid == f2.grid, "overlap_integral: grid mismatch");
    require(f1.spin_dim == f2.spin_dim, "overlap_integral: spin dim mismatch");
    OverlapResult r{cdouble{}, 0.0};
    const double dv = f1.grid.cell_volume();
    for (std::size_t i = 0; i < f1.amp.size(); ++i)
        r.inner_product += std::conj(f1.amp[i]) * f2.amp[i];
    r.inner_product *= dv;

    const auto d1 = total_density(f1);
    const auto d2 = total_density(f2);
    for (std::size_t j = 0; j < d1.size(); ++j) r.density_overlap += d1[j] * d2[j];
    r.density_overlap *= dv;
    return r;
}

CommutatorReport commutator_action_check(const WaveField& f,
                                         const std::vector<double>& potential,
                                         bool compare_rhs) {
    require(potential.size() == f.num_points(), "commutator_action_check: size mismatch");
    CommutatorReport rep;
    const std::size_t n = f.num_points();
    const auto k2 = k_squared(f.grid);

    auto kinetic_apply = [&](const std::vector<cdouble>& in) {
        auto out = in;
        component_fft(f.grid, out, false);
        for (std::size_t j = 0; j < n; ++j) out[j] *= 0.5 * k2[j];
        component_fft(f.grid, out, true);
        return out;
    };

    std::vector<double> lap_v, grad_v0, grad_v1;
    if (compare_rhs) {
        lap_v = fd_laplacian(f.grid, potential);
        grad_v0 = fd_gradient(f.grid, potential, 0);
        if (f.grid.dims() == 2) grad_v1 = fd_gradient(f.grid, potential, 1);
    }

    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        const auto psi = component_of(f, s);
        for (const auto& z : psi) rep.max_amplitude = std::max(rep.max_amplitude, std::abs(z));

        std::vector<cdouble> v_psi(n);
        for (std::size_t j = 0; j < n; ++j) v_psi[j] = potential[j] * psi[j];
        const auto k_vpsi = kinetic_apply(v_psi);
        const auto k_psi = kinetic_apply(psi);

        std::vector<cdouble> action(n);
        for (std::size_t j = 0; j < n; ++j) {
            action[j] = k_vpsi[j] - potential[j] * k_psi[j];
            rep.max_action = std::max(rep.max_action, std::abs(action[j]));
        }

        if (compare_rhs) {
            const auto dpsi0 = spectral_gradient(f.grid, psi, 0);
            std::vector<cdouble> dpsi1;
            if (f.grid.dims() == 2) dpsi1 = spectral_gradient(f.grid, psi, 1);
            for (std::size_t j = 0; j < n; ++j) {
                cdouble rhs = -0.5 * (lap_v[j] * psi[j] + 2.0 * grad_v0[j] * dpsi0[j]);
                if (f.grid.dims() == 2) rhs -= grad_v1[j] * dpsi1[j];
                rep.rhs_scale = std::max(rep.rhs_scale, std::abs(rhs));
                rep.max_deviation = std::max(rep.max_deviation, std::abs(action[j] - rhs));
            }
        }
    }
    return rep;
}

std::vector<double> sample_box_potential(const Region& regions,
                                         const std::vector<double>& etas) {
    require(etas.size() == regions.size(), "sample_box_potential: eta count mismatch");
    const auto mask = regions.interior_mask();
    std::vector<double> v(mask.size(), 0.0);
    for (std::size_t j = 0; j < mask.size(); ++j)
        if (mask[j]) v[j] = etas[mask[j] - 1];
    return v;
}

KineticStats kinetic_stats(const WaveField& f) {
    const auto k2 = k_squared(f.grid);
    double total = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        auto comp = component_of(f, s);
        component_fft(f.grid, comp, false);
        for (std::size_t j = 0; j < comp.size(); ++j) {
            const double w = std::norm(comp[j]);
            const double e = 0.5 * k2[j];
            total += w;
            m1 += w * e;
            m2 += w * e * e;
        }
    }
    require(total > 0.0, "kinetic_stats: zero field");
    KineticStats st;
    st.mean = m1 / total;
    st.spread = std::sqrt(std::max(0.0, m2 / total - st.mean * st.mean));
    return st;
}

double momentum_quantile(const WaveField& f, double quantile) {
    require(quantile > 0.0 && quantile <= 1.0, "momentum_quantile: bad quantile");
    const auto k2 = k_squared(f.grid);
    std::vector<std::pair<double, double>> kw; // (|k|, weight)
    kw.reserve(k2.size());
    double total = 0.0;
    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        auto comp = component_of(f, s);
        component_fft(f.grid, comp, false);
        for (std::size_t j = 0; j < comp.size(); ++j) {
            const double w = std::norm(comp[j]);
            total += w;
            kw.emplace_back(std::sqrt(k2[j]), w);
        }
    }
    std::sort(kw.begin(), kw.end());
    double acc = 0.0;
    for (const auto& [k, w] : kw) {
        acc += w;
        if (acc >= quantile * total) return k;
    }
    return kw.empty() ? 0.0 : kw.back().first;
}

std::vector<cdouble> spectral_gradient(const GridSpec& grid,
                                       const std::vector<cdouble>& values,
                                       std::size_t axis) {
    auto out = values;
    component_fft(grid, out, false);
    const std::size_t n = grid.num_points();
    for (std::size_t j = 0; j < n; ++j) {
        const auto idx = grid.unflatten(j);
        out[j] *= cdouble(0.0, wavenumber_at(grid, axis, idx[axis]));
    }
    component_fft(grid, out, true);
    return out;
}

} // namespace qmeas
