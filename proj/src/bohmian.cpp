#include "qmeas/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <thread>

#include "qmeas/fft.hpp"
#include "qmeas/rng.hpp"

namespace qmeas {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw BohmianError(msg);
}

// fractional periodic index of x on an axis
double frac_index(const GridSpec::Axis& ax, double x) {
    const double u = (x + 0.5 * ax.length) / ax.spacing();
    const double n = static_cast<double>(ax.points);
    double w = std::fmod(u, n);
    if (w < 0.0) w += n;
    return w;
}

struct LinearWeights {
    std::size_t j0, j1;
    double w0, w1;
};

LinearWeights axis_weights(const GridSpec::Axis& ax, double x) {
    const double u = frac_index(ax, x);
    const auto j0 = static_cast<std::size_t>(u) % ax.points;
    const std::size_t j1 = (j0 + 1) % ax.points;
    const double f = u - std::floor(u);
    return {j0, j1, 1.0 - f, f};
}

} // namespace

FlowSnapshot::FlowSnapshot(GridSpec grid, double t, std::vector<double> dens,
                           std::vector<std::vector<double>> v)
    : time(t), grid_(std::move(grid)), dens_(std::move(dens)), v_(std::move(v)) {
    for (double d : dens_) max_dens_ = std::max(max_dens_, d);
}

FlowSnapshot::FlowSnapshot(const WaveField& f) : time(f.time), grid_(f.grid) {
    // spinor guidance: total current over total density. Orthogonal spin
    // components do not interfere, so the flow sees no inter-component beats
    // and transports sum_s |psi_s|^2 exactly.
    const std::size_t n = f.num_points();
    dens_.assign(n, 0.0);
    v_.assign(grid_.dims(), std::vector<double>(n, 0.0));

    std::vector<cdouble> comp(n);
    for (std::size_t s = 0; s < f.spin_dim; ++s) {
        for (std::size_t j = 0; j < n; ++j) {
            comp[j] = f.at(s, j);
            dens_[j] += std::norm(comp[j]);
        }
        for (std::size_t a = 0; a < grid_.dims(); ++a) {
            const auto grad = spectral_gradient(grid_, comp, a);
            for (std::size_t j = 0; j < n; ++j)
                v_[a][j] += std::imag(std::conj(comp[j]) * grad[j]);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        max_dens_ = std::max(max_dens_, dens_[j]);
        for (std::size_t a = 0; a < grid_.dims(); ++a)
            v_[a][j] = dens_[j] > 0.0 ? v_[a][j] / dens_[j] : 0.0;
    }
}

double FlowSnapshot::density(const std::vector<double>& x) const {
    if (grid_.dims() == 1) {
        const auto w = axis_weights(grid_.axes[0], x[0]);
        return w.w0 * dens_[w.j0] + w.w1 * dens_[w.j1];
    }
    const auto wx = axis_weights(grid_.axes[0], x[0]);
    const auto wy = axis_weights(grid_.axes[1], x[1]);
    const std::size_t n1 = grid_.axes[1].points;
    return wx.w0 * (wy.w0 * dens_[wx.j0 * n1 + wy.j0] + wy.w1 * dens_[wx.j0 * n1 + wy.j1]) +
           wx.w1 * (wy.w0 * dens_[wx.j1 * n1 + wy.j0] + wy.w1 * dens_[wx.j1 * n1 + wy.j1]);
}

bool FlowSnapshot::velocity(const std::vector<double>& x, double node_epsilon,
                            std::vector<double>& v_out) const {
    if (density(x) < node_epsilon * max_dens_) return false;
    v_out.resize(grid_.dims());
    if (grid_.dims() == 1) {
        const auto w = axis_weights(grid_.axes[0], x[0]);
        v_out[0] = w.w0 * v_[0][w.j0] + w.w1 * v_[0][w.j1];
        return true;
    }
    const auto wx = axis_weights(grid_.axes[0], x[0]);
    const auto wy = axis_weights(grid_.axes[1], x[1]);
    const std::size_t n1 = grid_.axes[1].points;
    for (std::size_t a = 0; a < 2; ++a) {
        const auto& v = v_[a];
        v_out[a] =
            wx.w0 * (wy.w0 * v[wx.j0 * n1 + wy.j0] + wy.w1 * v[wx.j0 * n1 + wy.j1]) +
            wx.w1 * (wy.w0 * v[wx.j1 * n1 + wy.j0] + wy.w1 * v[wx.j1 * n1 + wy.j1]);
    }
    return true;
}

std::vector<double> velocity_at(const WaveField& f, const std::vector<double>& x,
                                double node_epsilon) {
    require(x.size() == f.grid.dims(), "velocity_at: dimensionality mismatch");
    FlowSnapshot snap(f);
    std::vector<double> v;
    if (!snap.velocity(x, node_epsilon, v))
        throw BohmianError("velocity_at: density below node epsilon");
    return v;
}

std::vector<std::vector<double>> sample_quantum_equilibrium(const WaveField& f,
                                                            const EnsembleSpec& spec) {
    require(spec.count >= 1, "sample_quantum_equilibrium: count must be >= 1");
    const auto dens = total_density(f);
    const double dv = f.grid.cell_volume();
    double total = 0.0;
    for (double w : dens) total += w * dv;
    require(total > 1e-300, "sample_quantum_equilibrium: degenerate density");

    std::vector<std::vector<double>> out(spec.count);

    if (f.grid.dims() == 1) {
        const auto& ax = f.grid.axes[0];
        std::vector<double> cum(dens.size() + 1, 0.0);
        for (std::size_t j = 0; j < dens.size(); ++j) cum[j + 1] = cum[j] + dens[j] * dv;
        const double mass = cum.back();
        for (std::size_t i = 0; i < spec.count; ++i) {
            Rng rng = substream(spec.seed, "equilibrium", i);
            const double u = rng.next_double() * mass;
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            std::size_t j = static_cast<std::size_t>(std::distance(cum.begin(), it));
            j = (j == 0) ? 0 : j - 1;
            if (j >= dens.size()) j = dens.size() - 1;
            const double seg = cum[j + 1] - cum[j];
            const double fr = seg > 0.0 ? (u - cum[j]) / seg : 0.5;
            out[i] = {ax.coordinate(j) + fr * ax.spacing()};
        }
        return out;
    }

    // 2-D rejection against the cell-constant density
    double dmax = 0.0;
    for (double w : dens) dmax = std::max(dmax, w);
    const auto& ax0 = f.grid.axes[0];
    const auto& ax1 = f.grid.axes[1];
    for (std::size_t i = 0; i < spec.count; ++i) {
        Rng rng = substream(spec.seed, "equilibrium", i);
        for (;;) {
            const double x0 = rng.uniform(-0.5 * ax0.length, 0.5 * ax0.length);
            const double x1 = rng.uniform(-0.5 * ax1.length, 0.5 * ax1.length);
            const auto j0 = std::min<std::size_t>(
                static_cast<std::size_t>((x0 + 0.5 * ax0.length) / ax0.spacing()),
                ax0.points - 1);
            const auto j1 = std::min<std::size_t>(
                static_cast<std::size_t>((x1 + 0.5 * ax1.length) / ax1.spacing()),
                ax1.points - 1);
            if (rng.next_double() * dmax <= dens[j0 * ax1.points + j1]) {
                out[i] = {x0, x1};
                break;
            }
        }
    }
    return out;
}

std::vector<double> Trajectory::position_at(double t) const {
    if (times.empty()) throw BohmianError("Trajectory: empty");
    if (t < times.front() - 1e-12 || t > times.back() + 1e-12)
        throw BohmianError("Trajectory: time outside recorded range");
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return positions.back();
    const auto hi = static_cast<std::size_t>(std::distance(times.begin(), it));
    if (hi == 0 || times[hi] == t) return positions[hi];
    const std::size_t lo = hi - 1;
    const double f = (t - times[lo]) / (times[hi] - times[lo]);
    std::vector<double> x(positions[lo].size());
    for (std::size_t a = 0; a < x.size(); ++a)
        x[a] = positions[lo][a] + f * (positions[hi][a] - positions[lo][a]);
    return x;
}

void FieldHistory::add_base(double t, WaveField f) {
    require(times_.empty() || t > times_.back(), "FieldHistory: bases must be time-ordered");
    times_.push_back(t);
    bases_.push_back(std::move(f));
}

WaveField FieldHistory::field_at(double t, bool left_limit) const {
    require(!times_.empty(), "FieldHistory: empty");
    require(t >= times_.front() - 1e-12, "FieldHistory: time before first base");
    // at an event time the right limit (default) sees the post-event base,
    // the left limit the pre-event one
    const double probe = left_limit ? t - 1e-12 : t + 1e-12;
    auto it = std::upper_bound(times_.begin(), times_.end(), probe);
    std::size_t k = static_cast<std::size_t>(std::distance(times_.begin(), it));
    k = (k == 0) ? 0 : k - 1;
    const double dt = std::max(0.0, t - times_[k]);
    return free_propagate(bases_[k], dt);
}

bool FieldHistory::is_base_time(double t) const {
    for (double tb : times_)
        if (std::abs(tb - t) < 1e-12) return true;
    return false;
}

namespace {

// Momentum-space caches per history stage: a snapshot at time t costs one
// inverse transform for the value and one per axis for the gradient, per
// spin component.
class StageFlows {
  public:
    explicit StageFlows(const FieldHistory& history) {
        for (std::size_t k = 0; k < history.base_times().size(); ++k) {
            const double t0 = history.base_times()[k];
            const WaveField base = history.field_at(t0);
            Stage st;
            st.t0 = t0;
            st.grid = base.grid;
            st.spin = base.spin_dim;
            const std::size_t n = base.num_points();
            st.phi.resize(st.spin);
            for (std::size_t s = 0; s < st.spin; ++s) {
                st.phi[s].assign(base.amp.begin() + s * n, base.amp.begin() + (s + 1) * n);
                stage_fft(st.grid, st.phi[s], false);
            }
            st.k2.resize(n);
            st.kax.assign(st.grid.dims(), std::vector<double>(n, 0.0));
            for (std::size_t j = 0; j < n; ++j) {
                const auto idx = st.grid.unflatten(j);
                double k2 = 0.0;
                for (std::size_t a = 0; a < st.grid.dims(); ++a) {
                    const double kv = fft_wavenumber(idx[a], st.grid.axes[a].points,
                                                     st.grid.axes[a].length);
                    st.kax[a][j] = kv;
                    k2 += kv * kv;
                }
                st.k2[j] = k2;
            }
            stages_.push_back(std::move(st));
        }
    }

    FlowSnapshot at(double t, bool left_limit) const {
        const double probe = left_limit ? t - 1e-12 : t + 1e-12;
        std::size_t k = 0;
        while (k + 1 < stages_.size() && stages_[k + 1].t0 <= probe) ++k;
        const Stage& st = stages_[k];
        const double dt = std::max(0.0, t - st.t0);
        const std::size_t n = st.k2.size();
        const std::size_t dims = st.grid.dims();

        std::vector<cdouble> kin(n);
        for (std::size_t j = 0; j < n; ++j)
            kin[j] = std::polar(1.0, -0.5 * dt * st.k2[j]);

        std::vector<double> dens(n, 0.0);
        std::vector<std::vector<double>> v(dims, std::vector<double>(n, 0.0));
        std::vector<cdouble> phi_t(n), psi(n), grad(n);
        for (std::size_t s = 0; s < st.spin; ++s) {
            for (std::size_t j = 0; j < n; ++j) phi_t[j] = st.phi[s][j] * kin[j];
            psi = phi_t;
            stage_fft(st.grid, psi, true);
            for (std::size_t j = 0; j < n; ++j) dens[j] += std::norm(psi[j]);
            for (std::size_t a = 0; a < dims; ++a) {
                for (std::size_t j = 0; j < n; ++j)
                    grad[j] = phi_t[j] * cdouble(0.0, st.kax[a][j]);
                stage_fft(st.grid, grad, true);
                for (std::size_t j = 0; j < n; ++j)
                    v[a][j] += std::imag(std::conj(psi[j]) * grad[j]);
            }
        }
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t a = 0; a < dims; ++a)
                v[a][j] = dens[j] > 0.0 ? v[a][j] / dens[j] : 0.0;
        return FlowSnapshot(st.grid, t, std::move(dens), std::move(v));
    }

  private:
    struct Stage {
        double t0 = 0.0;
        GridSpec grid;
        std::size_t spin = 1;
        std::vector<std::vector<cdouble>> phi;
        std::vector<double> k2;
        std::vector<std::vector<double>> kax;
    };

    static void stage_fft(const GridSpec& grid, std::vector<cdouble>& data, bool inverse) {
        if (grid.dims() == 1) {
            fft(std::span<cdouble>(data.data(), data.size()), inverse);
            return;
        }
        const std::size_t n0 = grid.axes[0].points, n1 = grid.axes[1].points;
        for (std::size_t i0 = 0; i0 < n0; ++i0) fft_strided(data, i0 * n1, 1, n1, inverse);
        for (std::size_t i1 = 0; i1 < n1; ++i1) fft_strided(data, i1, n1, n0, inverse);
    }

    std::vector<Stage> stages_;
};

// velocity with linear interpolation in time between two snapshots
bool window_velocity(const FlowSnapshot& a, const FlowSnapshot& b, double t,
                     const std::vector<double>& x, double eps,
                     std::vector<double>& v_out) {
    const double span = b.time - a.time;
    const double w = (span > 0.0) ? std::clamp((t - a.time) / span, 0.0, 1.0) : 0.0;
    std::vector<double> va, vb;
    if (!a.velocity(x, eps, va)) return false;
    if (w == 0.0) {
        v_out = va;
        return true;
    }
    if (!b.velocity(x, eps, vb)) return false;
    v_out.resize(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) v_out[i] = (1.0 - w) * va[i] + w * vb[i];
    return true;
}

struct StepContext {
    const FlowSnapshot* s0;
    const FlowSnapshot* s1; // midpoint
    const FlowSnapshot* s2;
    double eps;
};

bool velocity_in_step(const StepContext& ctx, double t, const std::vector<double>& x,
                      std::vector<double>& v) {
    if (t <= ctx.s1->time) return window_velocity(*ctx.s0, *ctx.s1, t, x, ctx.eps, v);
    return window_velocity(*ctx.s1, *ctx.s2, t, x, ctx.eps, v);
}

// one RK4 step with recursive halving near nodes; returns false -> flag
bool rk4_step(const StepContext& ctx, std::vector<double>& x, double t, double dt,
              int depth) {
    const std::size_t d = x.size();
    std::vector<double> k1, k2, k3, k4, xt(d);
    auto advance = [&](const std::vector<double>& k, double scale) {
        for (std::size_t a = 0; a < d; ++a) xt[a] = x[a] + scale * k[a];
    };
    const bool ok = velocity_in_step(ctx, t, x, k1) &&
                    (advance(k1, 0.5 * dt), velocity_in_step(ctx, t + 0.5 * dt, xt, k2)) &&
                    (advance(k2, 0.5 * dt), velocity_in_step(ctx, t + 0.5 * dt, xt, k3)) &&
                    (advance(k3, dt), velocity_in_step(ctx, t + dt, xt, k4));
    if (ok) {
        for (std::size_t a = 0; a < d; ++a)
            x[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        return true;
    }
    if (depth >= 10) return false;
    std::vector<double> trial = x;
    if (!rk4_step(ctx, trial, t, 0.5 * dt, depth + 1)) return false;
    if (!rk4_step(ctx, trial, t + 0.5 * dt, 0.5 * dt, depth + 1)) return false;
    x = trial;
    return true;
}

std::vector<double> build_step_times(const FieldHistory& history, double t0,
                                     double t_end, double dt_max,
                                     const std::vector<double>& extra) {
    // breakpoints: stage bases and requested observation times
    std::vector<double> brk{t0, t_end};
    for (double t : history.base_times())
        if (t > t0 && t < t_end) brk.push_back(t);
    for (double t : extra)
        if (t > t0 && t < t_end) brk.push_back(t);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              brk.end());

    std::vector<double> times{brk.front()};
    for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
        const double span = brk[i + 1] - brk[i];
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt_max)));
        for (std::size_t k = 1; k <= n; ++k)
            times.push_back(brk[i] + span * static_cast<double>(k) / static_cast<double>(n));
    }
    return times;
}

} // namespace

EnsembleResult integrate_ensemble(const FieldHistory& history,
                                  const std::vector<std::vector<double>>& x0,
                                  double t0, double t_end, double node_epsilon,
                                  const EnsembleOptions& options) {
    require(t_end > t0, "integrate_ensemble: empty time range");
    require(!x0.empty(), "integrate_ensemble: no trajectories");

    // CFL-style base step: grid spacing / (4 max|v|), estimated from the
    // momentum content of each stage base.
    const WaveField first = history.field_at(t0);
    double h_min = first.grid.axes[0].spacing();
    for (const auto& ax : first.grid.axes) h_min = std::min(h_min, ax.spacing());
    double v_est = 0.1;
    for (double tb : history.base_times()) {
        if (tb > t_end) continue;
        const WaveField base = history.field_at(std::max(tb, t0));
        v_est = std::max(v_est, momentum_quantile(base, 0.9999));
    }
    const double dt_base = std::min(options.dt_max, h_min / (4.0 * v_est));

    const auto times = build_step_times(history, t0, t_end, dt_base, options.observe_times);

    EnsembleResult res;
    res.dt_used = dt_base;
    res.flagged.assign(x0.size(), false);
    std::vector<std::vector<double>> pos = x0;

    // observation bookkeeping: snap requested times onto the step mesh
    std::vector<double> obs = options.observe_times;
    obs.push_back(t_end);
    std::sort(obs.begin(), obs.end());
    obs.erase(std::unique(obs.begin(), obs.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              obs.end());

    const std::size_t recorded = std::min(options.record_paths_for, x0.size());
    res.recorded_paths.resize(recorded);
    for (std::size_t i = 0; i < recorded; ++i) {
        res.recorded_paths[i].times.push_back(times.front());
        res.recorded_paths[i].positions.push_back(pos[i]);
    }

    auto maybe_observe = [&](double t) {
        for (double to : obs)
            if (std::abs(to - t) < 1e-9) {
                res.observed_times.push_back(t);
                res.positions.push_back(pos);
                return;
            }
    };
    maybe_observe(times.front());

    const StageFlows flows(history);
    FlowSnapshot snap_start = flows.at(times.front(), false);
    for (std::size_t step = 0; step + 1 < times.size(); ++step) {
        const double ta = times[step], tb = times[step + 1];
        const double tm = 0.5 * (ta + tb);
        FlowSnapshot snap_mid = flows.at(tm, false);
        // approach events from the left; the next step picks up the
        // post-event field below
        FlowSnapshot snap_end = flows.at(tb, /*left_limit=*/true);
        StepContext ctx{&snap_start, &snap_mid, &snap_end, node_epsilon};

        auto advance_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                if (res.flagged[i]) continue;
                if (!rk4_step(ctx, pos[i], ta, tb - ta, 0)) res.flagged[i] = true;
            }
        };
        if (options.threads <= 1 || pos.size() < 2 * options.threads) {
            advance_range(0, pos.size());
        } else {
            std::vector<std::thread> workers;
            const std::size_t chunk = (pos.size() + options.threads - 1) / options.threads;
            for (std::size_t w = 0; w < options.threads; ++w) {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(pos.size(), lo + chunk);
                if (lo < hi) workers.emplace_back(advance_range, lo, hi);
            }
            for (auto& th : workers) th.join();
        }

        for (std::size_t i = 0; i < recorded; ++i) {
            res.recorded_paths[i].times.push_back(tb);
            res.recorded_paths[i].positions.push_back(pos[i]);
            res.recorded_paths[i].flagged = res.flagged[i];
        }
        maybe_observe(tb);
        if (history.is_base_time(tb))
            snap_start = flows.at(tb, false);
        else
            snap_start = std::move(snap_end);
    }

    res.flagged_count = static_cast<std::size_t>(
        std::count(res.flagged.begin(), res.flagged.end(), true));
    return res;
}

Trajectory integrate_trajectory(const FieldHistory& history,
                                const std::vector<double>& x0, double dt,
                                double t0, double t_end, double node_epsilon) {
    require(dt > 0.0, "integrate_trajectory: dt must be positive");
    EnsembleOptions opt;
    opt.dt_max = dt;
    opt.record_paths_for = 1;
    auto res = integrate_ensemble(history, {x0}, t0, t_end, node_epsilon, opt);
    Trajectory t = std::move(res.recorded_paths.front());
    t.flagged = res.flagged[0];
    return t;
}

double equivariance_distance(const WaveField& f,
                             const std::vector<std::vector<double>>& positions) {
    require(f.grid.dims() == 1, "equivariance_distance: 1-D fields only");
    require(!positions.empty(), "equivariance_distance: empty ensemble");

    const auto dens = total_density(f);
    const auto& ax = f.grid.axes[0];
    std::vector<double> cum(dens.size() + 1, 0.0);
    for (std::size_t j = 0; j < dens.size(); ++j)
        cum[j + 1] = cum[j] + dens[j] * ax.spacing();
    const double mass = cum.back();

    auto cdf = [&](double x) {
        const double u = (x + 0.5 * ax.length) / ax.spacing();
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(ax.points)) return 1.0;
        const auto j = static_cast<std::size_t>(u);
        const double fr = u - std::floor(u);
        return (cum[j] + fr * (cum[j + 1] - cum[j])) / mass;
    };

    std::vector<double> xs;
    xs.reserve(positions.size());
    for (const auto& p : positions) xs.push_back(p[0]);
    std::sort(xs.begin(), xs.end());

    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fx = cdf(xs[i]);
        d = std::max(d, std::abs(fx - static_cast<double>(i) / n));
        d = std::max(d, std::abs(fx - static_cast<double>(i + 1) / n));
    }
    return d;
}

double ks_critical_1pct(std::size_t n) {
    return 1.63 / std::sqrt(static_cast<double>(n));
}

std::optional<int> detector_assignment(const Trajectory& t, const Region& regions,
                                       double t_loc) {
    return regions.label_at(t.position_at(t_loc));
}

} // namespace qmeas
