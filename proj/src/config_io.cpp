#include "qmeas/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qmeas {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + (path.empty() ? "/" : path) + ": " + msg);
}

const ojson& member(const ojson& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing required key");
    return *it;
}

double as_double(const ojson& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double opt_double(const ojson& j, const std::string& path, const std::string& key,
                  double fallback) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    return it == j.end() ? fallback : as_double(*it, path + "/" + key);
}

std::uint64_t as_u64(const ojson& j, const std::string& path) {
    if (!j.is_number_unsigned() && !j.is_number_integer()) fail(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> as_double_vec(const ojson& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(as_double(j[i], path + "/" + std::to_string(i)));
    return v;
}

cdouble as_complex(const ojson& j, const std::string& path) {
    const auto v = as_double_vec(j, path);
    if (v.size() != 2) fail(path, "expected [re, im]");
    return {v[0], v[1]};
}

Marginal parse_marginal(const ojson& j, const std::string& path) {
    const auto& kind = member(j, path, "kind");
    if (!kind.is_string()) fail(path + "/kind", "expected \"uniform\" or \"gaussian\"");
    const std::string k = kind.get<std::string>();
    if (k == "uniform") {
        const double a = as_double(member(j, path, "a"), path + "/a");
        const double b = as_double(member(j, path, "b"), path + "/b");
        if (b < a) fail(path, "uniform marginal needs b >= a");
        return Marginal::uniform(a, b);
    }
    if (k == "gaussian") {
        const double mean = as_double(member(j, path, "mean"), path + "/mean");
        const double sd = as_double(member(j, path, "sd"), path + "/sd");
        if (sd <= 0.0) fail(path + "/sd", "gaussian marginal needs sd > 0");
        return Marginal::gaussian(mean, sd);
    }
    fail(path + "/kind", "unknown marginal kind '" + k + "'");
}

ojson marginal_to_json(const Marginal& m) {
    ojson j;
    if (m.kind == Marginal::Kind::Uniform) {
        j["kind"] = "uniform";
        j["a"] = m.a;
        j["b"] = m.b;
    } else {
        j["kind"] = "gaussian";
        j["mean"] = m.mean;
        j["sd"] = m.sd;
    }
    return j;
}

ojson complex_to_json(cdouble z) { return ojson::array({z.real(), z.imag()}); }

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config error: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("", "top level must be an object");

    ExperimentConfig c;
    if (auto it = j.find("name"); it != j.end()) {
        if (!it->is_string()) fail("/name", "expected a string");
        c.name = it->get<std::string>();
    }

    const auto& scen = member(j, "", "scenario");
    if (!scen.is_string()) fail("/scenario", "expected a scenario name");
    try {
        c.scenario = scenario_from_name(scen.get<std::string>());
    } catch (const ExperimentError& e) {
        fail("/scenario", e.what());
    }

    if (auto it = j.find("grid"); it != j.end()) {
        const auto& g = *it;
        const auto& pts = member(g, "/grid", "points");
        const auto& len = member(g, "/grid", "lengths");
        if (!pts.is_array() || !len.is_array() || pts.size() != len.size() ||
            pts.empty() || pts.size() > 2)
            fail("/grid", "points/lengths must be arrays of equal size (1 or 2)");
        for (std::size_t a = 0; a < pts.size(); ++a) {
            GridSpec::Axis ax;
            ax.points = static_cast<std::size_t>(
                as_u64(pts[a], "/grid/points/" + std::to_string(a)));
            ax.length = as_double(len[a], "/grid/lengths/" + std::to_string(a));
            c.grid.axes.push_back(ax);
        }
        try {
            c.grid.validate();
        } catch (const FieldError& e) {
            fail("/grid", e.what());
        }
    } else if (c.scenario != Scenario::Epr) {
        fail("/grid", "missing required key");
    }

    c.spin_dim = static_cast<std::size_t>(
        j.contains("spin_dim") ? as_u64(j["spin_dim"], "/spin_dim") : 1);
    if (c.spin_dim == 0) fail("/spin_dim", "must be >= 1");

    if (auto it = j.find("packets"); it != j.end()) {
        if (!it->is_array()) fail("/packets", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "/packets/" + std::to_string(i);
            const auto& pj = (*it)[i];
            PacketParams p;
            p.weight = as_complex(member(pj, path, "weight"), path + "/weight");
            p.phase = opt_double(pj, path, "phase", 0.0);
            p.momentum = as_double_vec(member(pj, path, "momentum"), path + "/momentum");
            p.center = as_double_vec(member(pj, path, "center"), path + "/center");
            p.sigma = as_double(member(pj, path, "sigma"), path + "/sigma");
            if (p.sigma <= 0.0) fail(path + "/sigma", "must be > 0");
            std::size_t spin = 0;
            if (pj.contains("spin")) spin = static_cast<std::size_t>(
                as_u64(pj["spin"], path + "/spin"));
            if (spin >= c.spin_dim) fail(path + "/spin", "spin index out of range");
            c.packets.emplace_back(p, spin);
        }
        const double wsq = [&] {
            double s = 0.0;
            for (const auto& [p, spin] : c.packets) s += std::norm(p.weight);
            return s;
        }();
        if (c.scenario != Scenario::Epr && std::abs(wsq - 1.0) >= 1e-9)
            fail("/packets", "weights must satisfy sum |c|^2 = 1 (got " +
                                 format_double(wsq) + ")");
    }

    if (auto it = j.find("regions"); it != j.end()) {
        if (!it->is_array()) fail("/regions", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "/regions/" + std::to_string(i);
            const auto& rj = (*it)[i];
            const auto& lj = member(rj, path, "label");
            if (!lj.is_number_integer()) fail(path + "/label", "expected an integer");
            c.regions.labels.push_back(lj.get<int>());
            c.regions.lo.push_back(as_double_vec(member(rj, path, "lo"), path + "/lo"));
            c.regions.hi.push_back(as_double_vec(member(rj, path, "hi"), path + "/hi"));
        }
        if (c.scenario != Scenario::Epr && !c.grid.axes.empty()) {
            // locate an overlapping pair by coordinates so the rejection can
            // name both boxes
            for (std::size_t i = 0; i < c.regions.labels.size(); ++i)
                for (std::size_t k = i + 1; k < c.regions.labels.size(); ++k) {
                    bool overlap = true;
                    for (std::size_t a = 0; a < c.regions.lo[i].size() &&
                                            a < c.regions.lo[k].size();
                         ++a)
                        if (c.regions.hi[i][a] <= c.regions.lo[k][a] ||
                            c.regions.hi[k][a] <= c.regions.lo[i][a])
                            overlap = false;
                    if (overlap)
                        fail("/regions", "boxes with labels " +
                                             std::to_string(c.regions.labels[i]) +
                                             " and " + std::to_string(c.regions.labels[k]) +
                                             " overlap");
                }
            try {
                c.regions.build(c.grid);
            } catch (const FieldError& e) {
                fail("/regions", e.what());
            }
        }
    }

    if (auto it = j.find("deflection"); it != j.end()) {
        c.deflection.alpha = opt_double(*it, "/deflection", "alpha", 0.0);
        c.deflection.delta_p = opt_double(*it, "/deflection", "delta_p", 0.0);
        if (it->contains("axis"))
            c.deflection.axis = static_cast<std::size_t>(
                as_u64((*it)["axis"], "/deflection/axis"));
    }

    if (auto it = j.find("pointer"); it != j.end()) {
        c.pointer.width = opt_double(*it, "/pointer", "width", 1.0);
        c.pointer.carrier = opt_double(*it, "/pointer", "carrier", 0.0);
        c.pointer.neutral_offset = opt_double(*it, "/pointer", "neutral_offset", 0.0);
        if (c.pointer.width <= 0.0) fail("/pointer/width", "must be > 0");
    }

    if (auto it = j.find("stochastic"); it != j.end()) {
        if (auto eit = it->find("eta"); eit != it->end()) {
            if (!eit->is_array()) fail("/stochastic/eta", "expected an array");
            for (std::size_t i = 0; i < eit->size(); ++i)
                c.density.eta.push_back(
                    parse_marginal((*eit)[i], "/stochastic/eta/" + std::to_string(i)));
        }
        if (auto yit = it->find("y"); yit != it->end())
            c.density.y = parse_marginal(*yit, "/stochastic/y");
    }

    if (auto it = j.find("ensemble"); it != j.end()) {
        if (it->contains("count"))
            c.ensemble.count = static_cast<std::size_t>(
                as_u64((*it)["count"], "/ensemble/count"));
        if (it->contains("seed")) c.ensemble.seed = as_u64((*it)["seed"], "/ensemble/seed");
        c.ensemble.node_epsilon = opt_double(*it, "/ensemble", "node_epsilon", 1e-8);
        if (c.ensemble.node_epsilon <= 0.0) fail("/ensemble/node_epsilon", "must be > 0");
    }

    if (auto it = j.find("times"); it != j.end()) {
        c.times.t_def = opt_double(*it, "/times", "t_def", 0.0);
        c.times.t_loc = opt_double(*it, "/times", "t_loc", 0.0);
        c.times.tau = opt_double(*it, "/times", "tau", 0.0);
        c.times.t_end = opt_double(*it, "/times", "t_end", c.times.t_loc);
    }

    c.trajectory_dt_max = opt_double(j, "", "trajectory_dt_max", 0.05);
    if (j.contains("threads"))
        c.threads = static_cast<std::size_t>(as_u64(j["threads"], "/threads"));
    c.impulse_eta = opt_double(j, "", "impulse_eta", 0.0);
    c.split_dt = opt_double(j, "", "split_dt", 0.01);
    if (auto it = j.find("epr_alphas"); it != j.end())
        c.epr_alphas = as_double_vec(*it, "/epr_alphas");
    if (auto it = j.find("epr_alpha_density"); it != j.end())
        c.epr_alpha_density = parse_marginal(*it, "/epr_alpha_density");
    c.screen_window_half = opt_double(j, "", "screen_window_half", 0.0);

    try {
        c.validate();
    } catch (const ExperimentError& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    } catch (const FieldError& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ojson config_to_json(const ExperimentConfig& c) {
    ojson j;
    j["name"] = c.name;
    j["scenario"] = scenario_name(c.scenario);
    if (!c.grid.axes.empty()) {
        ojson pts = ojson::array(), len = ojson::array();
        for (const auto& ax : c.grid.axes) {
            pts.push_back(ax.points);
            len.push_back(ax.length);
        }
        j["grid"] = {{"points", pts}, {"lengths", len}};
    }
    j["spin_dim"] = c.spin_dim;
    ojson packets = ojson::array();
    for (const auto& [p, spin] : c.packets) {
        ojson pj;
        pj["weight"] = complex_to_json(p.weight);
        pj["phase"] = p.phase;
        pj["momentum"] = p.momentum;
        pj["center"] = p.center;
        pj["sigma"] = p.sigma;
        pj["spin"] = spin;
        packets.push_back(pj);
    }
    j["packets"] = packets;
    ojson regions = ojson::array();
    for (std::size_t i = 0; i < c.regions.labels.size(); ++i) {
        ojson rj;
        rj["label"] = c.regions.labels[i];
        rj["lo"] = c.regions.lo[i];
        rj["hi"] = c.regions.hi[i];
        regions.push_back(rj);
    }
    j["regions"] = regions;
    j["deflection"] = {{"alpha", c.deflection.alpha},
                       {"delta_p", c.deflection.delta_p},
                       {"axis", c.deflection.axis}};
    j["pointer"] = {{"width", c.pointer.width},
                    {"carrier", c.pointer.carrier},
                    {"neutral_offset", c.pointer.neutral_offset}};
    ojson etas = ojson::array();
    for (const auto& m : c.density.eta) etas.push_back(marginal_to_json(m));
    j["stochastic"] = {{"eta", etas}, {"y", marginal_to_json(c.density.y)}};
    j["ensemble"] = {{"count", c.ensemble.count},
                     {"seed", c.ensemble.seed},
                     {"node_epsilon", c.ensemble.node_epsilon}};
    j["times"] = {{"t_def", c.times.t_def},
                  {"t_loc", c.times.t_loc},
                  {"tau", c.times.tau},
                  {"t_end", c.times.t_end}};
    j["trajectory_dt_max"] = c.trajectory_dt_max;
    j["threads"] = c.threads;
    j["impulse_eta"] = c.impulse_eta;
    j["split_dt"] = c.split_dt;
    j["epr_alphas"] = c.epr_alphas;
    j["epr_alpha_density"] = marginal_to_json(c.epr_alpha_density);
    j["screen_window_half"] = c.screen_window_half;
    return j;
}

ojson operator_to_json(const Operator& op) {
    ojson entries = ojson::array();
    for (std::size_t r = 0; r < op.dim(); ++r)
        for (std::size_t c = 0; c < op.dim(); ++c) entries.push_back(complex_to_json(op.at(r, c)));
    return ojson{{"dim", op.dim()}, {"entries", entries}};
}

namespace {

ojson coincidence_to_json(const CoincidenceResult& r) {
    ojson j;
    j["interior_mass"] = r.interior_mass;
    j["exterior_mass"] = r.exterior_mass;
    j["max_boundary_diff"] = r.max_boundary_diff;
    j["max_amplitude"] = r.max_amplitude;
    j["mass_pass"] = r.mass_pass;
    j["derivative_pass"] = r.derivative_pass;
    j["pass"] = r.pass;
    return j;
}

ojson detector_stats_to_json(const DetectorStats& d) {
    ojson j;
    j["labels"] = d.labels;
    j["counts"] = d.counts;
    j["ex_count"] = d.ex_count;
    j["flagged"] = d.flagged;
    j["frequencies"] = d.frequencies;
    j["expected"] = d.expected;
    return j;
}

ojson params_to_json(const StochasticParams& p) {
    return ojson{{"etas", p.etas}, {"y_offset", p.y_offset}};
}

ojson epr_row_to_json(const EprRow& r) {
    ojson j;
    j["alpha"] = r.alpha;
    j["coherent"] = {r.coherent_plus, r.coherent_minus};
    j["formula"] = {r.formula_plus, r.formula_minus};
    j["incoherent"] = {r.incoherent_plus, r.incoherent_minus};
    j["joint"] = r.joint;
    j["bnl"] = r.bnl;
    return j;
}

} // namespace

ojson result_to_json(const ExperimentResult& result) {
    ojson j;
    j["scenario"] = result.scenario;
    j["config_name"] = result.config_name;
    j["seed"] = result.seed;

    if (result.stern_gerlach) {
        const auto& r = *result.stern_gerlach;
        ojson sg;
        sg["detectors"] = detector_stats_to_json(r.detectors);
        sg["coincidence"] = coincidence_to_json(r.coincidence);
        sg["max_branch_overlap"] = r.max_branch_overlap;
        sg["equivariance_ks"] = r.equivariance_ks;
        sg["ks_critical"] = r.ks_critical;
        sg["drawn_etas"] = params_to_json(r.drawn_etas);
        sg["kinetic_spread"] = r.kinetic_spread;
        sg["kinetic_shift_rate"] = r.kinetic_shift_rate;
        j["stern_gerlach"] = sg;
    }
    if (result.two_slit) {
        const auto& r = *result.two_slit;
        ojson ts;
        ts["branch_overlap_at_localisation"] = r.branch_overlap_at_localisation;
        ts["coincidence"] = coincidence_to_json(r.coincidence);
        ts["visibility_coherent"] = r.visibility_coherent;
        ts["visibility_averaged"] = r.visibility_averaged;
        ts["visibility_control"] = r.visibility_control;
        ts["max_pointwise_diff"] = r.max_pointwise_diff;
        ts["phase_average"] = complex_to_json(r.phase_average);
        ts["window_halfwidth"] = r.window_halfwidth;
        ts["fringe_wavenumber"] = r.fringe_wavenumber;
        ts["drawn_etas"] = params_to_json(r.drawn_etas);
        j["two_slit"] = ts;
    }
    if (result.epr) {
        const auto& r = *result.epr;
        ojson ej;
        ej["before"] = epr_row_to_json(r.before);
        ojson rows = ojson::array();
        for (const auto& row : r.rows) rows.push_back(epr_row_to_json(row));
        ej["rows"] = rows;
        ej["averaged"] = {r.averaged_plus, r.averaged_minus};
        ej["averaged_marginals_half"] = r.averaged_marginals_half;
        ej["coherent_table_changed"] = r.coherent_table_changed;
        ej["max_coherent_vs_formula"] = r.max_coherent_vs_formula;
        j["epr"] = ej;
    }
    if (result.point_localisation) {
        const auto& r = *result.point_localisation;
        ojson pj;
        pj["impulse_density_change"] = r.impulse_density_change;
        pj["p_history_t"] = r.p_history_t;
        pj["p_history"] = r.p_history;
        pj["p_before"] = r.p_before;
        pj["p_after"] = r.p_after;
        pj["ensemble_velocity_before"] = r.ensemble_velocity_before;
        pj["ensemble_velocity_after"] = r.ensemble_velocity_after;
        pj["flagged"] = r.flagged;
        j["point_localisation"] = pj;
    }
    if (result.pointer_decoherence) {
        j["decoherence_matrix"] = operator_to_json(result.pointer_decoherence->matrix);
        j["decoherence_max_offdiagonal"] = result.pointer_decoherence->max_offdiagonal;
    }
    if (result.final_field) j["final_field"] = field_metadata(*result.final_field);
    j["sample_path_count"] = result.sample_paths.size();
    return j;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp);
        out << content;
        if (!out.good()) throw ConfigError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string field_to_csv(const WaveField& f) {
    std::ostringstream out;
    const std::size_t d = f.grid.dims();
    out << (d == 1 ? "x" : "x,y") << ",spin,re,im,density\n";
    const std::size_t n = f.num_points();
    for (std::size_t s = 0; s < f.spin_dim; ++s)
        for (std::size_t j = 0; j < n; ++j) {
            const auto idx = f.grid.unflatten(j);
            for (std::size_t a = 0; a < d; ++a)
                out << format_double(f.grid.axes[a].coordinate(idx[a])) << ',';
            const cdouble z = f.at(s, j);
            out << s << ',' << format_double(z.real()) << ',' << format_double(z.imag())
                << ',' << format_double(std::norm(z)) << '\n';
        }
    return out.str();
}

ojson field_metadata(const WaveField& f) {
    ojson pts = ojson::array(), len = ojson::array();
    for (const auto& ax : f.grid.axes) {
        pts.push_back(ax.points);
        len.push_back(ax.length);
    }
    return ojson{{"grid", {{"points", pts}, {"lengths", len}}},
                 {"spin_dim", f.spin_dim},
                 {"time_stamp", f.time}};
}

std::string trajectories_to_csv(const std::vector<Trajectory>& paths) {
    std::ostringstream out;
    out << "trajectory,t";
    const std::size_t d = paths.empty() ? 1 : paths.front().positions.front().size();
    for (std::size_t a = 0; a < d; ++a) out << ",x" << a;
    out << ",outcome\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& tr = paths[i];
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            out << i << ',' << format_double(tr.times[k]);
            for (std::size_t a = 0; a < d; ++a) out << ',' << format_double(tr.positions[k][a]);
            out << ',' << (tr.outcome ? std::to_string(*tr.outcome) : std::string("ex"))
                << '\n';
        }
    }
    return out.str();
}

std::string decoherence_to_csv(const Operator& matrix) {
    std::ostringstream out;
    out << "k,kp,re,im\n";
    for (std::size_t r = 0; r < matrix.dim(); ++r)
        for (std::size_t c = 0; c < matrix.dim(); ++c)
            out << r << ',' << c << ',' << format_double(matrix.at(r, c).real()) << ','
                << format_double(matrix.at(r, c).imag()) << '\n';
    return out.str();
}

void write_result_files(const ExperimentResult& result,
                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / "result.json", result_to_json(result).dump(2) + "\n");

    if (result.final_field) {
        write_text_atomic(out_dir / "final_field.csv", field_to_csv(*result.final_field));
        write_text_atomic(out_dir / "final_field.json",
                          field_metadata(*result.final_field).dump(2) + "\n");
    }
    if (!result.sample_paths.empty())
        write_text_atomic(out_dir / "trajectories.csv",
                          trajectories_to_csv(result.sample_paths));
    if (result.pointer_decoherence)
        write_text_atomic(out_dir / "decoherence_matrix.csv",
                          decoherence_to_csv(result.pointer_decoherence->matrix));
    if (result.two_slit) {
        const auto& r = *result.two_slit;
        std::ostringstream out;
        out << "x,coherent,averaged,incoherent,control\n";
        const auto& grid = result.final_field->grid;
        for (std::size_t j = 0; j < grid.num_points(); ++j)
            out << format_double(grid.axes[0].coordinate(j)) << ','
                << format_double(r.screen_coherent[j]) << ','
                << format_double(r.screen_averaged[j]) << ','
                << format_double(r.screen_incoherent[j]) << ','
                << format_double(r.screen_control[j]) << '\n';
        write_text_atomic(out_dir / "screen_density.csv", out.str());
    }
    if (result.epr) {
        const auto& r = *result.epr;
        std::ostringstream out;
        out << "alpha,coherent_plus,coherent_minus,formula_plus,formula_minus,"
               "incoherent_plus,incoherent_minus,joint_pp,joint_pm,joint_mp,joint_mm,bnl\n";
        auto row_csv = [&](const EprRow& row) {
            out << format_double(row.alpha) << ',' << format_double(row.coherent_plus)
                << ',' << format_double(row.coherent_minus) << ','
                << format_double(row.formula_plus) << ',' << format_double(row.formula_minus)
                << ',' << format_double(row.incoherent_plus) << ','
                << format_double(row.incoherent_minus);
            for (double v : row.joint) out << ',' << format_double(v);
            out << ',' << format_double(row.bnl) << '\n';
        };
        row_csv(r.before);
        for (const auto& row : r.rows) row_csv(row);
        write_text_atomic(out_dir / "epr_table.csv", out.str());
    }
}

} // namespace qmeas
