#include "qmeas/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qmeas/config_io.hpp"
#include "qmeas/experiments.hpp"
#include "qmeas/verify.hpp"

namespace qmeas {

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("QMEAS_OUT_DIR")) return env;
    return "out";
}

std::map<std::string, double> summary_metrics(const ExperimentResult& r) {
    std::map<std::string, double> m;
    if (r.stern_gerlach) {
        const auto& sg = *r.stern_gerlach;
        m["equivariance_ks"] = sg.equivariance_ks;
        m["flagged"] = static_cast<double>(sg.detectors.flagged);
        for (std::size_t b = 0; b < sg.detectors.labels.size(); ++b)
            m["freq_" + std::to_string(sg.detectors.labels[b])] = sg.detectors.frequencies[b];
    }
    if (r.two_slit) {
        const auto& ts = *r.two_slit;
        m["visibility_coherent"] = ts.visibility_coherent;
        m["visibility_averaged"] = ts.visibility_averaged;
        m["visibility_control"] = ts.visibility_control;
        m["max_pointwise_diff"] = ts.max_pointwise_diff;
        m["phase_average_abs"] = std::abs(ts.phase_average);
    }
    if (r.epr) {
        m["averaged_plus"] = r.epr->averaged_plus;
        m["averaged_minus"] = r.epr->averaged_minus;
        m["max_coherent_vs_formula"] = r.epr->max_coherent_vs_formula;
    }
    if (r.point_localisation) {
        const auto& pl = *r.point_localisation;
        m["p_before"] = pl.p_before;
        m["p_after"] = pl.p_after;
        m["impulse_density_change"] = pl.impulse_density_change;
    }
    if (r.pointer_decoherence)
        m["decoherence_max_offdiagonal"] = r.pointer_decoherence->max_offdiagonal;
    return m;
}

int do_run(const std::string& config_path, const std::string& out_dir,
           std::int64_t seed_override, std::size_t threads) {
    ExperimentConfig config = load_config(config_path);
    if (seed_override >= 0) config.ensemble.seed = static_cast<std::uint64_t>(seed_override);
    if (threads > 0) config.threads = threads;

    const ExperimentResult result = run_experiment(config);

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "resolved_config.json", config_to_json(config).dump(2) + "\n");
    write_result_files(result, dir);

    std::cout << "scenario: " << result.scenario << "\n";
    for (const auto& [key, value] : summary_metrics(result))
        std::cout << "  " << key << " = " << format_double(value) << "\n";
    std::cout << "results written to " << dir.string() << "\n";
    return 0;
}

int do_verify(const std::vector<std::string>& names) {
    std::vector<Check> selected;
    if (names.empty()) {
        selected = all_checks();
    } else {
        for (const auto& n : names) {
            bool found = false;
            for (const auto& c : all_checks())
                if (c.name == n) {
                    selected.push_back(c);
                    found = true;
                }
            if (!found) {
                std::cerr << "unknown check: " << n << "\n";
                return 2;
            }
        }
    }
    bool all_pass = true;
    for (const auto& check : selected) {
        const auto r = check.fn();
        all_pass = all_pass && r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << " [criterion " << check.criterion
                  << "] " << r.name << ": " << r.detail << " (" << r.seconds << " s)\n";
    }
    std::cout << (all_pass ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    return all_pass ? 0 : 1;
}

int do_sweep(const std::string& config_path, const std::vector<std::string>& params,
             const std::vector<double>& values, const std::string& out_dir) {
    const ExperimentConfig base = load_config(config_path);
    const ojson base_json = config_to_json(base);

    std::vector<std::map<std::string, double>> rows;
    for (double v : values) {
        ojson patched = base_json;
        for (const auto& ptr : params) {
            try {
                patched[nlohmann::ordered_json::json_pointer(ptr)] = v;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("sweep: bad parameter pointer '" + ptr + "': " + e.what());
            }
        }
        const ExperimentConfig config = parse_config(patched.dump());
        rows.push_back(summary_metrics(run_experiment(config)));
        rows.back()["value"] = v;
    }

    std::ostringstream csv;
    csv << "value";
    for (const auto& [key, _] : rows.front())
        if (key != "value") csv << ',' << key;
    csv << '\n';
    for (const auto& row : rows) {
        csv << format_double(row.at("value"));
        for (const auto& [key, val] : row)
            if (key != "value") csv << ',' << format_double(val);
        csv << '\n';
    }

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "sweep.csv", csv.str());
    std::cout << "sweep of " << values.size() << " values written to "
              << (dir / "sweep.csv").string() << "\n";
    return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"coarse-grained measurement simulator with Bohmian trajectories"};
    app.require_subcommand(1);

    std::string config_path, out_dir = default_out_dir();
    std::int64_t seed_override = -1;
    std::size_t threads = 0;

    auto* run = app.add_subcommand("run", "execute a scenario and write result files");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed_override, "seed override");
    run->add_option("--threads", threads, "trajectory worker threads");

    std::vector<std::string> check_names;
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    verify->add_option("--check", check_names, "run only the named checks");

    std::string sweep_config, sweep_out = default_out_dir();
    std::vector<std::string> sweep_params;
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "vary one parameter over a grid");
    sweep->add_option("--config", sweep_config, "experiment config (JSON)")->required();
    sweep->add_option("--param", sweep_params,
                      "JSON pointer(s) into the resolved config, e.g. /stochastic/eta/0/b")
        ->required();
    sweep->add_option("--values", sweep_values, "parameter values")->required();
    sweep->add_option("--out", sweep_out, "output directory");

    std::vector<const char*> argv;
    const std::string program = "qmeas";
    argv.push_back(program.c_str());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return do_run(config_path, out_dir, seed_override, threads);
        if (verify->parsed()) return do_verify(check_names);
        if (sweep->parsed()) return do_sweep(sweep_config, sweep_params, sweep_values, sweep_out);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

} // namespace qmeas
