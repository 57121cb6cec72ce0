#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmeas/cli.hpp"
#include "qmeas/config_io.hpp"
#include "qmeas/experiments.hpp"

using namespace qmeas;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("qmeas_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kMinimalSg = R"({
  "scenario": "stern_gerlach",
  "grid": {"points": [2048], "lengths": [60.0]},
  "spin_dim": 2,
  "packets": [
    {"weight": [0.7071067811865476, 0.0], "momentum": [0.0], "center": [0.0], "sigma": 0.8, "spin": 0},
    {"weight": [0.7071067811865476, 0.0], "momentum": [0.0], "center": [0.0], "sigma": 0.8, "spin": 1}
  ],
  "regions": [
    {"label": 1, "lo": [0.6], "hi": [17.4]},
    {"label": -1, "lo": [-17.4], "hi": [-0.6]}
  ],
  "deflection": {"alpha": 0.3, "delta_p": 9.0},
  "stochastic": {"eta": [{"kind": "uniform", "a": 0.0, "b": 62.8},
                          {"kind": "uniform", "a": 0.0, "b": 62.8}]},
  "ensemble": {"count": 200, "seed": 7},
  "times": {"t_def": 0.2, "t_loc": 1.2, "tau": 0.1, "t_end": 1.3}
})";

} // namespace

TEST_CASE("minimal config parses with defaults filled") {
    const auto c = parse_config(kMinimalSg);
    CHECK(c.scenario == Scenario::SternGerlach);
    CHECK(c.ensemble.node_epsilon == 1e-8); // default applied
    CHECK(c.trajectory_dt_max == 0.05);
    CHECK(c.times.t_end == 1.3);

    const auto dump = config_to_json(c);
    CHECK(dump.contains("split_dt"));
    CHECK(dump.contains("pointer"));
}

TEST_CASE("resolved config round-trips") {
    const auto c = parse_config(kMinimalSg);
    const auto dump = config_to_json(c).dump(2);
    const auto reparsed = parse_config(dump);
    CHECK(config_to_json(reparsed).dump(2) == dump);
}

TEST_CASE("overlapping boxes are rejected naming both labels") {
    std::string text = kMinimalSg;
    const auto pos = text.find("-17.4");
    text.replace(pos, 5, "-18.4"); // still fine
    auto broken = parse_config(text); // sanity: tweak alone is valid
    (void)broken;

    std::string overlapping = kMinimalSg;
    const auto p2 = overlapping.find("\"lo\": [0.6]");
    overlapping.replace(p2, 11, "\"lo\": [-3.0]");
    try {
        parse_config(overlapping);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("-1") != std::string::npos);
        CHECK(msg.find("overlap") != std::string::npos);
    }
}

TEST_CASE("weight normalization is enforced") {
    std::string text = kMinimalSg;
    const auto pos = text.find("0.7071067811865476");
    text.replace(pos, 18, "0.6708203932499369"); // sum |c|^2 = 0.95
    try {
        parse_config(text);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("sum |c|^2") != std::string::npos);
    }
}

TEST_CASE("corrupted config yields a parse error") {
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1,2,3]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": "bogus"})"), ConfigError);
}

TEST_CASE("shipped configs match the canonical factories") {
    const fs::path dir = QMEAS_CONFIG_DIR;
    const std::vector<std::pair<std::string, ExperimentConfig>> expected = {
        {"stern_gerlach_half.json", canonical_stern_gerlach_half()},
        {"stern_gerlach_spin1.json", canonical_stern_gerlach_spin1()},
        {"two_slit.json", canonical_two_slit()},
        {"epr.json", canonical_epr()},
        {"point_localisation.json", canonical_point_localisation()},
    };
    for (const auto& [name, config] : expected) {
        INFO(name);
        REQUIRE(fs::exists(dir / name));
        const auto parsed = load_config(dir / name);
        CHECK(config_to_json(parsed).dump() == config_to_json(config).dump());
    }
}

TEST_CASE("cli run is deterministic and atomic") {
    const auto dir = temp_dir("cli_run");
    const auto config_path = dir / "config.json";
    {
        // two-slit with a tiny ensemble keeps this fast
        auto c = canonical_two_slit();
        c.ensemble.count = 0;
        std::ofstream out(config_path);
        out << config_to_json(c).dump(2);
    }

    const auto out1 = (dir / "run1").string();
    const auto out2 = (dir / "run2").string();
    CHECK(cli_main({"run", "--config", config_path.string(), "--out", out1,
                    "--seed", "9"}) == 0);
    CHECK(cli_main({"run", "--config", config_path.string(), "--out", out2,
                    "--seed", "9"}) == 0);

    for (const auto& entry : fs::directory_iterator(out1)) {
        const auto name = entry.path().filename();
        CHECK(fs::exists(fs::path(out2) / name));
        CHECK(slurp(entry.path()) == slurp(fs::path(out2) / name));
        CHECK(entry.path().extension() != ".tmp"); // atomic writes leave no temps
    }
    fs::remove_all(dir);
}

TEST_CASE("cli rejects a corrupted config without partial outputs") {
    const auto dir = temp_dir("cli_bad");
    const auto config_path = dir / "bad.json";
    {
        std::ofstream out(config_path);
        out << "{ definitely not json";
    }
    const auto out_dir = dir / "should_not_exist";
    CHECK(cli_main({"run", "--config", config_path.string(), "--out",
                    out_dir.string()}) == 2);
    CHECK_FALSE(fs::exists(out_dir));
    fs::remove_all(dir);
}

TEST_CASE("cli verify rejects unknown checks") {
    CHECK(cli_main({"verify", "--check", "definitely_not_a_check"}) == 2);
}

TEST_CASE("cli sweep writes a csv over the parameter grid") {
    const auto dir = temp_dir("cli_sweep");
    const auto config_path = dir / "epr.json";
    {
        std::ofstream out(config_path);
        out << config_to_json(canonical_epr()).dump(2);
    }
    CHECK(cli_main({"sweep", "--config", config_path.string(), "--param",
                    "/epr_alpha_density/b", "--values", "3.14159", "6.28318", "--out",
                    (dir / "sweep").string()}) == 0);
    const auto csv = slurp(dir / "sweep" / "sweep.csv");
    CHECK(csv.find("value") != std::string::npos);
    CHECK(csv.find("averaged_plus") != std::string::npos);
    // header + two rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    fs::remove_all(dir);
}

TEST_CASE("atomic text writes replace, never append") {
    const auto dir = temp_dir("atomic");
    const auto p = dir / "file.txt";
    write_text_atomic(p, "first");
    write_text_atomic(p, "second");
    CHECK(slurp(p) == "second");
    CHECK_FALSE(fs::exists(dir / "file.txt.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("operator json dump is row-major [re, im]") {
    Operator m(2);
    m.at(0, 1) = cdouble(0.5, -2.0);
    const auto j = operator_to_json(m);
    CHECK(j["dim"] == 2);
    CHECK(j["entries"][1][0] == 0.5);
    CHECK(j["entries"][1][1] == -2.0);
}

TEST_CASE("field csv carries coordinates, spin, re, im, density") {
    const auto grid = GridSpec::line(64, 24.0);
    PacketParams p;
    p.center = {0.0};
    p.momentum = {0.0};
    p.sigma = 1.0;
    const auto f = synthesize_packets(grid, 1, {{p, 0}});
    const auto csv = field_to_csv(f);
    CHECK(csv.rfind("x,spin,re,im,density\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 65); // header + 64 rows
}
