#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qoc/runner.hpp"
#include "qoc/scenario.hpp"

using namespace qoc;
namespace fs = std::filesystem;

namespace {

Json minimal_jj_config() {
    return Json{
        {"schema_version", 1},
        {"scenario", "optimize"},
        {"seed", 7},
        {"qubit1", {{"E_C", 1.0}, {"E_J_idle", 0.05}, {"n_g_idle", 0.5}}},
        {"qubit2", {{"E_C", 1.0}, {"E_J_idle", 0.05}, {"n_g_idle", 0.5}}},
        {"coupling", {{"kind", "josephson"}, {"E_cc", 0.0025}, {"E_JJ_idle", 0.05}}},
        {"gate", "jj_plus"},
        {"grid", {{"n_steps", 80}}},
        // coarse grid for speed; the update weight scales with the step
        {"krotov", {{"lambda0", 20.0}, {"max_iters", 5}, {"target_error", 1e-6}}},
    };
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("config parsing and validation", "[scenario]") {
    SECTION("a complete config parses with defaults echoed") {
        const ScenarioConfig cfg = parse_scenario_config(minimal_jj_config());
        CHECK(cfg.scenario == ScenarioKind::OptimizeOnly);
        CHECK(cfg.seed == 7);
        CHECK(cfg.basis.dim() == 4); // default window
        CHECK(cfg.grid.tau == Approx(jj_gate_time(0.05)));
        const Json echo = cfg.echo();
        CHECK(echo["basis"]["n_min"] == -1);
        CHECK(echo["grid"]["tau"].get<double>() == Approx(jj_gate_time(0.05)));
        CHECK(echo["krotov"]["stall_tolerance"].get<double>() == 1e-10);
    }

    SECTION("missing seed is reported by name") {
        Json j = minimal_jj_config();
        j.erase("seed");
        CHECK_THROWS_WITH(parse_scenario_config(j), Catch::Contains("seed"));
    }

    SECTION("unknown keys are errors") {
        Json j = minimal_jj_config();
        j["extra_knob"] = 1;
        CHECK_THROWS_WITH(parse_scenario_config(j), Catch::Contains("extra_knob"));
        j = minimal_jj_config();
        j["krotov"]["zeta"] = 2;
        CHECK_THROWS_WITH(parse_scenario_config(j), Catch::Contains("zeta"));
    }

    SECTION("noise window inversion is reported") {
        Json j = minimal_jj_config();
        j["scenario"] = "jj_noise";
        j["sweep"] = {1e-6, 1e-5};
        j["noise"] = {{"A", 1e-5}, {"gamma_min", 0.1}, {"gamma_max", 0.01}};
        CHECK_THROWS_WITH(parse_scenario_config(j), Catch::Contains("gamma"));
    }

    SECTION("sweep scenarios demand a sweep") {
        Json j = minimal_jj_config();
        j["scenario"] = "jj_leakage";
        CHECK_THROWS_WITH(parse_scenario_config(j), Catch::Contains("sweep"));
        j["sweep"] = {0.05, 0.03}; // not increasing
        CHECK_THROWS_AS(parse_scenario_config(j), config_error);
    }

    SECTION("gate and coupling kinds must agree") {
        Json j = minimal_jj_config();
        j["gate"] = "cc";
        CHECK_THROWS_AS(parse_scenario_config(j), config_error);
    }

    SECTION("schema version is enforced") {
        Json j = minimal_jj_config();
        j["schema_version"] = 2;
        CHECK_THROWS_AS(parse_scenario_config(j), config_error);
    }
}

TEST_CASE("optimize scenario produces a complete record", "[scenario]") {
    const fs::path dir = temp_dir("qoc_test_optimize");
    const ScenarioConfig cfg = parse_scenario_config(minimal_jj_config());
    const RunRecord record = run_scenario(cfg, dir.string(), 1);

    CHECK(record.complete);
    CHECK(record.points.size() == 1);
    CHECK(record.points[0]["epsilon_min"].get<double>() <
          record.points[0]["epsilon_initial"].get<double>());
    CHECK(fs::exists(dir / "record.json"));
    CHECK(fs::exists(dir / "curve.csv"));
    CHECK(fs::exists(dir / "pulses_optimized.txt"));

    // the echoed config re-parses to the same study
    const Json echo = Json::parse(read_file((dir / "record.json").string()))["config_echo"];
    const ScenarioConfig cfg2 = parse_scenario_config(echo);
    CHECK(cfg2.grid.tau == Approx(cfg.grid.tau));
    CHECK(cfg2.seed == cfg.seed);

    // pulses written with boundary rows intact
    const PulseSet pulses = read_pulse_file((dir / "pulses_optimized.txt").string());
    CHECK(pulses.grid.n_steps == 80);
    CHECK(pulses.samples(ControlId::EJ1)(0) == 0.05);
    fs::remove_all(dir);
}

TEST_CASE("leakage sweep is bit-reproducible across thread counts", "[scenario]") {
    Json j = minimal_jj_config();
    j["scenario"] = "jj_leakage";
    j["sweep"] = {0.04, 0.05, 0.06};
    j["krotov"]["max_iters"] = 4;
    const ScenarioConfig cfg = parse_scenario_config(j);

    const fs::path dir1 = temp_dir("qoc_test_sweep1");
    const fs::path dir2 = temp_dir("qoc_test_sweep2");
    run_scenario(cfg, dir1.string(), 1);
    run_scenario(cfg, dir2.string(), 4);

    const std::string csv1 = read_file((dir1 / "curve.csv").string());
    const std::string csv2 = read_file((dir2 / "curve.csv").string());
    CHECK(csv1 == csv2);
    CHECK(csv1.find("ej_over_ec,epsilon_optimized") == 0);

    // re-running with the same seed reproduces the bytes as well
    const fs::path dir3 = temp_dir("qoc_test_sweep3");
    run_scenario(cfg, dir3.string(), 2);
    CHECK(read_file((dir3 / "curve.csv").string()) == csv1);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
    fs::remove_all(dir3);
}

TEST_CASE("noise sweep is bit-reproducible across thread counts", "[scenario]") {
    Json j = minimal_jj_config();
    j["scenario"] = "jj_noise";
    j["sweep"] = {1e-6, 1e-5};
    j["grid"] = {{"n_steps", 250}}; // keep gamma_max * dt inside the flip regime
    j["krotov"]["max_iters"] = 3;
    j["noise"] = {{"A", 1e-5}, {"n_fluctuators", 20}, {"realizations", 6}};
    const ScenarioConfig cfg = parse_scenario_config(j);

    const fs::path dir1 = temp_dir("qoc_test_noise1");
    const fs::path dir2 = temp_dir("qoc_test_noise2");
    run_scenario(cfg, dir1.string(), 1);
    run_scenario(cfg, dir2.string(), 4);
    CHECK(read_file((dir1 / "curve.csv").string()) == read_file((dir2 / "curve.csv").string()));
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("filter sweep emits the reference row and matches it at Nyquist",
          "[scenario]") {
    Json j = minimal_jj_config();
    j["scenario"] = "jj_filter";
    // harmonic counts; the last one exceeds Nyquist (n_steps/2) on purpose
    j["sweep"] = {2.0, 10.0, 60.0};
    j["krotov"]["max_iters"] = 4;
    const ScenarioConfig cfg = parse_scenario_config(j);

    const fs::path dir = temp_dir("qoc_test_filter");
    const RunRecord record = run_scenario(cfg, dir.string(), 2);
    REQUIRE(record.points.size() == 4); // reference + 3 cutoffs
    const double ref = record.points[0]["epsilon"].get<double>();
    const double last = record.points[3]["epsilon"].get<double>();
    CHECK(last == Approx(ref).margin(1e-10));
    fs::remove_all(dir);
}

TEST_CASE("evaluate scenario handles pulse files and the constant scheme", "[scenario]") {
    Json j = minimal_jj_config();
    j["scenario"] = "evaluate";
    const ScenarioConfig cfg = parse_scenario_config(j);

    const fs::path dir = temp_dir("qoc_test_eval");
    const RunRecord record = run_scenario(cfg, dir.string(), 1);
    CHECK(record.complete);
    const double eps = record.points[0]["epsilon"].get<double>();
    CHECK(eps == Approx(baseline_jj_gate(default_basis(), 0.05, 0.05).epsilon).margin(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("psd run writes trajectory and spectrum files", "[scenario]") {
    Json j = minimal_jj_config();
    j["scenario"] = "optimize"; // scenario irrelevant for the psd entry point
    j["grid"] = {{"n_steps", 2048}, {"tau", 2048.0}};
    j["noise"] = {{"A", 1e-5}, {"gamma_min", 0.001}, {"gamma_max", 0.09},
                  {"n_fluctuators", 30}, {"realizations", 8}};
    const ScenarioConfig cfg = parse_scenario_config(j);

    const fs::path dir = temp_dir("qoc_test_psd");
    const RunRecord record = run_psd(cfg, dir.string(), 2);
    CHECK(record.complete);
    CHECK(fs::exists(dir / "trajectory.txt"));
    CHECK(fs::exists(dir / "psd.csv"));
    const PulseSet traj = read_pulse_file((dir / "trajectory.txt").string());
    CHECK(traj.grid.n_steps == 2048);
    fs::remove_all(dir);
}

TEST_CASE("optimize scenarios accept warm-start pulse files", "[scenario]") {
    const fs::path dir1 = temp_dir("qoc_test_warm1");
    const fs::path dir2 = temp_dir("qoc_test_warm2");
    Json j = minimal_jj_config();
    j["krotov"]["max_iters"] = 4;
    const RunRecord first = run_scenario(parse_scenario_config(j), dir1.string(), 1);
    const double eps_first = first.points[0]["epsilon_min"].get<double>();

    j["pulse_file"] = (dir1 / "pulses_optimized.txt").string();
    const RunRecord second = run_scenario(parse_scenario_config(j), dir2.string(), 1);
    // the warm start resumes where the first run stopped
    CHECK(second.points[0]["epsilon_initial"].get<double>() ==
          Approx(eps_first).margin(1e-12));
    CHECK(second.points[0]["epsilon_min"].get<double>() <= eps_first);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("failed runs leave a record flagged incomplete", "[scenario]") {
    Json j = minimal_jj_config();
    j["scenario"] = "evaluate";
    j["pulse_file"] = "/nonexistent/pulses.txt";
    const ScenarioConfig cfg = parse_scenario_config(j);
    const fs::path dir = temp_dir("qoc_test_fail");
    CHECK_THROWS_AS(run_scenario(cfg, dir.string(), 1), input_error);
    const Json record = Json::parse(read_file((dir / "record.json").string()));
    CHECK(record["complete"] == false);
    CHECK(record["error_class"] == "input_error");
    fs::remove_all(dir);
}
