// Command-line interface of the optimal-control toolkit: config-driven,
// seeded, reproducible studies with plot-ready outputs.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qoc/runner.hpp"
#include "qoc/version.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "scenario config file (JSON)")
        ->required();
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed_override, "override the config seed")
        ->each([&](const std::string&) { opt.has_seed_override = true; });
    cmd->add_option("--threads", opt.threads, "worker threads (default: hardware)");
}

qoc::ScenarioConfig load_for(const CommonOptions& opt) {
    qoc::ScenarioConfig cfg = qoc::load_scenario_config(opt.config_path);
    if (opt.has_seed_override) {
        cfg.seed = opt.seed_override;
        if (cfg.noise) cfg.noise->seed = opt.seed_override;
    }
    return cfg;
}

int thread_count(const CommonOptions& opt) {
    if (opt.threads > 0) return opt.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void require_scenario(const qoc::ScenarioConfig& cfg,
                      std::initializer_list<qoc::ScenarioKind> allowed,
                      const std::string& subcommand) {
    for (qoc::ScenarioKind kind : allowed)
        if (cfg.scenario == kind) return;
    throw qoc::config_error("subcommand '" + subcommand + "' cannot run scenario '" +
                            qoc::scenario_name(cfg.scenario) + "'");
}

int error_exit(const char* error_class, const std::string& message, int code) {
    qoc::Json j;
    j["error_class"] = error_class;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
    return code;
}

void print_summary(const qoc::RunRecord& record) {
    std::printf("scenario %s: %zu point(s), %.1f s, outputs in %s\n",
                record.scenario.c_str(), record.points.size(), record.wall_clock_seconds,
                record.csv_path.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal-control studies for coupled charge qubits"};
    app.set_version_flag("--version", qoc::artifact_version);
    app.require_subcommand(1);

    CommonOptions opt;

    CLI::App* cmd_optimize = app.add_subcommand("optimize", "run one pulse optimization");
    CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "evaluate pulses or the constant scheme");
    CLI::App* cmd_leakage = app.add_subcommand("leakage-sweep", "error vs tunneling ratio");
    CLI::App* cmd_noise = app.add_subcommand("noise-sweep", "error vs 1/f noise amplitude");
    CLI::App* cmd_filter = app.add_subcommand("filter-sweep", "error vs pulse spectral cutoff");
    CLI::App* cmd_validate = app.add_subcommand("validate", "check a config without running");
    CLI::App* cmd_psd = app.add_subcommand("psd", "dump noise trajectories and their spectrum");
    for (CLI::App* cmd : {cmd_optimize, cmd_evaluate, cmd_leakage, cmd_noise, cmd_filter,
                          cmd_validate, cmd_psd})
        add_common(cmd, opt);

    std::string pulse_file_override;
    cmd_evaluate->add_option("--pulses", pulse_file_override,
                             "pulse file to evaluate (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    try {
        using qoc::ScenarioKind;
        qoc::ScenarioConfig cfg = load_for(opt);
        const int threads = thread_count(opt);

        if (app.got_subcommand(cmd_validate)) {
            std::printf("config ok: scenario %s, seed %llu\n",
                        qoc::scenario_name(cfg.scenario),
                        static_cast<unsigned long long>(cfg.seed));
            return 0;
        }
        if (app.got_subcommand(cmd_optimize)) {
            require_scenario(cfg, {ScenarioKind::OptimizeOnly}, "optimize");
            print_summary(qoc::run_scenario(cfg, opt.out_dir, threads));
            return 0;
        }
        if (app.got_subcommand(cmd_evaluate)) {
            require_scenario(cfg, {ScenarioKind::EvaluateOnly}, "evaluate");
            if (!pulse_file_override.empty()) cfg.pulse_file = pulse_file_override;
            print_summary(qoc::run_scenario(cfg, opt.out_dir, threads));
            return 0;
        }
        if (app.got_subcommand(cmd_leakage)) {
            require_scenario(cfg, {ScenarioKind::JJLeakage, ScenarioKind::CCLeakage},
                             "leakage-sweep");
            print_summary(qoc::run_scenario(cfg, opt.out_dir, threads));
            return 0;
        }
        if (app.got_subcommand(cmd_noise)) {
            require_scenario(cfg, {ScenarioKind::JJNoise, ScenarioKind::CCNoise},
                             "noise-sweep");
            print_summary(qoc::run_scenario(cfg, opt.out_dir, threads));
            return 0;
        }
        if (app.got_subcommand(cmd_filter)) {
            require_scenario(cfg, {ScenarioKind::JJFilter, ScenarioKind::CCFilter},
                             "filter-sweep");
            print_summary(qoc::run_scenario(cfg, opt.out_dir, threads));
            return 0;
        }
        if (app.got_subcommand(cmd_psd)) {
            print_summary(qoc::run_psd(cfg, opt.out_dir, threads));
            return 0;
        }
    } catch (const qoc::config_error& e) {
        return error_exit("config_error", e.what(), 2);
    } catch (const qoc::input_error& e) {
        return error_exit("input_error", e.what(), 3);
    } catch (const qoc::numerical_error& e) {
        return error_exit("numerical_error", e.what(), 4);
    } catch (const std::exception& e) {
        return error_exit("internal_error", e.what(), 1);
    }
    return 0;
}
