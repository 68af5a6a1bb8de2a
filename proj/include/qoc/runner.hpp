#ifndef QOC_RUNNER_HPP
#define QOC_RUNNER_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qoc/scenario.hpp"
#include "qoc/spectral.hpp"
#include "qoc/version.hpp"

namespace qoc {

// ---------------------------------------------------------------------------
// Scenario runner: executes one study end to end and persists a structured
// record, a plot-ready CSV table, and pulse files. Numeric results are
// bit-reproducible for a given (config, seed) regardless of worker count:
// every unit of work owns a deterministic seed and results are reduced in
// index order by a single writer.
// ---------------------------------------------------------------------------

/// Run work(i) for i in [0, n) on up to n_threads workers.
template <typename Work>
inline void parallel_for_indexed(int n, int n_threads, Work&& work) {
    const int workers = std::max(1, std::min(n_threads, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Parallel variant of the Monte-Carlo noise average; bit-identical to the
/// serial one because realization r depends only on (cfg.seed, r).
inline NoisyErrorReport noisy_gate_error_parallel(const ControlProblem& problem,
                                                  const std::vector<RealVector>& x,
                                                  const GateTarget& target,
                                                  const NoiseConfig& cfg_in, int n_threads) {
    const NoiseConfig cfg = cfg_in.resolved_for(problem.grid().tau);
    NoisyErrorReport report;
    report.epsilons.resize(cfg.realizations);
    parallel_for_indexed(cfg.realizations, n_threads, [&](int r) {
        const auto [dng1, dng2] = sample_noise_offsets(cfg, problem.grid(), r);
        report.epsilons[r] =
            evaluate_problem(problem, x, target, ChargeOffsets{dng1, dng2}).epsilon;
    });
    report.finalize();
    return report;
}

struct RunRecord {
    std::string scenario;
    std::uint64_t seed = 0;
    Json config_echo;
    std::vector<std::string> warnings;
    Json points = Json::array();
    std::vector<std::string> pulse_files;
    std::string csv_path;
    double wall_clock_seconds = 0.0;
    bool complete = false;
    std::string error_class; // set when incomplete
    std::string error_message;

    Json to_json() const {
        Json j;
        j["artifact_version"] = artifact_version;
        j["scenario"] = scenario;
        j["seed"] = seed;
        j["config_echo"] = config_echo;
        j["warnings"] = warnings;
        j["points"] = points;
        j["pulse_files"] = pulse_files;
        j["csv"] = csv_path;
        j["wall_clock_seconds"] = wall_clock_seconds;
        j["complete"] = complete;
        j["seed_lineage"] =
            "splitmix64 chains: child_seed(seed, stream, qubit, realization); "
            "streams: 1 = fluctuator rates/states, 2 = telegraph flips, 3 = pulse guesses";
        if (!complete) {
            j["error_class"] = error_class;
            j["error_message"] = error_message;
        }
        return j;
    }
};

namespace detail {

/// CSV writer with a fixed header; all values rendered at 17 significant
/// digits so identical runs produce identical bytes.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != header_.size()) throw internal_error("csv row arity mismatch");
        rows_.push_back(row);
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw input_error("cannot open for writing: " + path);
        for (std::size_t i = 0; i < header_.size(); ++i)
            out << (i ? "," : "") << header_[i];
        out << "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << format_double(row[i]);
            out << "\n";
        }
        if (!out) throw input_error("failed writing " + path);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

struct PointArtifacts {
    TwoQubitSystem system;
    ControlProblem problem;
    GateTarget target;
    PulseSet baseline_pulses;
    GateError baseline_error;
};

/// Instantiate the per-point physics of a JJ study: identical qubits at
/// their configured parking charge, drive magnitude ej, residual Coulomb
/// coupling scaled with the drive.
inline PointArtifacts make_jj_point(const ScenarioConfig& cfg, double ej_over_ec) {
    const double ej = ej_over_ec * cfg.qubit1.E_C;
    QubitParams q1 = cfg.qubit1, q2 = cfg.qubit2;
    q1.E_J_idle = ej;
    q2.E_J_idle = ej;
    CouplingSpec coupling = cfg.coupling;
    coupling.E_JJ_idle = ej;
    if (cfg.coupling.E_JJ_idle > 0.0) {
        // residual coupling tracks the drive: keep the configured ratio
        coupling.E_cc = cfg.coupling.E_cc / cfg.coupling.E_JJ_idle * ej;
    }
    TwoQubitSystem system(cfg.basis, q1, q2, coupling);
    TimeGrid grid{cfg.tau_explicit ? cfg.grid.tau : jj_gate_time(ej), cfg.grid.n_steps};
    GateTarget target = make_gate_target(cfg.gate, cfg.basis);
    PulseSet baseline = constant_pulse_set(grid, {{ControlId::EJ1, ej},
                                                  {ControlId::EJ2, ej},
                                                  {ControlId::EJJ, ej}});
    ControlProblem problem = make_jj_problem(system, grid, cfg.gate);
    GateError base_err =
        gate_error(propagate_problem(problem, problem.channels_from(baseline)).unitary, target);
    return {std::move(system), std::move(problem), std::move(target), std::move(baseline),
            base_err};
}

/// Instantiate the per-point physics of a cc study at tunneling energy ej.
inline PointArtifacts make_cc_point(const ScenarioConfig& cfg, double ej) {
    double ng1 = cfg.qubit1.n_g_idle;
    double ng2 = cfg.qubit2.n_g_idle;
    if (cfg.auto_operating_point) {
        const CcOperatingPoint op = cc_scan_operating_point(
            cfg.basis, ej, cfg.qubit1.E_C, cfg.qubit2.E_C, cfg.coupling.E_cc, cfg.gate);
        ng1 = op.ng1;
        ng2 = op.ng2;
    }
    QubitParams q1 = cfg.qubit1, q2 = cfg.qubit2;
    q1.E_J_idle = ej;
    q2.E_J_idle = ej;
    q1.n_g_idle = ng1;
    q2.n_g_idle = ng2;
    TwoQubitSystem system(cfg.basis, q1, q2, cfg.coupling);
    TimeGrid grid{cfg.tau_explicit ? cfg.grid.tau : cc_gate_time(ej), cfg.grid.n_steps};
    GateTarget target = make_gate_target(cfg.gate, cfg.basis);
    PulseSet baseline =
        constant_pulse_set(grid, {{ControlId::NG1, ng1}, {ControlId::NG2, ng2}});
    ControlProblem problem = make_cc_problem(system, grid);
    GateError base_err =
        gate_error(propagate_problem(problem, problem.channels_from(baseline)).unitary, target);
    return {std::move(system), std::move(problem), std::move(target), std::move(baseline),
            base_err};
}

inline PointArtifacts make_point(const ScenarioConfig& cfg, double x, bool jj_like) {
    if (jj_like) return make_jj_point(cfg, x);
    return make_cc_point(cfg, x * cfg.coupling.E_cc); // x = E_J / E_cc
}

/// Base-point artifacts for scenarios that do not sweep the system itself.
inline PointArtifacts make_base_point(const ScenarioConfig& cfg) {
    const bool jj_like = cfg.gate != GateKind::CC;
    if (jj_like) return make_jj_point(cfg, cfg.coupling.E_JJ_idle / cfg.qubit1.E_C);
    return make_cc_point(cfg, cfg.qubit1.E_J_idle);
}

inline std::string point_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    std::string s(buf);
    for (auto& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

} // namespace detail

/// Execute a scenario and persist record.json, curve.csv, and pulse files
/// under out_dir. On a mid-run failure the partial record is written with
/// complete = false and the error is rethrown.
inline RunRecord run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                              int n_threads = 1) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto t_start = std::chrono::steady_clock::now();

    RunRecord record;
    record.scenario = scenario_name(cfg.scenario);
    record.seed = cfg.seed;
    record.config_echo = cfg.echo();
    record.csv_path = (fs::path(out_dir) / "curve.csv").string();
    const std::string record_path = (fs::path(out_dir) / "record.json").string();

    const auto finish = [&](bool ok, const char* err_class, const std::string& message,
                            const detail::CsvTable& csv) {
        record.complete = ok;
        if (!ok) {
            record.error_class = err_class;
            record.error_message = message;
        }
        record.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        csv.write(record.csv_path);
        std::ofstream out(record_path);
        out << record.to_json().dump(2) << "\n";
    };

    const bool jj_like = cfg.gate != GateKind::CC;

    try {
        switch (cfg.scenario) {
            case ScenarioKind::JJLeakage:
            case ScenarioKind::CCLeakage: {
                detail::CsvTable csv({jj_like ? "ej_over_ec" : "ej_over_ecc",
                                      "epsilon_optimized", "leakage_optimized",
                                      "epsilon_baseline", "leakage_baseline", "iterations"});
                const int n = static_cast<int>(cfg.sweep.size());
                std::vector<OptResult> results(n);
                std::vector<detail::PointArtifacts> points;
                points.reserve(n);
                for (int i = 0; i < n; ++i)
                    points.push_back(detail::make_point(cfg, cfg.sweep[i], jj_like));
                parallel_for_indexed(n, n_threads, [&](int i) {
                    results[i] = krotov_optimize(points[i].problem, points[i].baseline_pulses,
                                                 points[i].target, cfg.krotov);
                });
                for (int i = 0; i < n; ++i) {
                    const GateError opt_err = gate_error(
                        propagate_problem(points[i].problem,
                                          points[i].problem.channels_from(results[i].final_pulses))
                            .unitary,
                        points[i].target);
                    const std::string pulse_path =
                        (fs::path(out_dir) / ("pulses_" + detail::point_label(cfg.sweep[i]) + ".txt"))
                            .string();
                    write_pulse_file(results[i].final_pulses, pulse_path);
                    record.pulse_files.push_back(pulse_path);
                    csv.add_row({cfg.sweep[i], opt_err.epsilon, opt_err.leakage_max,
                                 points[i].baseline_error.epsilon,
                                 points[i].baseline_error.leakage_max,
                                 static_cast<double>(results[i].iterations_run)});
                    Json p;
                    p["x"] = cfg.sweep[i];
                    p["epsilon_optimized"] = opt_err.epsilon;
                    p["leakage_optimized"] = opt_err.leakage_max;
                    p["epsilon_baseline"] = points[i].baseline_error.epsilon;
                    p["leakage_baseline"] = points[i].baseline_error.leakage_max;
                    p["iterations"] = results[i].iterations_run;
                    p["terminated_by"] = termination_name(results[i].terminated_by);
                    p["pulse_file"] = pulse_path;
                    record.points.push_back(p);
                }
                finish(true, "", "", csv);
                return record;
            }

            case ScenarioKind::JJNoise:
            case ScenarioKind::CCNoise: {
                detail::CsvTable csv({"A", "epsilon_optimized_mean", "epsilon_optimized_stderr",
                                      "epsilon_baseline_mean", "epsilon_baseline_stderr"});
                detail::PointArtifacts point = detail::make_base_point(cfg);
                const OptResult opt = krotov_optimize(point.problem, point.baseline_pulses,
                                                      point.target, cfg.krotov);
                const std::string pulse_path = (fs::path(out_dir) / "pulses_optimized.txt").string();
                write_pulse_file(opt.final_pulses, pulse_path);
                record.pulse_files.push_back(pulse_path);
                const auto x_opt = point.problem.channels_from(opt.final_pulses);
                const auto x_base = point.problem.channels_from(point.baseline_pulses);

                Json header;
                header["epsilon_optimized_noiseless"] = opt.epsilon_min;
                header["epsilon_baseline_noiseless"] = point.baseline_error.epsilon;
                header["iterations"] = opt.iterations_run;
                header["terminated_by"] = termination_name(opt.terminated_by);
                record.points.push_back(header);

                for (double a : cfg.sweep) {
                    NoiseConfig noise = *cfg.noise;
                    noise.A = a;
                    const NoisyErrorReport opt_rep = noisy_gate_error_parallel(
                        point.problem, x_opt, point.target, noise, n_threads);
                    const NoisyErrorReport base_rep = noisy_gate_error_parallel(
                        point.problem, x_base, point.target, noise, n_threads);
                    csv.add_row({a, opt_rep.mean_epsilon, opt_rep.stderr_epsilon,
                                 base_rep.mean_epsilon, base_rep.stderr_epsilon});
                    Json p;
                    p["A"] = a;
                    p["epsilon_optimized_mean"] = opt_rep.mean_epsilon;
                    p["epsilon_optimized_stderr"] = opt_rep.stderr_epsilon;
                    p["epsilon_baseline_mean"] = base_rep.mean_epsilon;
                    p["epsilon_baseline_stderr"] = base_rep.stderr_epsilon;
                    p["realizations"] = cfg.noise->realizations;
                    record.points.push_back(p);
                }
                finish(true, "", "", csv);
                return record;
            }

            case ScenarioKind::JJFilter:
            case ScenarioKind::CCFilter: {
                detail::CsvTable csv(
                    {"omega_c", "harmonics", "epsilon", "leakage", "boundary_drift"});
                detail::PointArtifacts point = detail::make_base_point(cfg);
                const OptResult opt = krotov_optimize(point.problem, point.baseline_pulses,
                                                      point.target, cfg.krotov);
                const std::string pulse_path = (fs::path(out_dir) / "pulses_optimized.txt").string();
                write_pulse_file(opt.final_pulses, pulse_path);
                record.pulse_files.push_back(pulse_path);

                const double base_omega = 2.0 * pi / point.problem.grid().tau;
                std::vector<double> cutoffs;
                for (double h : cfg.sweep) cutoffs.push_back(h * base_omega);
                const CutoffSweep sweep =
                    cutoff_sweep(point.problem, opt.final_pulses, point.target, cutoffs);

                // reference row: unfiltered, sentinel -1 in the cutoff columns
                csv.add_row({-1.0, -1.0, sweep.reference.epsilon, sweep.reference.leakage_max,
                             0.0});
                Json ref;
                ref["omega_c"] = -1.0;
                ref["epsilon"] = sweep.reference.epsilon;
                ref["leakage"] = sweep.reference.leakage_max;
                ref["iterations"] = opt.iterations_run;
                ref["terminated_by"] = termination_name(opt.terminated_by);
                record.points.push_back(ref);
                for (std::size_t i = 0; i < sweep.points.size(); ++i) {
                    const CutoffPoint& p = sweep.points[i];
                    csv.add_row({p.omega_c, cfg.sweep[i], p.error.epsilon,
                                 p.error.leakage_max, p.boundary_drift});
                    Json pj;
                    pj["omega_c"] = p.omega_c;
                    pj["harmonics"] = cfg.sweep[i];
                    pj["epsilon"] = p.error.epsilon;
                    pj["leakage"] = p.error.leakage_max;
                    pj["boundary_drift"] = p.boundary_drift;
                    record.points.push_back(pj);
                }
                finish(true, "", "", csv);
                return record;
            }

            case ScenarioKind::OptimizeOnly: {
                detail::CsvTable csv({"iteration", "epsilon"});
                detail::PointArtifacts point = detail::make_base_point(cfg);
                // warm start from a previously written pulse file when given
                PulseSet init = point.baseline_pulses;
                if (!cfg.pulse_file.empty()) init = read_pulse_file(cfg.pulse_file);
                const OptResult opt =
                    krotov_optimize(point.problem, init, point.target, cfg.krotov);
                const std::string pulse_path = (fs::path(out_dir) / "pulses_optimized.txt").string();
                write_pulse_file(opt.final_pulses, pulse_path);
                record.pulse_files.push_back(pulse_path);
                for (std::size_t i = 0; i < opt.error_history.size(); ++i)
                    csv.add_row({static_cast<double>(i), opt.error_history[i]});
                const GateError final_err = gate_error(
                    propagate_problem(point.problem,
                                      point.problem.channels_from(opt.final_pulses))
                        .unitary,
                    point.target);
                Json p;
                p["epsilon_initial"] = opt.error_history.front();
                p["epsilon_min"] = opt.epsilon_min;
                p["leakage_max"] = final_err.leakage_max;
                p["iterations"] = opt.iterations_run;
                p["terminated_by"] = termination_name(opt.terminated_by);
                p["error_history"] = opt.error_history;
                record.points.push_back(p);
                finish(true, "", "", csv);
                return record;
            }

            case ScenarioKind::EvaluateOnly: {
                detail::CsvTable csv({"epsilon", "leakage"});
                detail::PointArtifacts point = detail::make_base_point(cfg);
                PulseSet pulses = point.baseline_pulses;
                if (!cfg.pulse_file.empty()) pulses = read_pulse_file(cfg.pulse_file);
                const GateError err = gate_error(
                    propagate_problem(point.problem, point.problem.channels_from(pulses))
                        .unitary,
                    point.target);
                csv.add_row({err.epsilon, err.leakage_max});
                Json p;
                p["epsilon"] = err.epsilon;
                p["leakage"] = err.leakage_max;
                p["pulse_file"] = cfg.pulse_file.empty() ? "constant scheme" : cfg.pulse_file;
                record.points.push_back(p);
                finish(true, "", "", csv);
                return record;
            }
        }
        throw internal_error("unhandled scenario");
    } catch (const config_error& e) {
        detail::CsvTable empty({"error"});
        finish(false, "config_error", e.what(), empty);
        throw;
    } catch (const input_error& e) {
        detail::CsvTable empty({"error"});
        finish(false, "input_error", e.what(), empty);
        throw;
    } catch (const numerical_error& e) {
        detail::CsvTable empty({"error"});
        finish(false, "numerical_error", e.what(), empty);
        throw;
    } catch (const std::exception& e) {
        detail::CsvTable empty({"error"});
        finish(false, "internal_error", e.what(), empty);
        throw;
    }
}

/// Offline spectrum check: dump one realization's offset-charge trajectories
/// in the pulse text format plus the averaged periodogram of qubit 1 next to
/// the configured target A/omega.
inline RunRecord run_psd(const ScenarioConfig& cfg, const std::string& out_dir,
                         int n_threads = 1) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    if (!cfg.noise) throw config_error("psd requires a noise block");
    const auto t_start = std::chrono::steady_clock::now();

    RunRecord record;
    record.scenario = "psd";
    record.seed = cfg.seed;
    record.config_echo = cfg.echo();
    record.csv_path = (fs::path(out_dir) / "psd.csv").string();

    const NoiseConfig noise = cfg.noise->resolved_for(cfg.grid.tau);
    const TimeGrid grid = cfg.grid;

    // trajectory dump (realization 0) in the pulse file format
    {
        const auto [dng1, dng2] = sample_noise_offsets(noise, grid, 0);
        PulseSet dump;
        dump.grid = grid;
        RealVector v1(grid.n_steps), v2(grid.n_steps);
        for (int k = 0; k < grid.n_steps; ++k) {
            v1(k) = dng1[k];
            v2(k) = dng2[k];
        }
        dump.fields.emplace_back(ControlId::NG1, v1);
        dump.fields.emplace_back(ControlId::NG2, v2);
        const std::string traj_path = (fs::path(out_dir) / "trajectory.txt").string();
        write_pulse_file(dump, traj_path);
        record.pulse_files.push_back(traj_path);
    }

    // averaged periodogram over the configured realizations
    std::vector<std::vector<double>> powers(noise.realizations);
    std::vector<double> omegas;
    parallel_for_indexed(noise.realizations, n_threads, [&](int r) {
        const FluctuatorEnsemble ensemble = sample_ensemble(noise, 1, r);
        const std::vector<double> traj =
            trajectory(ensemble, grid, child_seed(noise.seed, RngStream::Trajectory, 1, r));
        powers[r] = periodogram(traj, grid.dt()).power;
    });
    {
        const FluctuatorEnsemble ensemble = sample_ensemble(noise, 1, 0);
        const std::vector<double> traj =
            trajectory(ensemble, grid, child_seed(noise.seed, RngStream::Trajectory, 1, 0));
        omegas = periodogram(traj, grid.dt()).omega;
    }
    detail::CsvTable csv({"omega", "power_mean", "power_target"});
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        double mean = 0.0;
        for (const auto& p : powers) mean += p[i];
        mean /= powers.size();
        csv.add_row({omegas[i], mean, noise.A > 0 ? noise.A / omegas[i] : 0.0});
    }
    Json p;
    p["realizations"] = noise.realizations;
    p["gamma_min"] = noise.gamma_min;
    p["gamma_max"] = noise.gamma_max;
    record.points.push_back(p);

    record.complete = true;
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    csv.write(record.csv_path);
    std::ofstream out((fs::path(out_dir) / "record.json").string());
    out << record.to_json().dump(2) << "\n";
    return record;
}

} // namespace qoc

#endif
