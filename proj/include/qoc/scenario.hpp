#ifndef QOC_SCENARIO_HPP
#define QOC_SCENARIO_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qoc/charge_basis.hpp"
#include "qoc/gate_target.hpp"
#include "qoc/hamiltonian.hpp"
#include "qoc/krotov.hpp"
#include "qoc/noise.hpp"
#include "qoc/schemes.hpp"

namespace qoc {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario configuration: one config file fully determines one study. Unknown
// keys are errors, every applied default is echoed back into the run record,
// and all randomness flows from the single seed.
// ---------------------------------------------------------------------------

enum class ScenarioKind {
    JJLeakage, // error vs E_J/E_C, optimized and constant-scheme curves
    CCLeakage, // error vs E_J/E_cc, optimized curve
    JJNoise,   // error vs noise amplitude A
    CCNoise,
    JJFilter,  // error vs spectral cutoff omega_c
    CCFilter,
    OptimizeOnly,
    EvaluateOnly,
};

inline const char* scenario_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::JJLeakage: return "jj_leakage";
        case ScenarioKind::CCLeakage: return "cc_leakage";
        case ScenarioKind::JJNoise: return "jj_noise";
        case ScenarioKind::CCNoise: return "cc_noise";
        case ScenarioKind::JJFilter: return "jj_filter";
        case ScenarioKind::CCFilter: return "cc_filter";
        case ScenarioKind::OptimizeOnly: return "optimize";
        case ScenarioKind::EvaluateOnly: return "evaluate";
    }
    return "?";
}

inline ScenarioKind scenario_from_name(const std::string& name) {
    for (ScenarioKind kind :
         {ScenarioKind::JJLeakage, ScenarioKind::CCLeakage, ScenarioKind::JJNoise,
          ScenarioKind::CCNoise, ScenarioKind::JJFilter, ScenarioKind::CCFilter,
          ScenarioKind::OptimizeOnly, ScenarioKind::EvaluateOnly})
        if (name == scenario_name(kind)) return kind;
    throw config_error("unknown scenario '" + name + "'");
}

inline bool scenario_is_jj(ScenarioKind kind) {
    return kind == ScenarioKind::JJLeakage || kind == ScenarioKind::JJNoise ||
           kind == ScenarioKind::JJFilter;
}

struct ScenarioConfig {
    int schema_version = 1;
    ScenarioKind scenario = ScenarioKind::OptimizeOnly;
    std::uint64_t seed = 0;

    ChargeBasis basis;
    QubitParams qubit1;
    QubitParams qubit2;
    CouplingSpec coupling;
    GateKind gate = GateKind::JJPlus;
    bool auto_operating_point = false; // cc presets: derive ng idles by scan

    TimeGrid grid;
    bool tau_explicit = false; // false: tau derived from the scheme per point

    KrotovConfig krotov;
    std::optional<NoiseConfig> noise;
    std::vector<double> sweep;
    std::string pulse_file; // evaluate only; empty = constant scheme

    /// Fully resolved echo, defaults included.
    Json echo() const;
};

namespace detail {

[[noreturn]] inline void missing_key(const std::string& object, const std::string& key) {
    throw config_error("config " + object + ": missing required key '" + key + "'");
}

inline void reject_unknown(const Json& j, const std::string& object,
                           const std::set<std::string>& known) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw config_error("config " + object + ": unknown key '" + key + "'");
}

inline double require_number(const Json& j, const std::string& object, const std::string& key) {
    if (!j.contains(key)) missing_key(object, key);
    if (!j[key].is_number()) throw config_error("config " + object + ": '" + key + "' must be a number");
    return j[key].get<double>();
}

inline double number_or(const Json& j, const std::string& object, const std::string& key,
                        double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw config_error("config " + object + ": '" + key + "' must be a number");
    return j[key].get<double>();
}

inline int int_or(const Json& j, const std::string& object, const std::string& key,
                  int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        throw config_error("config " + object + ": '" + key + "' must be an integer");
    return j[key].get<int>();
}

} // namespace detail

/// Parse and validate a scenario config. Throws config_error naming the field
/// on any defect; never runs any physics.
inline ScenarioConfig parse_scenario_config(const Json& j) {
    ScenarioConfig cfg;
    detail::reject_unknown(j, "root",
                           {"schema_version", "scenario", "seed", "basis", "qubit1", "qubit2",
                            "coupling", "gate", "auto_operating_point", "grid", "krotov",
                            "noise", "sweep", "pulse_file"});

    if (!j.contains("schema_version")) detail::missing_key("root", "schema_version");
    cfg.schema_version = j["schema_version"].get<int>();
    if (cfg.schema_version != 1)
        throw config_error("config root: unsupported schema_version " +
                           std::to_string(cfg.schema_version));

    if (!j.contains("scenario")) detail::missing_key("root", "scenario");
    cfg.scenario = scenario_from_name(j["scenario"].get<std::string>());

    if (!j.contains("seed")) detail::missing_key("root", "seed");
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
        throw config_error("config root: 'seed' must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("basis")) {
        const Json& b = j["basis"];
        detail::reject_unknown(b, "basis", {"n_min", "n_max"});
        cfg.basis.n_min = detail::int_or(b, "basis", "n_min", -1);
        cfg.basis.n_max = detail::int_or(b, "basis", "n_max", 2);
    }
    cfg.basis.validate();

    const auto parse_qubit = [&](const char* key, QubitParams& q) {
        if (!j.contains(key)) detail::missing_key("root", key);
        const Json& b = j[key];
        detail::reject_unknown(b, key, {"E_C", "E_J_idle", "n_g_idle"});
        q.E_C = detail::require_number(b, key, "E_C");
        q.E_J_idle = detail::require_number(b, key, "E_J_idle");
        q.n_g_idle = detail::require_number(b, key, "n_g_idle");
        q.validate();
    };
    parse_qubit("qubit1", cfg.qubit1);
    parse_qubit("qubit2", cfg.qubit2);

    if (!j.contains("coupling")) detail::missing_key("root", "coupling");
    {
        const Json& c = j["coupling"];
        detail::reject_unknown(c, "coupling", {"kind", "E_cc", "E_JJ_idle"});
        if (!c.contains("kind")) detail::missing_key("coupling", "kind");
        const std::string kind = c["kind"].get<std::string>();
        if (kind == "capacitive") cfg.coupling.kind = CouplingKind::Capacitive;
        else if (kind == "josephson") cfg.coupling.kind = CouplingKind::Josephson;
        else throw config_error("config coupling: unknown kind '" + kind + "'");
        cfg.coupling.E_cc = detail::require_number(c, "coupling", "E_cc");
        cfg.coupling.E_JJ_idle = detail::number_or(c, "coupling", "E_JJ_idle", 0.0);
        cfg.coupling.validate();
    }

    if (j.contains("gate")) {
        const std::string g = j["gate"].get<std::string>();
        if (g == "jj_plus") cfg.gate = GateKind::JJPlus;
        else if (g == "jj_minus") cfg.gate = GateKind::JJMinus;
        else if (g == "cc") cfg.gate = GateKind::CC;
        else throw config_error("config root: unknown gate '" + g + "'");
    } else {
        cfg.gate = scenario_is_jj(cfg.scenario) ? GateKind::JJPlus : GateKind::CC;
    }

    const bool jj_like = cfg.gate != GateKind::CC;
    if (jj_like && cfg.coupling.kind != CouplingKind::Josephson)
        throw config_error("config: JJ gates require coupling kind 'josephson'");
    if (!jj_like && cfg.coupling.kind != CouplingKind::Capacitive)
        throw config_error("config: the cc gate requires coupling kind 'capacitive'");

    cfg.auto_operating_point =
        j.contains("auto_operating_point") ? j["auto_operating_point"].get<bool>() : !jj_like;

    if (j.contains("grid")) {
        const Json& g = j["grid"];
        detail::reject_unknown(g, "grid", {"n_steps", "tau"});
        cfg.grid.n_steps = detail::int_or(g, "grid", "n_steps", 1000);
        if (g.contains("tau")) {
            cfg.grid.tau = detail::require_number(g, "grid", "tau");
            cfg.tau_explicit = true;
        }
    }
    if (!cfg.tau_explicit) {
        cfg.grid.tau = jj_like ? jj_gate_time(cfg.coupling.E_JJ_idle)
                               : cc_gate_time(cfg.qubit1.E_J_idle);
    }
    cfg.grid.validate();

    if (j.contains("krotov")) {
        const Json& k = j["krotov"];
        detail::reject_unknown(k, "krotov",
                               {"lambda0", "max_iters", "target_error", "stall_tolerance",
                                "stall_window", "functional"});
        cfg.krotov.lambda0 = detail::number_or(k, "krotov", "lambda0", cfg.krotov.lambda0);
        cfg.krotov.max_iters = detail::int_or(k, "krotov", "max_iters", cfg.krotov.max_iters);
        cfg.krotov.target_error =
            detail::number_or(k, "krotov", "target_error", cfg.krotov.target_error);
        cfg.krotov.stall_tolerance =
            detail::number_or(k, "krotov", "stall_tolerance", cfg.krotov.stall_tolerance);
        cfg.krotov.stall_window =
            detail::int_or(k, "krotov", "stall_window", cfg.krotov.stall_window);
        if (k.contains("functional")) {
            const std::string f = k["functional"].get<std::string>();
            if (f == "trace_global_phase")
                cfg.krotov.functional = KrotovFunctional::TraceGlobalPhase;
            else if (f == "per_state")
                cfg.krotov.functional = KrotovFunctional::PerState;
            else throw config_error("config krotov: unknown functional '" + f + "'");
        }
        cfg.krotov.validate();
    }

    const bool needs_noise =
        cfg.scenario == ScenarioKind::JJNoise || cfg.scenario == ScenarioKind::CCNoise;
    if (j.contains("noise")) {
        const Json& njson = j["noise"];
        detail::reject_unknown(
            njson, "noise",
            {"A", "gamma_min", "gamma_max", "n_fluctuators", "realizations"});
        NoiseConfig noise;
        noise.A = detail::number_or(njson, "noise", "A", 1e-5);
        noise.gamma_min = detail::number_or(njson, "noise", "gamma_min", 0.0);
        noise.gamma_max = detail::number_or(njson, "noise", "gamma_max", 0.0);
        noise.n_fluctuators = detail::int_or(njson, "noise", "n_fluctuators", 200);
        noise.realizations = detail::int_or(njson, "noise", "realizations", 100);
        noise.seed = cfg.seed; // all randomness flows from the one config seed
        noise.validate();
        if (noise.gamma_min != 0.0 && !(noise.gamma_min < noise.gamma_max))
            throw config_error("config noise: require gamma_min < gamma_max");
        cfg.noise = noise;
    } else if (needs_noise) {
        detail::missing_key("root", "noise");
    }

    const bool needs_sweep = cfg.scenario != ScenarioKind::OptimizeOnly &&
                             cfg.scenario != ScenarioKind::EvaluateOnly;
    if (j.contains("sweep")) {
        if (!j["sweep"].is_array() || j["sweep"].empty())
            throw config_error("config root: 'sweep' must be a non-empty array");
        for (const auto& v : j["sweep"]) {
            if (!v.is_number()) throw config_error("config root: 'sweep' entries must be numbers");
            cfg.sweep.push_back(v.get<double>());
        }
        for (std::size_t i = 1; i < cfg.sweep.size(); ++i)
            if (!(cfg.sweep[i] > cfg.sweep[i - 1]))
                throw config_error("config root: 'sweep' values must be strictly increasing");
    } else if (needs_sweep) {
        detail::missing_key("root", "sweep");
    }

    if (j.contains("pulse_file")) cfg.pulse_file = j["pulse_file"].get<std::string>();

    return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
    return parse_scenario_config(j);
}

inline Json ScenarioConfig::echo() const {
    Json j;
    j["schema_version"] = schema_version;
    j["scenario"] = scenario_name(scenario);
    j["seed"] = seed;
    j["basis"] = {{"n_min", basis.n_min}, {"n_max", basis.n_max}};
    j["qubit1"] = {{"E_C", qubit1.E_C}, {"E_J_idle", qubit1.E_J_idle}, {"n_g_idle", qubit1.n_g_idle}};
    j["qubit2"] = {{"E_C", qubit2.E_C}, {"E_J_idle", qubit2.E_J_idle}, {"n_g_idle", qubit2.n_g_idle}};
    j["coupling"] = {{"kind", coupling.kind == CouplingKind::Josephson ? "josephson" : "capacitive"},
                     {"E_cc", coupling.E_cc},
                     {"E_JJ_idle", coupling.E_JJ_idle}};
    j["gate"] = gate == GateKind::JJPlus ? "jj_plus"
               : gate == GateKind::JJMinus ? "jj_minus" : "cc";
    j["auto_operating_point"] = auto_operating_point;
    j["grid"] = {{"n_steps", grid.n_steps}, {"tau", grid.tau}};
    j["krotov"] = {{"lambda0", krotov.lambda0},
                   {"max_iters", krotov.max_iters},
                   {"target_error", krotov.target_error},
                   {"stall_tolerance", krotov.stall_tolerance},
                   {"stall_window", krotov.stall_window},
                   {"functional", krotov.functional == KrotovFunctional::TraceGlobalPhase
                                      ? "trace_global_phase"
                                      : "per_state"}};
    if (noise) {
        j["noise"] = {{"A", noise->A},
                      {"gamma_min", noise->gamma_min},
                      {"gamma_max", noise->gamma_max},
                      {"n_fluctuators", noise->n_fluctuators},
                      {"realizations", noise->realizations}};
    }
    if (!sweep.empty()) j["sweep"] = sweep;
    if (!pulse_file.empty()) j["pulse_file"] = pulse_file;
    return j;
}

} // namespace qoc

#endif
