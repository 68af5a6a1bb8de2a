#ifndef QOC_NOISE_HPP
#define QOC_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "qoc/fidelity.hpp"
#include "qoc/krotov.hpp"
#include "qoc/pulse.hpp"
#include "qoc/rng.hpp"
#include "qoc/types.hpp"

namespace qoc {

// ---------------------------------------------------------------------------
// 1/f gate-charge noise from ensembles of bistable fluctuators.
//
// Each fluctuator is a symmetric telegraph process: state +-1, Poisson switch
// rate gamma, contribution v * state / 2 to the offset charge. Switch rates
// drawn with density proportional to 1/gamma over [gamma_min, gamma_max]
// superpose Lorentzians into a one-sided power spectrum S(omega) = A/omega
// across the rate window. The two qubits carry independent ensembles.
// ---------------------------------------------------------------------------

struct NoiseConfig {
    double A = 1e-5;          // one-sided spectral amplitude, S(omega) = A/omega
    double gamma_min = 0.0;   // switching-rate window; 0 means derive from tau
    double gamma_max = 0.0;
    int n_fluctuators = 200;  // per qubit
    std::uint64_t seed = 1;
    int realizations = 100;

    void validate() const {
        if (A < 0.0) throw config_error("noise amplitude A must be non-negative");
        if (gamma_min != 0.0 || gamma_max != 0.0) {
            if (!(gamma_min > 0.0 && gamma_max > gamma_min))
                throw config_error("require 0 < gamma_min < gamma_max");
        }
        if (n_fluctuators < 1) throw config_error("n_fluctuators must be at least 1");
        if (realizations < 1) throw config_error("realizations must be at least 1");
    }

    /// Default switching window: two decades log-centered on the gate
    /// frequency 1/tau.
    NoiseConfig resolved_for(double tau) const {
        NoiseConfig out = *this;
        if (out.gamma_min == 0.0 && out.gamma_max == 0.0) {
            out.gamma_min = 0.1 / tau;
            out.gamma_max = 10.0 / tau;
        }
        out.validate();
        return out;
    }
};

struct Fluctuator {
    double gamma = 0.0; // switching rate
    double v = 0.0;     // coupling amplitude
    int state = 1;      // +-1
};

struct FluctuatorEnsemble {
    std::vector<Fluctuator> fluctuators;
};

/// Coupling amplitude reproducing the configured spectrum. Summing the
/// one-sided telegraph Lorentzians 2 v^2 gamma / (4 gamma^2 + omega^2) over
/// the 1/gamma rate density gives S(omega) ~ pi n v^2 / (2 L omega) inside
/// the window, L = ln(gamma_max/gamma_min); matching A/omega fixes
/// v^2 = 2 A L / (pi n).
inline double fluctuator_coupling(const NoiseConfig& cfg) {
    const double log_span = std::log(cfg.gamma_max / cfg.gamma_min);
    return std::sqrt(2.0 * cfg.A * log_span / (pi * cfg.n_fluctuators));
}

/// Draw an ensemble for one qubit. Rates use the inverse CDF of the 1/gamma
/// density; initial states are equilibrium (+-1 equiprobable). Deterministic
/// in (cfg.seed, qubit_index, realization).
inline FluctuatorEnsemble sample_ensemble(const NoiseConfig& cfg, int qubit_index,
                                          std::uint64_t realization = 0) {
    cfg.validate();
    if (!(cfg.gamma_min > 0.0))
        throw config_error("switching-rate window not resolved (call resolved_for)");
    Rng rng(child_seed(cfg.seed, RngStream::EnsembleRates,
                       static_cast<std::uint64_t>(qubit_index), realization));
    const double v = fluctuator_coupling(cfg);
    const double ratio = cfg.gamma_max / cfg.gamma_min;
    FluctuatorEnsemble ensemble;
    ensemble.fluctuators.resize(cfg.n_fluctuators);
    for (auto& f : ensemble.fluctuators) {
        f.gamma = cfg.gamma_min * std::pow(ratio, rng.uniform());
        f.v = v;
        f.state = rng.uniform() < 0.5 ? -1 : 1;
    }
    return ensemble;
}

/// Telegraph trajectory on the propagation grid: every fluctuator flips per
/// segment with probability gamma dt, and the offset charge of segment k is
/// sum_j v_j state_j(t_k) / 2 with the states before any flip at k = 0.
inline std::vector<double> trajectory(const FluctuatorEnsemble& ensemble,
                                      const TimeGrid& grid, std::uint64_t seed) {
    grid.validate();
    const double dt = grid.dt();
    for (const auto& f : ensemble.fluctuators) {
        if (f.gamma * dt >= 0.1)
            throw config_error("gamma_max * dt = " + std::to_string(f.gamma * dt) +
                               " >= 0.1; refine the grid or narrow the rate window");
    }
    Rng rng(seed);
    std::vector<Fluctuator> fl = ensemble.fluctuators;
    std::vector<double> dng(grid.n_steps, 0.0);
    for (int k = 0; k < grid.n_steps; ++k) {
        double sum = 0.0;
        for (auto& f : fl) sum += f.v * f.state;
        dng[k] = 0.5 * sum;
        if (k + 1 < grid.n_steps) {
            for (auto& f : fl)
                if (rng.uniform() < f.gamma * dt) f.state = -f.state;
        }
    }
    return dng;
}

struct NoisyErrorReport {
    double mean_epsilon = 0.0;
    double stderr_epsilon = 0.0; // sample standard deviation / sqrt(M)
    int realizations = 0;
    std::vector<double> epsilons;

    void finalize() {
        realizations = static_cast<int>(epsilons.size());
        double sum = 0.0;
        for (double e : epsilons) sum += e;
        mean_epsilon = sum / realizations;
        if (realizations > 1) {
            double ss = 0.0;
            for (double e : epsilons) ss += (e - mean_epsilon) * (e - mean_epsilon);
            stderr_epsilon = std::sqrt(ss / (realizations - 1)) /
                             std::sqrt(static_cast<double>(realizations));
        }
    }
};

/// Per-qubit offset-charge trajectories for one noise realization.
inline std::pair<std::vector<double>, std::vector<double>> sample_noise_offsets(
    const NoiseConfig& cfg, const TimeGrid& grid, std::uint64_t realization) {
    const FluctuatorEnsemble e1 = sample_ensemble(cfg, 1, realization);
    const FluctuatorEnsemble e2 = sample_ensemble(cfg, 2, realization);
    return {trajectory(e1, grid, child_seed(cfg.seed, RngStream::Trajectory, 1, realization)),
            trajectory(e2, grid, child_seed(cfg.seed, RngStream::Trajectory, 2, realization))};
}

/// Monte-Carlo average of the gate error under charge noise: each realization
/// re-samples both qubits' ensembles and trajectories, shifts the gate
/// charges segment by segment, and re-propagates. Realizations are seeded
/// independently, so they may be evaluated in any order or in parallel; this
/// serial reference accumulates them in index order.
inline NoisyErrorReport noisy_gate_error(const ControlProblem& problem,
                                         const std::vector<RealVector>& x,
                                         const GateTarget& target, const NoiseConfig& cfg_in) {
    const NoiseConfig cfg = cfg_in.resolved_for(problem.grid().tau);
    NoisyErrorReport report;
    report.epsilons.resize(cfg.realizations);
    for (int r = 0; r < cfg.realizations; ++r) {
        const auto [dng1, dng2] = sample_noise_offsets(cfg, problem.grid(), r);
        report.epsilons[r] =
            evaluate_problem(problem, x, target, ChargeOffsets{dng1, dng2}).epsilon;
    }
    report.finalize();
    return report;
}

inline NoisyErrorReport noisy_gate_error(const ControlProblem& problem,
                                         const PulseSet& pulses, const GateTarget& target,
                                         const NoiseConfig& cfg) {
    return noisy_gate_error(problem, problem.channels_from(pulses), target, cfg);
}

} // namespace qoc

#endif
