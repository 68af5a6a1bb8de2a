#ifndef QOC_SPECTRAL_HPP
#define QOC_SPECTRAL_HPP

#include <algorithm>
#include <vector>

#include "qoc/dft.hpp"
#include "qoc/fidelity.hpp"
#include "qoc/krotov.hpp"
#include "qoc/pulse.hpp"
#include "qoc/types.hpp"

namespace qoc {

// ---------------------------------------------------------------------------
// Band-limiting of optimized pulses: a brick-wall cutoff in the discrete
// Fourier domain models a waveform generator of finite bandwidth.
// Frequency convention: bin k of an n-sample pulse over [0, tau) carries
// angular frequency omega = 2 pi k~ / tau with k~ = k for k <= n/2 and
// k - n above (negative frequencies); bins with |omega| > omega_c are zeroed.
// ---------------------------------------------------------------------------

/// Hard low-pass of every field: coefficients strictly above the cutoff are
/// removed, conjugate-symmetric pairs together, so samples stay real (the
/// tiny imaginary residue of the inverse transform is discarded). Endpoint
/// values are not re-pinned; any boundary drift is the caller's to inspect.
inline PulseSet lowpass(const PulseSet& pulses, double omega_c) {
    if (omega_c < 0.0) throw config_error("omega_c must be non-negative");
    const int n = pulses.grid.n_steps;
    const double tau = pulses.grid.tau;
    PulseSet out;
    out.grid = pulses.grid;
    for (const auto& [id, samples] : pulses.fields) {
        std::vector<Complex> x(n);
        for (int k = 0; k < n; ++k) x[k] = samples[k];
        std::vector<Complex> spectrum = dft_forward(x);
        for (int k = 0; k < n; ++k) {
            const int k_signed = (k <= n / 2) ? k : k - n;
            const double omega = 2.0 * pi * std::abs(k_signed) / tau;
            if (omega > omega_c) spectrum[k] = 0.0;
        }
        const std::vector<Complex> filtered = dft_inverse(spectrum);
        RealVector result(n);
        for (int k = 0; k < n; ++k) result(k) = filtered[k].real();
        out.fields.emplace_back(id, std::move(result));
    }
    return out;
}

/// Largest drift of any field's endpoint samples introduced by filtering.
inline double boundary_drift(const PulseSet& original, const PulseSet& filtered) {
    double drift = 0.0;
    const int n = original.grid.n_steps;
    for (const auto& [id, samples] : original.fields) {
        const RealVector& f = filtered.samples(id);
        drift = std::max(drift, std::abs(f(0) - samples(0)));
        drift = std::max(drift, std::abs(f(n - 1) - samples(n - 1)));
    }
    return drift;
}

struct CutoffPoint {
    double omega_c = 0.0;
    GateError error;
    double boundary_drift = 0.0;
};

/// Gate error as a function of the pulse spectral cutoff, plus the unfiltered
/// reference evaluated through the identical path.
struct CutoffSweep {
    std::vector<CutoffPoint> points; // in ascending cutoff order
    GateError reference;             // unfiltered
};

inline CutoffSweep cutoff_sweep(const ControlProblem& problem, const PulseSet& pulses,
                                const GateTarget& target, std::vector<double> cutoffs) {
    if (!std::is_sorted(cutoffs.begin(), cutoffs.end()) ||
        std::adjacent_find(cutoffs.begin(), cutoffs.end()) != cutoffs.end())
        throw config_error("cutoffs must be strictly increasing");
    CutoffSweep sweep;
    sweep.reference = evaluate_problem(problem, problem.channels_from(pulses), target);
    for (double omega_c : cutoffs) {
        const PulseSet filtered = lowpass(pulses, omega_c);
        CutoffPoint point;
        point.omega_c = omega_c;
        point.error = evaluate_problem(problem, problem.channels_from(filtered), target);
        point.boundary_drift = boundary_drift(pulses, filtered);
        sweep.points.push_back(point);
    }
    return sweep;
}

} // namespace qoc

#endif
