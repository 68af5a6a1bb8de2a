#ifndef QOC_KROTOV_HPP
#define QOC_KROTOV_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qoc/fidelity.hpp"
#include "qoc/gate_target.hpp"
#include "qoc/hamiltonian.hpp"
#include "qoc/propagate.hpp"
#include "qoc/pulse.hpp"
#include "qoc/rng.hpp"
#include "qoc/schemes.hpp"
#include "qoc/types.hpp"

namespace qoc {

// ---------------------------------------------------------------------------
// Control problem: which knobs move, how they are tied together, and where
// they must start and end.
// ---------------------------------------------------------------------------

/// One optimizable pulse. A channel may drive several Hamiltonian parameters
/// at once with fixed relative coefficients (tied controls); the stored pulse
/// is the shared non-negative magnitude, the coefficients carry the signs.
struct ControlChannel {
    std::string name;
    std::vector<std::pair<ControlId, double>> couplings;
    double boundary_value = 0.0; // value pinned at t = 0 and t = tau
    // Updates never push below this rail; Josephson drives are unipolar.
    double min_value = std::numeric_limits<double>::lowest();
};

class ControlProblem {
public:
    ControlProblem(TwoQubitSystem system, TimeGrid grid, ControlValues fixed,
                   std::vector<ControlChannel> channels)
        : system_(std::move(system)), grid_(grid), fixed_(fixed),
          channels_(std::move(channels)) {
        grid_.validate();
        if (channels_.empty()) throw config_error("control problem has no channels");
    }

    const TwoQubitSystem& system() const { return system_; }
    const TimeGrid& grid() const { return grid_; }
    const ControlValues& fixed_values() const { return fixed_; }
    const std::vector<ControlChannel>& channels() const { return channels_; }
    int n_channels() const { return static_cast<int>(channels_.size()); }

    /// Hamiltonian parameter values at segment k given channel samples.
    ControlValues values_at(const std::vector<RealVector>& x, int k) const {
        ControlValues v = fixed_;
        for (int c = 0; c < n_channels(); ++c) {
            for (const auto& [id, coeff] : channels_[c].couplings) {
                const double value = coeff * x[c][k];
                switch (id) {
                    case ControlId::EJ1: v.ej1 = value; break;
                    case ControlId::EJ2: v.ej2 = value; break;
                    case ControlId::EJJ: v.ejj = value; break;
                    case ControlId::NG1: v.ng1 = value; break;
                    case ControlId::NG2: v.ng2 = value; break;
                }
            }
        }
        return v;
    }

    /// dH/d(channel value) at the given parameter values (chain rule over the
    /// channel's couplings), using caller-provided workspaces.
    void channel_derivative_real_into(int c, const ControlValues& v, RealMatrix& scratch,
                                      RealMatrix& out) const {
        out.setZero(system_.dim(), system_.dim());
        for (const auto& [id, coeff] : channels_[c].couplings) {
            system_.control_derivative_real_into(id, v, scratch);
            out += coeff * scratch;
        }
    }

    Matrix channel_derivative(int c, const ControlValues& v) const {
        RealMatrix scratch, out;
        channel_derivative_real_into(c, v, scratch, out);
        return out.cast<Complex>();
    }

    /// Channel samples -> exportable pulse set. Fields record the magnitude
    /// |coeff| * x for every driven control id, so tied ids carry equal arrays.
    PulseSet to_pulse_set(const std::vector<RealVector>& x) const {
        PulseSet p;
        p.grid = grid_;
        for (int c = 0; c < n_channels(); ++c)
            for (const auto& [id, coeff] : channels_[c].couplings)
                p.set(id, std::abs(coeff) * x[c]);
        return p;
    }

    /// Pulse set -> channel samples. Tied ids must carry consistent arrays.
    std::vector<RealVector> channels_from(const PulseSet& pulses) const {
        if (pulses.grid.n_steps != grid_.n_steps ||
            std::abs(pulses.grid.tau - grid_.tau) > 1e-12 * grid_.tau)
            throw input_error("pulse grid does not match the control problem");
        std::vector<RealVector> x;
        x.reserve(channels_.size());
        for (const auto& channel : channels_) {
            RealVector shared;
            for (const auto& [id, coeff] : channel.couplings) {
                RealVector candidate = pulses.samples(id) / std::abs(coeff);
                if (shared.size() == 0) {
                    shared = candidate;
                } else if ((candidate - shared).cwiseAbs().maxCoeff() >
                           1e-9 * (1.0 + shared.cwiseAbs().maxCoeff())) {
                    throw input_error("tied fields of channel '" + channel.name +
                                      "' carry inconsistent samples");
                }
            }
            x.push_back(std::move(shared));
        }
        return x;
    }

private:
    TwoQubitSystem system_;
    TimeGrid grid_;
    ControlValues fixed_;
    std::vector<ControlChannel> channels_;
};

/// Evolution under channel samples, optionally with per-segment charge noise.
inline Propagator propagate_problem(const ControlProblem& problem,
                                    const std::vector<RealVector>& x,
                                    const PropagateOptions& options = {},
                                    const ChargeOffsets& offsets = {}) {
    const int n = problem.grid().n_steps;
    const double dt = problem.grid().dt();
    Propagator result;
    result.unitary = Matrix::Identity(problem.system().dim(), problem.system().dim());
    if (options.keep_segments) result.segments.reserve(n);
    RealMatrix h;
    SegmentEigens seg;
    for (int k = 0; k < n; ++k) {
        ControlValues v = problem.values_at(x, k);
        if (!offsets.dng1.empty()) v.ng1 += offsets.dng1[k];
        if (!offsets.dng2.empty()) v.ng2 += offsets.dng2[k];
        problem.system().hamiltonian_real_into(v, h);
        step_exponential_real_into(h, dt, seg);
        result.unitary = seg.unitary * result.unitary;
        if (options.keep_segments) result.segments.push_back(seg);
    }
    return result;
}

inline GateError evaluate_problem(const ControlProblem& problem,
                                  const std::vector<RealVector>& x,
                                  const GateTarget& target,
                                  const ChargeOffsets& offsets = {}) {
    return gate_error(propagate_problem(problem, x, {}, offsets).unitary, target);
}

// ---------------------------------------------------------------------------
// Preset problems
// ---------------------------------------------------------------------------

/// Single shared channel driving all three Josephson couplings with the
/// wiring signs of the analytic scheme; gate charges stay parked.
inline ControlProblem make_jj_problem(const TwoQubitSystem& system, const TimeGrid& grid,
                                      GateKind kind = GateKind::JJPlus) {
    const JJSignConvention conv = jj_signs_for(kind);
    ControlChannel shared;
    shared.name = "EJ_shared";
    shared.couplings = {{ControlId::EJ1, conv.s1},
                        {ControlId::EJ2, conv.s2},
                        {ControlId::EJJ, conv.sjj}};
    shared.boundary_value = system.coupling().E_JJ_idle;
    shared.min_value = 0.0;
    return ControlProblem(system, grid, system.idle_values(), {shared});
}

/// Two independent gate-charge channels; Josephson couplings stay fixed.
inline ControlProblem make_cc_problem(const TwoQubitSystem& system, const TimeGrid& grid) {
    ControlChannel ng1{"NG1", {{ControlId::NG1, +1.0}}, system.qubit1().n_g_idle};
    ControlChannel ng2{"NG2", {{ControlId::NG2, +1.0}}, system.qubit2().n_g_idle};
    return ControlProblem(system, grid, system.idle_values(), {ng1, ng2});
}

// ---------------------------------------------------------------------------
// Krotov iteration
// ---------------------------------------------------------------------------

enum class KrotovFunctional {
    TraceGlobalPhase, // phase-coherent over the four basis states (default)
    PerState,         // literal single-state rule applied to each input
};

struct KrotovConfig {
    double lambda0 = 100.0;       // update weight scale, lambda(t) = lambda0 / s(t)
    int max_iters = 2000;
    double target_error = 1e-4;
    double stall_tolerance = 1e-10; // minimum relative improvement per iteration
    int stall_window = 50;          // consecutive stalled iterations before stopping
    KrotovFunctional functional = KrotovFunctional::TraceGlobalPhase;
    RealVector shape;               // optional custom s(t) samples, endpoints clamped to 0

    void validate() const {
        if (!(lambda0 > 0.0)) throw config_error("lambda0 must be positive");
        if (max_iters < 0) throw config_error("max_iters must be non-negative");
        if (!(target_error > 0.0 && target_error < 1.0))
            throw config_error("target_error must lie in (0, 1)");
        if (!(stall_tolerance >= 0.0)) throw config_error("stall_tolerance must be >= 0");
        for (int i = 0; i < shape.size(); ++i)
            if (shape[i] < 0.0 || shape[i] > 1.0)
                throw config_error("shape samples must lie in [0, 1]");
    }
};

enum class TerminationReason { TargetReached, Stalled, MaxIters };

inline const char* termination_name(TerminationReason r) {
    switch (r) {
        case TerminationReason::TargetReached: return "target_reached";
        case TerminationReason::Stalled: return "stalled";
        case TerminationReason::MaxIters: return "max_iters";
    }
    return "?";
}

struct OptResult {
    PulseSet final_pulses;
    std::vector<double> error_history; // entry 0: initial error, then one per iteration
    double epsilon_min = 1.0;
    int iterations_run = 0;
    TerminationReason terminated_by = TerminationReason::MaxIters;
};

namespace detail {

/// Endpoint-pinning profile: sin^2(pi t/tau) sampled at segment midpoints,
/// first and last segments clamped to zero so boundary values never move.
inline RealVector default_shape(const TimeGrid& grid) {
    RealVector s(grid.n_steps);
    for (int k = 0; k < grid.n_steps; ++k) {
        const double t = (k + 0.5) * grid.dt();
        const double w = std::sin(pi * t / grid.tau);
        s(k) = w * w;
    }
    s(0) = 0.0;
    s(grid.n_steps - 1) = 0.0;
    return s;
}

/// chi/psi overlap data of one segment in its Hamiltonian eigenbasis.
///
/// The exact derivative of the segment propagator along a Hermitian direction
/// D is dU = V (Gamma o (V^T D V)) V^T with
///   Gamma_pq = (e^{-i l_p dt} - e^{-i l_q dt}) / (l_p - l_q),
/// so the update ingredient z = sum_k <chi_k| dU |psi_k> factorizes through
/// S_pq = sum_k conj(V^T chi_k)_p (V^T psi_k)_q, shared by all channels.
/// Re(z)/dt recovers the continuous-time rule Im<chi|D|psi> as dt -> 0.
class SegmentOverlaps {
public:
    void build(const SegmentEigens& seg, double dt, const std::vector<Vector>& chi_end,
               const std::vector<Vector>& psi_start) {
        seg_ = &seg;
        dt_ = dt;
        const int d = static_cast<int>(seg.values.size());
        s_.setZero(d, d);
        Vector a(d), b(d);
        for (std::size_t k = 0; k < chi_end.size(); ++k) {
            a.real() = seg.vectors.transpose() * chi_end[k].real();
            a.imag() = seg.vectors.transpose() * chi_end[k].imag();
            b.real() = seg.vectors.transpose() * psi_start[k].real();
            b.imag() = seg.vectors.transpose() * psi_start[k].imag();
            s_ += a.conjugate() * b.transpose();
        }
    }

    /// z = sum_k <chi_k| dU(direction) |psi_k>, exact in dt.
    Complex derivative(const RealMatrix& direction, RealMatrix& scratch) const {
        const int d = static_cast<int>(seg_->values.size());
        scratch.noalias() = seg_->vectors.transpose() * direction * seg_->vectors;
        Complex z = 0.0;
        for (int p = 0; p < d; ++p) {
            for (int q = 0; q < d; ++q) {
                const double gap = seg_->values(p) - seg_->values(q);
                Complex gamma;
                if (std::abs(gap) * dt_ > 1e-6) {
                    gamma = (seg_->phases(p) - seg_->phases(q)) / gap;
                } else {
                    gamma = Complex(0.0, -0.5 * dt_) * (seg_->phases(p) + seg_->phases(q));
                }
                z += gamma * scratch(p, q) * s_(p, q);
            }
        }
        return z;
    }

private:
    const SegmentEigens* seg_ = nullptr;
    double dt_ = 0.0;
    Matrix s_;
};

/// Terminal costates for the chosen functional.
inline std::vector<Vector> terminal_costates(const std::vector<Vector>& psi_final,
                                             const std::vector<Vector>& targets,
                                             KrotovFunctional functional) {
    std::vector<Vector> chi(4);
    if (functional == KrotovFunctional::TraceGlobalPhase) {
        Complex c = 0.0;
        for (int k = 0; k < 4; ++k) c += targets[k].dot(psi_final[k]);
        c /= 4.0;
        for (int k = 0; k < 4; ++k) chi[k] = c * targets[k];
    } else {
        for (int k = 0; k < 4; ++k) chi[k] = targets[k].dot(psi_final[k]) * targets[k];
    }
    return chi;
}

inline double epsilon_from_states(const std::vector<Vector>& psi_final,
                                  const std::vector<Vector>& targets) {
    Complex c = 0.0;
    for (int k = 0; k < 4; ++k) c += targets[k].dot(psi_final[k]);
    return 1.0 - std::abs(c) / 4.0;
}

} // namespace detail

/// Krotov iteration for a gate target: forward propagation of the four
/// computational inputs, backward propagation of the costates, and a
/// sequential sweep that updates every channel segment by segment with
/// immediate feedback. Endpoint segments never move (shape is zero there),
/// so pulses honor their boundary values exactly.
inline OptResult krotov_optimize(const ControlProblem& problem, const PulseSet& init,
                                 const GateTarget& target, const KrotovConfig& cfg) {
    cfg.validate();
    const TimeGrid& grid = problem.grid();
    const int n = grid.n_steps;
    const double dt = grid.dt();
    const int n_channels = problem.n_channels();

    std::vector<RealVector> x = problem.channels_from(init);
    for (int c = 0; c < n_channels; ++c) {
        const double boundary = problem.channels()[c].boundary_value;
        const double scale = 1.0 + std::abs(boundary);
        if (std::abs(x[c][0] - boundary) > 1e-9 * scale ||
            std::abs(x[c][n - 1] - boundary) > 1e-9 * scale)
            throw input_error("initial pulse violates the boundary value of channel '" +
                              problem.channels()[c].name + "'");
        x[c][0] = boundary;
        x[c][n - 1] = boundary;
    }

    RealVector shape = cfg.shape.size() ? cfg.shape : detail::default_shape(grid);
    if (shape.size() != n) throw config_error("shape sample count does not match the grid");
    shape(0) = 0.0;
    shape(n - 1) = 0.0;

    // Targets and initial states embedded in the full space.
    std::vector<Vector> targets(4), initial(4);
    for (int k = 0; k < 4; ++k) {
        initial[k] = target.embedding.col(k);
        targets[k] = target.embedding * target.matrix.col(k);
    }

    // Initial forward pass, keeping states and segment eigendata.
    std::vector<SegmentEigens> segments(n);
    std::vector<std::vector<Vector>> psi_at(n + 1, std::vector<Vector>(4));
    std::vector<Vector> psi = initial;
    psi_at[0] = initial;
    RealMatrix h;
    for (int j = 0; j < n; ++j) {
        problem.system().hamiltonian_real_into(problem.values_at(x, j), h);
        step_exponential_real_into(h, dt, segments[j]);
        for (int k = 0; k < 4; ++k) {
            psi[k] = segments[j].unitary * psi[k];
            psi_at[j + 1][k] = psi[k];
        }
    }

    OptResult result;
    result.error_history.push_back(detail::epsilon_from_states(psi, targets));

    std::vector<std::vector<Vector>> chi_at(n + 1, std::vector<Vector>(4));
    std::vector<RealVector> x_old = x;
    RealMatrix direction, scratch;
    detail::SegmentOverlaps overlaps;
    int stall_count = 0;

    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        if (result.error_history.back() <= cfg.target_error) {
            result.terminated_by = TerminationReason::TargetReached;
            break;
        }

        // Backward pass under the current pulses (reuses cached segment data).
        std::vector<Vector> chi =
            detail::terminal_costates(psi_at[n], targets, cfg.functional);
        chi_at[n] = chi;
        for (int j = n - 1; j >= 0; --j) {
            for (int k = 0; k < 4; ++k) {
                chi[k] = segments[j].unitary.adjoint() * chi[k];
                chi_at[j][k] = chi[k];
            }
        }

        // Forward sweep with immediate feedback: psi runs under the new
        // pulses, chi stays from the backward pass, each segment's update
        // uses the exact propagator derivative at the old sample value.
        x_old = x;
        psi = initial;
        for (int j = 0; j < n; ++j) {
            if (shape(j) != 0.0) {
                const ControlValues v_old = problem.values_at(x_old, j);
                overlaps.build(segments[j], dt, chi_at[j + 1], psi);
                for (int c = 0; c < n_channels; ++c) {
                    problem.channel_derivative_real_into(c, v_old, scratch, direction);
                    const Complex z = overlaps.derivative(direction, scratch);
                    const double delta = shape(j) / cfg.lambda0 * z.real() / dt;
                    if (!std::isfinite(delta))
                        throw numerical_error(
                            "non-finite Krotov update at iteration " +
                            std::to_string(iter + 1) + ", segment " + std::to_string(j) +
                            " (lambda0 too small or grid too coarse)");
                    x[c][j] = std::max(problem.channels()[c].min_value, x[c][j] + delta);
                }
            }
            problem.system().hamiltonian_real_into(problem.values_at(x, j), h);
            step_exponential_real_into(h, dt, segments[j]);
            for (int k = 0; k < 4; ++k) {
                psi[k] = segments[j].unitary * psi[k];
                psi_at[j + 1][k] = psi[k];
            }
        }

        const double eps_prev = result.error_history.back();
        const double eps = detail::epsilon_from_states(psi, targets);
        result.error_history.push_back(eps);

        const double improvement = (eps_prev - eps) / std::max(eps_prev, 1e-300);
        if (improvement < cfg.stall_tolerance) {
            if (++stall_count >= cfg.stall_window) {
                ++iter;
                result.terminated_by = TerminationReason::Stalled;
                break;
            }
        } else {
            stall_count = 0;
        }
    }
    if (iter >= cfg.max_iters) {
        result.terminated_by = result.error_history.back() <= cfg.target_error
                                   ? TerminationReason::TargetReached
                                   : TerminationReason::MaxIters;
    }

    result.final_pulses = problem.to_pulse_set(x);
    result.epsilon_min = result.error_history.back();
    result.iterations_run = iter;
    return result;
}

// ---------------------------------------------------------------------------
// Gradient validation
// ---------------------------------------------------------------------------

struct GradientCheckReport {
    double max_rel_deviation = 0.0;
    int probes = 0;
};

namespace detail {

/// Squared phase-coherent overlap |c|^2 of the propagated computational
/// states with their targets.
inline double functional_value(const ControlProblem& problem,
                               const std::vector<RealVector>& x,
                               const std::vector<Vector>& initial,
                               const std::vector<Vector>& targets) {
    const double dt = problem.grid().dt();
    std::vector<Vector> psi = initial;
    RealMatrix h;
    SegmentEigens seg;
    for (int j = 0; j < problem.grid().n_steps; ++j) {
        problem.system().hamiltonian_real_into(problem.values_at(x, j), h);
        step_exponential_real_into(h, dt, seg);
        for (auto& p : psi) p = seg.unitary * p;
    }
    Complex c = 0.0;
    for (int k = 0; k < 4; ++k) c += targets[k].dot(psi[k]);
    c /= 4.0;
    return std::norm(c);
}

} // namespace detail

/// Compare the analytic update direction (the exact discrete gradient of the
/// squared phase-coherent overlap) against central finite differences of the
/// same functional, probing a deterministic spread of segments per channel.
inline GradientCheckReport gradient_check(const ControlProblem& problem,
                                          const PulseSet& pulses, const GateTarget& target,
                                          int probes_per_channel = 24) {
    const TimeGrid& grid = problem.grid();
    const int n = grid.n_steps;
    const double dt = grid.dt();
    std::vector<RealVector> x = problem.channels_from(pulses);

    std::vector<Vector> targets(4), initial(4);
    for (int k = 0; k < 4; ++k) {
        initial[k] = target.embedding.col(k);
        targets[k] = target.embedding * target.matrix.col(k);
    }

    // Forward pass keeping states and segment eigendata.
    std::vector<SegmentEigens> segments(n);
    std::vector<std::vector<Vector>> psi_at(n + 1, std::vector<Vector>(4));
    psi_at[0] = initial;
    RealMatrix h;
    for (int j = 0; j < n; ++j) {
        problem.system().hamiltonian_real_into(problem.values_at(x, j), h);
        step_exponential_real_into(h, dt, segments[j]);
        for (int k = 0; k < 4; ++k) psi_at[j + 1][k] = segments[j].unitary * psi_at[j][k];
    }

    // Backward costates for the phase-coherent functional; the terminal
    // costates carry the 1/4-normalized mean overlap, so
    // dJ/dg_j = (1/2) Re sum_k <chi_k(t_{j+1})| dU_j |psi_k(t_j)>.
    std::vector<std::vector<Vector>> chi_at(n + 1, std::vector<Vector>(4));
    chi_at[n] = detail::terminal_costates(psi_at[n], targets,
                                          KrotovFunctional::TraceGlobalPhase);
    for (int j = n - 1; j >= 0; --j)
        for (int k = 0; k < 4; ++k)
            chi_at[j][k] = segments[j].unitary.adjoint() * chi_at[j + 1][k];

    std::vector<int> probe_segments;
    const int count = std::min(probes_per_channel, n - 2);
    for (int i = 0; i < count; ++i)
        probe_segments.push_back(1 + static_cast<int>((n - 2) * (i + 0.5) / count));

    GradientCheckReport report;
    std::vector<double> fd_all, an_all;
    detail::SegmentOverlaps overlaps;
    RealMatrix direction, scratch;
    for (int c = 0; c < problem.n_channels(); ++c) {
        for (int j : probe_segments) {
            const ControlValues v = problem.values_at(x, j);
            overlaps.build(segments[j], dt, chi_at[j + 1], psi_at[j]);
            problem.channel_derivative_real_into(c, v, scratch, direction);
            an_all.push_back(0.5 * overlaps.derivative(direction, scratch).real());

            const double h_fd = 1e-5 * (1.0 + std::abs(x[c][j]));
            std::vector<RealVector> xp = x, xm = x;
            xp[c][j] += h_fd;
            xm[c][j] -= h_fd;
            const double jp = detail::functional_value(problem, xp, initial, targets);
            const double jm = detail::functional_value(problem, xm, initial, targets);
            fd_all.push_back((jp - jm) / (2.0 * h_fd));
        }
    }

    double scale = 0.0;
    for (double g : fd_all) scale = std::max(scale, std::abs(g));
    for (std::size_t i = 0; i < fd_all.size(); ++i) {
        const double denom =
            std::max({std::abs(fd_all[i]), std::abs(an_all[i]), 1e-6 * scale, 1e-300});
        report.max_rel_deviation =
            std::max(report.max_rel_deviation, std::abs(fd_all[i] - an_all[i]) / denom);
    }
    report.probes = static_cast<int>(fd_all.size());
    return report;
}

/// Smooth randomized pulse respecting a channel's boundary value: the idle
/// value plus a few low harmonics that vanish at both ends.
inline RealVector random_smooth_pulse(const TimeGrid& grid, double boundary_value,
                                      double relative_amplitude, std::uint64_t seed,
                                      int harmonics = 4) {
    Rng rng(seed);
    std::vector<double> amp(harmonics);
    for (int m = 0; m < harmonics; ++m)
        amp[m] = rng.uniform(-1.0, 1.0) * relative_amplitude / (m + 1);
    RealVector x(grid.n_steps);
    const double scale = std::abs(boundary_value) > 0.0 ? std::abs(boundary_value) : 1.0;
    for (int k = 0; k < grid.n_steps; ++k) {
        const double t = (k + 0.5) * grid.dt();
        double value = boundary_value;
        for (int m = 0; m < harmonics; ++m)
            value += scale * amp[m] * std::sin(pi * (m + 1) * t / grid.tau);
        x(k) = value;
    }
    x(0) = boundary_value;
    x(grid.n_steps - 1) = boundary_value;
    return x;
}

} // namespace qoc

#endif
