#ifndef QOC_PROPAGATE_HPP
#define QOC_PROPAGATE_HPP

#include <cmath>
#include <span>
#include <vector>

#include "qoc/hamiltonian.hpp"
#include "qoc/pulse.hpp"
#include "qoc/types.hpp"

namespace qoc {

/// exp(-i H dt) of a complex Hermitian operator through its spectral
/// decomposition. Exactly unitary up to roundoff for any step size.
inline Matrix step_exponential(const Matrix& h, double dt) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigensolver failed on a " + std::to_string(h.rows()) +
                              "x" + std::to_string(h.cols()) + " Hamiltonian");
    Vector phases(solver.eigenvalues().size());
    for (int i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -solver.eigenvalues()(i) * dt));
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

/// Spectral data of one segment Hamiltonian. Our Hamiltonians are real
/// symmetric in the charge representation, so the eigenbasis is real; keeping
/// it lets backward sweeps and control derivatives run on the cheap.
struct SegmentEigens {
    RealMatrix vectors;   // orthogonal eigenbasis, columns
    RealVector values;
    Vector phases;        // exp(-i values dt)
    Matrix unitary;       // exp(-i H dt)
};

/// Segment exponential of a real symmetric Hamiltonian.
inline void step_exponential_real_into(const RealMatrix& h, double dt, SegmentEigens& seg) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigensolver failed on a " + std::to_string(h.rows()) +
                              "x" + std::to_string(h.cols()) + " Hamiltonian");
    seg.vectors = solver.eigenvectors();
    seg.values = solver.eigenvalues();
    const int d = static_cast<int>(seg.values.size());
    seg.phases.resize(d);
    RealMatrix wre = seg.vectors;
    RealMatrix wim = seg.vectors;
    for (int i = 0; i < d; ++i) {
        const double c = std::cos(seg.values(i) * dt);
        const double s = -std::sin(seg.values(i) * dt);
        seg.phases(i) = Complex(c, s);
        wre.col(i) *= c;
        wim.col(i) *= s;
    }
    seg.unitary.resize(d, d);
    seg.unitary.real() = wre * seg.vectors.transpose();
    seg.unitary.imag() = wim * seg.vectors.transpose();
}

inline SegmentEigens step_exponential_eigens(const RealMatrix& h, double dt) {
    SegmentEigens seg;
    step_exponential_real_into(h, dt, seg);
    return seg;
}

/// Total evolution operator, with optional per-segment intermediates.
struct Propagator {
    Matrix unitary; // U(tau, 0)
    std::vector<SegmentEigens> segments; // only when requested
};

struct PropagateOptions {
    bool keep_segments = false;
};

/// Per-segment gate-charge offsets added on top of the pulse values
/// (classical noise enters here). Empty spans mean no offset.
struct ChargeOffsets {
    std::span<const double> dng1;
    std::span<const double> dng2;
};

/// Evolve under piecewise-constant pulses: U = U_{N-1} ... U_1 U_0 with
/// U_k = exp(-i H(values at segment k) dt), latest factor leftmost.
inline Propagator propagate(const TwoQubitSystem& system, const PulseSet& pulses,
                            const PropagateOptions& options = {},
                            const ChargeOffsets& offsets = {}) {
    pulses.validate();
    const int n = pulses.grid.n_steps;
    const double dt = pulses.grid.dt();
    if (!offsets.dng1.empty() && static_cast<int>(offsets.dng1.size()) != n)
        throw input_error("dng1 offset length does not match the grid");
    if (!offsets.dng2.empty() && static_cast<int>(offsets.dng2.size()) != n)
        throw input_error("dng2 offset length does not match the grid");

    const ControlValues idle = system.idle_values();
    Propagator result;
    result.unitary = Matrix::Identity(system.dim(), system.dim());
    if (options.keep_segments) result.segments.reserve(n);

    RealMatrix h;
    SegmentEigens seg;
    for (int k = 0; k < n; ++k) {
        ControlValues v = pulses.values_at(idle, k);
        if (!offsets.dng1.empty()) v.ng1 += offsets.dng1[k];
        if (!offsets.dng2.empty()) v.ng2 += offsets.dng2[k];
        system.hamiltonian_real_into(v, h);
        step_exponential_real_into(h, dt, seg);
        result.unitary = seg.unitary * result.unitary;
        if (options.keep_segments) result.segments.push_back(seg);
    }
    return result;
}

} // namespace qoc

#endif
