#ifndef QOC_FIDELITY_HPP
#define QOC_FIDELITY_HPP

#include <algorithm>

#include "qoc/gate_target.hpp"
#include "qoc/types.hpp"

namespace qoc {

/// Gate error and worst-case leakage out of the computational subspace.
struct GateError {
    double epsilon = 0.0;     // in [0, 1]
    double leakage_max = 0.0; // in [0, 1]

    double fidelity() const { return 1.0 - epsilon; }
};

enum class ErrorConvention {
    ModulusNormalized, // 1 - |Tr(G^dag U~)| / 4, global-phase invariant (default)
    RealPart,          // 1 - Re Tr(G^dag U~) / 4, phase sensitive
};

/// Restrict the full evolution to the computational subspace:
/// U~ = B^dag U B with B the embedding. Sub-unitary whenever leakage occurs.
inline Eigen::Matrix4cd project_computational(const Matrix& u, const GateTarget& target) {
    if (u.rows() != target.embedding.rows())
        throw input_error("propagator dimension does not match the gate embedding");
    return target.embedding.adjoint() * u * target.embedding;
}

/// Error of a projected 4x4 evolution against the target matrix.
inline double epsilon_of(const Eigen::Matrix4cd& u_tilde, const GateTarget& target,
                         ErrorConvention convention = ErrorConvention::ModulusNormalized) {
    const Complex overlap = (target.matrix.adjoint() * u_tilde).trace();
    double eps = 1.0;
    switch (convention) {
        case ErrorConvention::ModulusNormalized: eps = 1.0 - std::abs(overlap) / 4.0; break;
        case ErrorConvention::RealPart: eps = 1.0 - overlap.real() / 4.0; break;
    }
    return std::clamp(eps, 0.0, 1.0);
}

/// Full report from a D^2 x D^2 propagator: error plus the worst leakage over
/// the four computational input states (1 - ||B^dag U B e_k||^2).
inline GateError gate_error(const Matrix& u, const GateTarget& target,
                            ErrorConvention convention = ErrorConvention::ModulusNormalized) {
    const Eigen::Matrix4cd u_tilde = project_computational(u, target);
    GateError err;
    err.epsilon = epsilon_of(u_tilde, target, convention);
    for (int k = 0; k < 4; ++k) {
        const double kept = u_tilde.col(k).squaredNorm();
        err.leakage_max = std::max(err.leakage_max, std::clamp(1.0 - kept, 0.0, 1.0));
    }
    return err;
}

/// Error of an already-projected 4x4 matrix (no leakage information).
inline GateError gate_error(const Eigen::Matrix4cd& u_tilde, const GateTarget& target,
                            ErrorConvention convention = ErrorConvention::ModulusNormalized) {
    GateError err;
    err.epsilon = epsilon_of(u_tilde, target, convention);
    return err;
}

} // namespace qoc

#endif
