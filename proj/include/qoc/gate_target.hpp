#ifndef QOC_GATE_TARGET_HPP
#define QOC_GATE_TARGET_HPP

#include "qoc/charge_basis.hpp"
#include "qoc/types.hpp"

namespace qoc {

enum class GateKind { JJPlus, JJMinus, CC };

inline const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::JJPlus: return "G_JJ(+i)";
        case GateKind::JJMinus: return "G_JJ(-i)";
        case GateKind::CC: return "G_cc";
    }
    return "?";
}

/// A 4x4 target unitary together with the embedding of its computational
/// basis into the full two-qubit charge space.
///
/// Embedding columns follow the gate's own basis ordering:
///   coupler-junction gates: {|++>, |+->, |-+>, |-->},  |+-_> = (|0> +- |1>)/sqrt(2)
///   capacitive gate:        {|11>, |10>, |01>, |00>}
struct GateTarget {
    GateKind kind;
    Eigen::Matrix4cd matrix;
    Matrix embedding; // D^2 x 4, orthonormal columns
};

namespace detail {

inline Vector charge_product_state(const ChargeBasis& basis, int n1, int n2) {
    const int d = basis.dim();
    Vector v = Vector::Zero(d * d);
    v(basis.index_of(n1) * d + basis.index_of(n2)) = 1.0;
    return v;
}

inline Vector plus_minus_state(const ChargeBasis& basis, int sign1, int sign2) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const int d = basis.dim();
    Vector q1 = Vector::Zero(d), q2 = Vector::Zero(d);
    q1(basis.index_of(0)) = inv_sqrt2;
    q1(basis.index_of(1)) = sign1 * inv_sqrt2;
    q2(basis.index_of(0)) = inv_sqrt2;
    q2(basis.index_of(1)) = sign2 * inv_sqrt2;
    Vector v = Vector::Zero(d * d);
    for (int i1 = 0; i1 < d; ++i1)
        for (int i2 = 0; i2 < d; ++i2) v(i1 * d + i2) = q1(i1) * q2(i2);
    return v;
}

} // namespace detail

/// Build a gate target in the given charge window.
inline GateTarget make_gate_target(GateKind kind, const ChargeBasis& basis) {
    basis.validate();
    GateTarget target;
    target.kind = kind;
    target.embedding = Matrix::Zero(basis.dim() * basis.dim(), 4);

    if (kind == GateKind::CC) {
        // Conditional flip of qubit 2 when qubit 1 holds a pair, written in
        // the charge product basis {|11>, |10>, |01>, |00>}.
        target.matrix << 0, 1, 0, 0,
                         1, 0, 0, 0,
                         0, 0, 1, 0,
                         0, 0, 0, 1;
        target.embedding.col(0) = detail::charge_product_state(basis, 1, 1);
        target.embedding.col(1) = detail::charge_product_state(basis, 1, 0);
        target.embedding.col(2) = detail::charge_product_state(basis, 0, 1);
        target.embedding.col(3) = detail::charge_product_state(basis, 0, 0);
    } else {
        const Complex phase = (kind == GateKind::JJPlus) ? imag_unit : -imag_unit;
        target.matrix << 0, 0, 0, 1,
                         0, phase, 0, 0,
                         0, 0, phase, 0,
                         1, 0, 0, 0;
        target.embedding.col(0) = detail::plus_minus_state(basis, +1, +1);
        target.embedding.col(1) = detail::plus_minus_state(basis, +1, -1);
        target.embedding.col(2) = detail::plus_minus_state(basis, -1, +1);
        target.embedding.col(3) = detail::plus_minus_state(basis, -1, -1);
    }
    return target;
}

} // namespace qoc

#endif
