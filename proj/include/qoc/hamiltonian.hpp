#ifndef QOC_HAMILTONIAN_HPP
#define QOC_HAMILTONIAN_HPP

#include <string>
#include <vector>

#include "qoc/charge_basis.hpp"
#include "qoc/types.hpp"

namespace qoc {

// Units: hbar = 1, all energies in units of a reference energy (by convention
// the charging energy of qubit 1), time in units of 1/E_ref.

/// Static single-qubit parameters. Idle values are where the qubit rests
/// before and after a gate; time-dependent controls override them.
struct QubitParams {
    double E_C = 1.0;      // charging energy
    double E_J_idle = 0.05; // Josephson coupling magnitude at idle
    double n_g_idle = 0.5; // offset charge at idle

    void validate() const {
        if (!(E_C > 0.0)) throw config_error("E_C must be positive");
        if (E_J_idle < 0.0) throw config_error("E_J_idle must be non-negative");
        if (n_g_idle < 0.0 || n_g_idle > 1.0)
            throw config_error("n_g_idle must lie in [0, 1]");
    }

    /// Charge regime requires E_J << E_C; flag ratios above 1/2.
    bool charge_regime_ok() const { return E_J_idle / E_C <= 0.5; }
};

enum class CouplingKind { Capacitive, Josephson };

/// Inter-qubit coupling element. For the Josephson kind, E_cc is the residual
/// (parasitic) capacitive coupling that remains alongside the coupler junction.
struct CouplingSpec {
    CouplingKind kind = CouplingKind::Josephson;
    double E_cc = 0.0;      // Coulomb coupling energy
    double E_JJ_idle = 0.0; // coupler junction Josephson energy magnitude at idle

    void validate() const {
        if (E_cc < 0.0) throw config_error("E_cc must be non-negative");
        if (kind == CouplingKind::Capacitive && E_JJ_idle != 0.0)
            throw config_error("capacitive coupling admits no E_JJ_idle");
        if (E_JJ_idle < 0.0) throw config_error("E_JJ_idle must be non-negative");
    }
};

/// Instantaneous values of every controllable parameter. Signed: flux-tuned
/// Josephson energies may legitimately be negative.
struct ControlValues {
    double ej1 = 0.0;
    double ej2 = 0.0;
    double ejj = 0.0;
    double ng1 = 0.5;
    double ng2 = 0.5;
};

enum class ControlId { EJ1, EJ2, EJJ, NG1, NG2 };

inline const char* control_name(ControlId id) {
    switch (id) {
        case ControlId::EJ1: return "EJ1";
        case ControlId::EJ2: return "EJ2";
        case ControlId::EJJ: return "EJJ";
        case ControlId::NG1: return "NG1";
        case ControlId::NG2: return "NG2";
    }
    return "?";
}

inline ControlId control_from_name(const std::string& name) {
    if (name == "EJ1") return ControlId::EJ1;
    if (name == "EJ2") return ControlId::EJ2;
    if (name == "EJJ") return ControlId::EJJ;
    if (name == "NG1") return ControlId::NG1;
    if (name == "NG2") return ControlId::NG2;
    throw input_error("unknown control id '" + name + "'");
}

/// Single-island Hamiltonian in the truncated charge basis:
/// diagonal E_C (n - n_g)^2, off-diagonal -E_J/2 between neighboring charges.
inline Matrix build_single_qubit_h(const ChargeBasis& basis, double E_C, double E_J,
                                   double n_g) {
    basis.validate();
    if (!(E_C > 0.0)) throw config_error("E_C must be positive");
    const int d = basis.dim();
    Matrix h = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double dn = basis.charge_at(i) - n_g;
        h(i, i) = E_C * dn * dn;
        if (i + 1 < d) {
            h(i, i + 1) = -0.5 * E_J;
            h(i + 1, i) = -0.5 * E_J;
        }
    }
    return h;
}

/// Coulomb coupling, diagonal in the product charge basis:
/// E_cc (n1 - n_g1)(n2 - n_g2).
inline Matrix build_cc_coupling(const ChargeBasis& basis, double E_cc, double n_g1,
                                double n_g2) {
    basis.validate();
    const int d = basis.dim();
    Matrix h = Matrix::Zero(d * d, d * d);
    for (int i1 = 0; i1 < d; ++i1) {
        for (int i2 = 0; i2 < d; ++i2) {
            const int idx = i1 * d + i2;
            h(idx, idx) =
                E_cc * (basis.charge_at(i1) - n_g1) * (basis.charge_at(i2) - n_g2);
        }
    }
    return h;
}

/// Coupler-junction Hamiltonian: Cooper-pair exchange between the islands,
/// (E_JJ/2) |n1, n2+1><n1+1, n2| + h.c.
inline Matrix build_jj_coupling(const ChargeBasis& basis, double E_JJ) {
    basis.validate();
    const int d = basis.dim();
    Matrix h = Matrix::Zero(d * d, d * d);
    for (int n1 = basis.n_min; n1 + 1 <= basis.n_max; ++n1) {
        for (int n2 = basis.n_min; n2 + 1 <= basis.n_max; ++n2) {
            // |n1, n2+1><n1+1, n2|
            const int row = basis.index_of(n1) * d + basis.index_of(n2 + 1);
            const int col = basis.index_of(n1 + 1) * d + basis.index_of(n2);
            h(row, col) += 0.5 * E_JJ;
            h(col, row) += 0.5 * E_JJ;
        }
    }
    return h;
}

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace detail

/// Coupled two-qubit system: charge window, per-qubit parameters, coupling
/// element. Builds the full Hamiltonian and its control derivatives.
/// Construction functions are pure; instances are safe to share across threads.
class TwoQubitSystem {
public:
    TwoQubitSystem(ChargeBasis basis, QubitParams q1, QubitParams q2,
                   CouplingSpec coupling)
        : basis_(basis), q1_(q1), q2_(q2), coupling_(coupling) {
        basis_.validate();
        q1_.validate();
        q2_.validate();
        coupling_.validate();
    }

    const ChargeBasis& basis() const { return basis_; }
    const QubitParams& qubit1() const { return q1_; }
    const QubitParams& qubit2() const { return q2_; }
    const CouplingSpec& coupling() const { return coupling_; }
    int dim() const { return basis_.dim() * basis_.dim(); }

    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (!q1_.charge_regime_ok())
            w.push_back("qubit 1 outside charge regime: E_J_idle/E_C > 0.5");
        if (!q2_.charge_regime_ok())
            w.push_back("qubit 2 outside charge regime: E_J_idle/E_C > 0.5");
        return w;
    }

    /// All controls parked at their idle values.
    ControlValues idle_values() const {
        ControlValues v;
        v.ej1 = q1_.E_J_idle;
        v.ej2 = q2_.E_J_idle;
        v.ejj = coupling_.kind == CouplingKind::Josephson ? coupling_.E_JJ_idle : 0.0;
        v.ng1 = q1_.n_g_idle;
        v.ng2 = q2_.n_g_idle;
        return v;
    }

    /// Full Hamiltonian H1 x I + I x H2 + H_int at the given control values,
    /// assembled directly into a real symmetric matrix (every term is real in
    /// the charge representation). The Coulomb term is always present
    /// (residual coupling for the Josephson kind); the exchange term only for
    /// the Josephson kind.
    void hamiltonian_real_into(const ControlValues& v, RealMatrix& h) const {
        const int d = basis_.dim();
        h.setZero(d * d, d * d);
        for (int i1 = 0; i1 < d; ++i1) {
            const double dn1 = basis_.charge_at(i1) - v.ng1;
            for (int i2 = 0; i2 < d; ++i2) {
                const double dn2 = basis_.charge_at(i2) - v.ng2;
                const int idx = i1 * d + i2;
                h(idx, idx) = q1_.E_C * dn1 * dn1 + q2_.E_C * dn2 * dn2 +
                              coupling_.E_cc * dn1 * dn2;
                if (i2 + 1 < d) { // qubit-2 tunneling
                    h(idx, idx + 1) += -0.5 * v.ej2;
                    h(idx + 1, idx) += -0.5 * v.ej2;
                }
                if (i1 + 1 < d) { // qubit-1 tunneling
                    h(idx, idx + d) += -0.5 * v.ej1;
                    h(idx + d, idx) += -0.5 * v.ej1;
                }
            }
        }
        if (coupling_.kind == CouplingKind::Josephson && v.ejj != 0.0) {
            // pair exchange |n1, n2+1><n1+1, n2| + h.c.
            for (int i1 = 0; i1 + 1 < d; ++i1) {
                for (int i2 = 0; i2 + 1 < d; ++i2) {
                    const int row = i1 * d + (i2 + 1);
                    const int col = (i1 + 1) * d + i2;
                    h(row, col) += 0.5 * v.ejj;
                    h(col, row) += 0.5 * v.ejj;
                }
            }
        }
    }

    RealMatrix hamiltonian_real(const ControlValues& v) const {
        RealMatrix h;
        hamiltonian_real_into(v, h);
        return h;
    }

    Matrix hamiltonian(const ControlValues& v) const {
        return hamiltonian_real(v).cast<Complex>();
    }

    /// dH/d(control). Exact analytic derivatives; NG derivatives depend on the
    /// current values through the quadratic charging term and the Coulomb term.
    void control_derivative_real_into(ControlId id, const ControlValues& v,
                                      RealMatrix& dh) const {
        const int d = basis_.dim();
        dh.setZero(d * d, d * d);
        switch (id) {
            case ControlId::EJ1:
                for (int i1 = 0; i1 + 1 < d; ++i1)
                    for (int i2 = 0; i2 < d; ++i2) {
                        const int idx = i1 * d + i2;
                        dh(idx, idx + d) = -0.5;
                        dh(idx + d, idx) = -0.5;
                    }
                return;
            case ControlId::EJ2:
                for (int i1 = 0; i1 < d; ++i1)
                    for (int i2 = 0; i2 + 1 < d; ++i2) {
                        const int idx = i1 * d + i2;
                        dh(idx, idx + 1) = -0.5;
                        dh(idx + 1, idx) = -0.5;
                    }
                return;
            case ControlId::EJJ:
                for (int i1 = 0; i1 + 1 < d; ++i1)
                    for (int i2 = 0; i2 + 1 < d; ++i2) {
                        dh(i1 * d + i2 + 1, (i1 + 1) * d + i2) = 0.5;
                        dh((i1 + 1) * d + i2, i1 * d + i2 + 1) = 0.5;
                    }
                return;
            case ControlId::NG1:
                for (int i1 = 0; i1 < d; ++i1)
                    for (int i2 = 0; i2 < d; ++i2) {
                        const int idx = i1 * d + i2;
                        // charging term plus d/dng1 of E_cc (n1-ng1)(n2-ng2)
                        dh(idx, idx) = -2.0 * q1_.E_C * (basis_.charge_at(i1) - v.ng1) -
                                       coupling_.E_cc * (basis_.charge_at(i2) - v.ng2);
                    }
                return;
            case ControlId::NG2:
                for (int i1 = 0; i1 < d; ++i1)
                    for (int i2 = 0; i2 < d; ++i2) {
                        const int idx = i1 * d + i2;
                        dh(idx, idx) = -2.0 * q2_.E_C * (basis_.charge_at(i2) - v.ng2) -
                                       coupling_.E_cc * (basis_.charge_at(i1) - v.ng1);
                    }
                return;
        }
        throw internal_error("unhandled control id");
    }

    RealMatrix control_derivative_real(ControlId id, const ControlValues& v) const {
        RealMatrix dh;
        control_derivative_real_into(id, v, dh);
        return dh;
    }

    Matrix control_derivative(ControlId id, const ControlValues& v) const {
        return control_derivative_real(id, v).cast<Complex>();
    }

private:
    ChargeBasis basis_;
    QubitParams q1_, q2_;
    CouplingSpec coupling_;
};

/// Convenience builder mirroring hamiltonian() for free-standing use.
inline Matrix build_total_h(const ChargeBasis& basis, const QubitParams& q1,
                            const QubitParams& q2, const CouplingSpec& coupling,
                            const ControlValues& v) {
    return TwoQubitSystem(basis, q1, q2, coupling).hamiltonian(v);
}

} // namespace qoc

#endif
