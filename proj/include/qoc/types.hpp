#ifndef QOC_TYPES_HPP
#define QOC_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qoc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex imag_unit{0.0, 1.0};

/// Bad user-supplied parameters (windows, energies, config files).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid input carrying unusable data (NaN samples, layout mismatch).
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical backend failure (eigensolver did not converge, non-finite update).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Broken internal invariant; indicates a bug, not bad input.
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Max-norm distance from the identity, ||A - I||_max.
inline double deviation_from_identity(const Matrix& a) {
    return max_abs(a - Matrix::Identity(a.rows(), a.cols()));
}

/// Max-norm Hermiticity defect, ||A - A^dagger||_max.
inline double hermiticity_defect(const Matrix& a) { return max_abs(a - a.adjoint()); }

/// Max-norm unitarity defect, ||U^dagger U - I||_max.
inline double unitarity_defect(const Matrix& u) {
    return deviation_from_identity(u.adjoint() * u);
}

} // namespace qoc

#endif
