#ifndef QOC_TESTS_JACOBI_ORACLE_HPP
#define QOC_TESTS_JACOBI_ORACLE_HPP

// Test-only eigensolver, independent of the Eigen-backed path used by the
// library: classic cyclic Jacobi rotations on a real symmetric matrix.
// Slow and simple on purpose; used to cross-check spectra and ground states.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace qoc_test {

struct JacobiResult {
    std::vector<double> eigenvalues;      // ascending
    Eigen::MatrixXd eigenvectors;         // columns, matching order
};

inline JacobiResult jacobi_eigensystem(Eigen::MatrixXd a, int max_sweeps = 100,
                                       double tol = 1e-14) {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < tol * tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i) < a(j, j); });
    JacobiResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        result.eigenvalues[i] = a(order[i], order[i]);
        result.eigenvectors.col(i) = v.col(order[i]);
    }
    return result;
}

} // namespace qoc_test

#endif
