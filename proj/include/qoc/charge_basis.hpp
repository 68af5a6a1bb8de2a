#ifndef QOC_CHARGE_BASIS_HPP
#define QOC_CHARGE_BASIS_HPP

#include <string>

#include "qoc/types.hpp"

namespace qoc {

/// Truncated excess-Cooper-pair window for one island, n in [n_min, n_max].
/// The computational charge states |0> and |1> must always lie inside the
/// window; leakage levels are whatever else the window admits.
struct ChargeBasis {
    int n_min = -1;
    int n_max = 2;

    int dim() const { return n_max - n_min + 1; }

    /// Row/column index of charge state |n>, states ordered by ascending n.
    int index_of(int n) const { return n - n_min; }
    int charge_at(int index) const { return n_min + index; }
    bool contains(int n) const { return n >= n_min && n <= n_max; }

    void validate() const {
        if (!(n_min <= 0 && 1 <= n_max)) {
            throw config_error("charge window [" + std::to_string(n_min) + ", " +
                               std::to_string(n_max) +
                               "] must contain the computational states 0 and 1");
        }
    }
};

/// Two-level window {0,1}: no leakage levels at all.
inline ChargeBasis two_level_basis() { return ChargeBasis{0, 1}; }

/// Default window {-1..2}, adequate for E_J/E_C up to roughly 0.1.
inline ChargeBasis default_basis() { return ChargeBasis{-1, 2}; }

/// Extended window {-2..3} for leakage convergence checks.
inline ChargeBasis extended_basis() { return ChargeBasis{-2, 3}; }

} // namespace qoc

#endif
