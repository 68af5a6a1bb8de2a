#ifndef QOC_DFT_HPP
#define QOC_DFT_HPP

#include <cmath>
#include <vector>

#include "qoc/types.hpp"

namespace qoc {

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

/// Iterative radix-2 Cooley-Tukey, in place. sign = -1 forward, +1 inverse
/// (inverse leaves out the 1/N).
inline void fft_radix2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * pi / static_cast<double>(len);
        const Complex wl(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// Direct O(N^2) transform with a precomputed twiddle table; any length.
inline std::vector<Complex> dft_direct(const std::vector<Complex>& x, int sign) {
    const std::size_t n = x.size();
    std::vector<Complex> twiddle(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = sign * 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<Complex> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        Complex acc = 0.0;
        std::size_t idx = 0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += x[k] * twiddle[idx];
            idx += m;
            if (idx >= n) idx -= n;
        }
        out[m] = acc;
    }
    return out;
}

} // namespace detail

/// Forward DFT: X_m = sum_k x_k exp(-2 pi i m k / N). Radix-2 fast path for
/// power-of-two lengths, direct transform otherwise (our grids are small).
inline std::vector<Complex> dft_forward(const std::vector<Complex>& x) {
    if (detail::is_power_of_two(x.size())) {
        std::vector<Complex> a = x;
        detail::fft_radix2(a, -1);
        return a;
    }
    return detail::dft_direct(x, -1);
}

/// Inverse DFT, including the 1/N normalization.
inline std::vector<Complex> dft_inverse(const std::vector<Complex>& x) {
    std::vector<Complex> a;
    if (detail::is_power_of_two(x.size())) {
        a = x;
        detail::fft_radix2(a, +1);
    } else {
        a = detail::dft_direct(x, +1);
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (auto& v : a) v *= inv_n;
    return a;
}

/// One-sided periodogram of a real time series sampled at spacing dt,
/// in the angular-frequency convention S(omega) = integral C(t) e^{-i omega t} dt:
/// S_hat(omega_m) = 2 dt |X_m|^2 / N at omega_m = 2 pi m / (N dt),
/// m = 1 .. N/2 - 1 (DC and Nyquist excluded).
struct Periodogram {
    std::vector<double> omega;
    std::vector<double> power;
};

inline Periodogram periodogram(const std::vector<double>& samples, double dt) {
    const std::size_t n = samples.size();
    std::vector<Complex> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = samples[k];
    const std::vector<Complex> spectrum = dft_forward(x);
    Periodogram p;
    for (std::size_t m = 1; m < n / 2; ++m) {
        p.omega.push_back(2.0 * pi * static_cast<double>(m) / (static_cast<double>(n) * dt));
        p.power.push_back(2.0 * dt * std::norm(spectrum[m]) / static_cast<double>(n));
    }
    return p;
}

} // namespace qoc

#endif
