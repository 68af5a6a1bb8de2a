#ifndef QOC_RNG_HPP
#define QOC_RNG_HPP

#include <cstdint>
#include <cmath>

namespace qoc {

/// Counter-based PRNG built on the splitmix64 finalizer.
///
/// Every consumer of randomness derives its own stream from
/// (root seed, stream kind, qubit index, realization index), so results are
/// bit-stable across platforms and independent of evaluation order or thread
/// count. No libstdc++ distributions are used anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + uniform() * (b - a); }

    /// Standard normal via Box-Muller (no cached spare; deterministic draw count).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi_ * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static constexpr double pi_ = 3.14159265358979323846;
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

/// Stream identifiers for child-seed derivation. Values are part of the
/// on-disk reproducibility contract; do not renumber.
enum class RngStream : std::uint64_t {
    EnsembleRates = 1,  // fluctuator switching rates and initial states
    Trajectory = 2,     // telegraph flip decisions
    InitialGuess = 3,   // randomized pulse guesses
    Generic = 4,
};

/// Deterministic child seed for (root, stream, qubit index, realization index).
inline std::uint64_t child_seed(std::uint64_t root, RngStream stream,
                                std::uint64_t qubit = 0, std::uint64_t realization = 0) {
    std::uint64_t s = detail::mix64(root ^ 0xD1B54A32D192ED03ull);
    s = detail::mix64(s ^ (static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ull));
    s = detail::mix64(s ^ (qubit + 0x2545F4914F6CDD1Dull));
    s = detail::mix64(s ^ (realization + 0x6A09E667F3BCC909ull));
    return s;
}

} // namespace qoc

#endif
