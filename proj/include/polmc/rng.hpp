#ifndef POLMC_RNG_HPP
#define POLMC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace polmc {

/// Counter-based splittable random stream.
///
/// Each draw hashes (key, counter), so independent streams can be derived
/// with split() without any shared state. All experiment code receives an
/// RngStream from its caller; nothing in the library owns a global one.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))), ctr_(0) {}

    std::uint64_t next_u64() {
        return mix(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Derives an independent stream; does not advance this one.
    RngStream split(std::uint64_t lane) const {
        RngStream child(0);
        child.key_ = mix(key_ ^ mix(lane + 0xd1b54a32d192ed03ULL));
        child.ctr_ = 0;
        return child;
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, n).
    std::int64_t next_index(std::int64_t n) {
        if (n <= 0) throw std::invalid_argument("next_index: n must be positive");
        return static_cast<std::int64_t>(
            (static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(n)) >> 64);
    }

    std::int64_t next_categorical(std::span<const double> probs) {
        const double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<std::int64_t>(i);
        }
        return static_cast<std::int64_t>(probs.size()) - 1;
    }

    double next_normal() {
        // Box-Muller; one value per call keeps the stream layout simple.
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Marsaglia-Tsang; shape > 0, unit scale.
    double next_gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be positive");
        if (shape < 1.0) {
            const double boost = std::pow(next_double(), 1.0 / shape);
            return next_gamma(shape + 1.0) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = next_normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double next_beta(double alpha, double beta) {
        const double x = next_gamma(alpha);
        const double y = next_gamma(beta);
        return x / (x + y);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace polmc

#endif
