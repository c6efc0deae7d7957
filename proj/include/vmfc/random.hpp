#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "vmfc/vec.hpp"

namespace vmfc {

// Derives an independent stream seed from (seed, salt); splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seeded random stream. All distributions are implemented on top of the raw
// mt19937_64 output so that a given seed produces the same draws everywhere
// (the standard library distribution objects are not pinned down by the
// standard and vary between implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // Marsaglia polar method; second deviate cached.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Marsaglia-Tsang squeeze for alpha >= 1, boosted below 1.
    double gamma(double alpha) {
        if (!(alpha > 0.0)) throw std::domain_error("gamma: alpha must be > 0");
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    // Uniform direction on the unit sphere in R^dim.
    Vec unit_vector(int dim) {
        if (dim < 1) throw std::domain_error("unit_vector: dim must be >= 1");
        Vec v(dim);
        double n2;
        do {
            for (double& x : v) x = normal();
            n2 = dot(v, v);
        } while (n2 == 0.0);
        const double inv = 1.0 / std::sqrt(n2);
        for (double& x : v) x *= inv;
        return v;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vmfc
