#pragma once

// The r-radius von Mises-Fisher distribution: normalizer, log-density on the
// r-sphere, Ulrich-Wood sampling, and a Monte Carlo estimate of the mutual
// likelihood integral that the closed form in mls.hpp can be checked against.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmfc/bessel.hpp"
#include "vmfc/random.hpp"
#include "vmfc/vec.hpp"

namespace vmfc {

// Ambient dimension d (embeddings live on S^{d-1}) and sphere radius r.
// The radius doubles as the temperature via tau = 1/r^2.
struct SphereConfig {
    int d = 2;
    double r = 1.0;

    SphereConfig() = default;
    SphereConfig(int d_, double r_) : d(d_), r(r_) {
        if (d < 2) throw std::domain_error("SphereConfig: d must be >= 2");
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::domain_error("SphereConfig: r must be positive and finite");
    }

    double nu() const { return 0.5 * d - 1.0; }
    double tau() const { return 1.0 / (r * r); }
};

// Per-view probabilistic embedding: unit mean direction plus concentration.
struct StochasticEmbedding {
    Vec mu;
    double kappa = 1.0;
};

using SpherePoint = Vec;  // a point with ||z|| = cfg.r

inline void check_embedding(const StochasticEmbedding& e, const char* who) {
    if (!(e.kappa > 0.0) || !std::isfinite(e.kappa))
        throw std::domain_error(std::string(who) +
                                ": kappa must be positive and finite");
    if (std::fabs(norm(e.mu) - 1.0) > 1e-9)
        throw std::domain_error(std::string(who) + ": mu must be unit length");
}

namespace detail {
constexpr double kKappaUniformLimit = 1e-12;  // below this, treat as uniform
}

// ln C_d of the uniform limit kappa -> 0: kappa^nu / I_nu(kappa) -> 2^nu Gamma(nu+1),
// i.e. minus the log surface area of the unit sphere.
inline double log_normalizer_uniform(const SphereConfig& cfg) {
    const double nu = cfg.nu();
    return nu * M_LN2 + std::lgamma(nu + 1.0) -
           (0.5 * cfg.d) * std::log(2.0 * M_PI);
}

// ln C_d(kappa) = (d/2-1) ln kappa - (d/2) ln(2 pi) - ln I_{d/2-1}(kappa).
inline double log_normalizer(double kappa, const SphereConfig& cfg) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::domain_error("log_normalizer: kappa must be positive");
    if (kappa < detail::kKappaUniformLimit) return log_normalizer_uniform(cfg);
    const double nu = cfg.nu();
    return nu * std::log(kappa) - (0.5 * cfg.d) * std::log(2.0 * M_PI) -
           log_bessel_i(nu, kappa);
}

// Log-density of the r-radius vMF with respect to the surface measure of the
// r-sphere; integrates to 1 over the sphere. The -(d-1) ln r term is the
// Jacobian of pushing the unit-sphere density out to radius r.
inline double log_density(const SpherePoint& z, const StochasticEmbedding& emb,
                          const SphereConfig& cfg) {
    check_embedding(emb, "log_density");
    if (static_cast<int>(z.size()) != cfg.d)
        throw std::invalid_argument("log_density: point dimension mismatch");
    const double zn = norm(z);
    if (std::fabs(zn - cfg.r) > 1e-6 * cfg.r)
        throw std::domain_error("log_density: point is not on the r-sphere");
    return log_normalizer(emb.kappa, cfg) + emb.kappa * dot(emb.mu, z) / cfg.r -
           (cfg.d - 1) * std::log(cfg.r);
}

namespace detail {

// Longitudinal coordinate t = mu.z/r of a unit vMF via the Ulrich-Wood
// rejection sampler; exact for all kappa > 0, d >= 2.
class WoodSampler {
public:
    WoodSampler(double kappa, int d) : kappa_(kappa), dm1_(d - 1) {
        b_ = dm1_ / (2.0 * kappa_ + std::hypot(2.0 * kappa_, dm1_));
        x0_ = (1.0 - b_) / (1.0 + b_);
        c_ = kappa_ * x0_ + dm1_ * std::log(1.0 - x0_ * x0_);
    }

    double draw(Rng& rng) const {
        for (;;) {
            const double z = rng.beta(0.5 * dm1_, 0.5 * dm1_);
            const double w = (1.0 - (1.0 + b_) * z) / (1.0 - (1.0 - b_) * z);
            const double u = rng.uniform();
            if (u == 0.0) continue;
            if (kappa_ * w + dm1_ * std::log(1.0 - x0_ * w) - c_ >= std::log(u))
                return w;
        }
    }

private:
    double kappa_;
    double dm1_;
    double b_, x0_, c_;
};

// Completes a longitudinal coordinate into a point on the unit sphere by
// drawing a uniform tangential direction.
inline Vec complete_direction(const Vec& mu, double t, Rng& rng) {
    const int d = static_cast<int>(mu.size());
    Vec v;
    double n;
    do {
        v = Vec(d);
        for (double& x : v) x = rng.normal();
        axpy(-dot(v, mu), mu, v);
        n = norm(v);
    } while (n == 0.0);
    Vec out = scaled(mu, t);
    axpy(std::sqrt(std::max(0.0, 1.0 - t * t)) / n, v, out);
    return out;
}

}  // namespace detail

inline std::vector<SpherePoint> sample(const StochasticEmbedding& emb,
                                       const SphereConfig& cfg,
                                       std::uint64_t rng_seed, int n) {
    check_embedding(emb, "sample");
    if (static_cast<int>(emb.mu.size()) != cfg.d)
        throw std::invalid_argument("sample: embedding dimension mismatch");
    if (n < 1) throw std::domain_error("sample: n must be >= 1");
    Rng rng(rng_seed);
    std::vector<SpherePoint> out;
    out.reserve(n);
    if (emb.kappa < detail::kKappaUniformLimit) {
        for (int i = 0; i < n; ++i) out.push_back(scaled(rng.unit_vector(cfg.d), cfg.r));
        return out;
    }
    detail::WoodSampler wood(emb.kappa, cfg.d);
    for (int i = 0; i < n; ++i) {
        const double t = wood.draw(rng);
        out.push_back(scaled(detail::complete_direction(emb.mu, t, rng), cfg.r));
    }
    return out;
}

struct McEstimate {
    double value = 0.0;      // ln of the estimated integral
    double std_error = 0.0;  // delta-method standard error of value
    long n = 0;
};

// Monte Carlo estimate of the mutual likelihood integral: draws z from the
// more concentrated of the two embeddings and averages the other's density.
// The sphere-surface integral of the two densities carries one factor of r
// more than the mutual-likelihood convention used by mls_score, so ln r is
// subtracted here; both sides of the oracle comparison then share the same
// constant. See mls.hpp.
inline McEstimate mc_mls_oracle(const StochasticEmbedding& a,
                                const StochasticEmbedding& b,
                                const SphereConfig& cfg, long n,
                                std::uint64_t rng_seed) {
    check_embedding(a, "mc_mls_oracle");
    check_embedding(b, "mc_mls_oracle");
    if (n < 1000) throw std::domain_error("mc_mls_oracle: n must be >= 1000");

    const StochasticEmbedding& from = (a.kappa >= b.kappa) ? a : b;
    const StochasticEmbedding& other = (a.kappa >= b.kappa) ? b : a;

    const auto points = sample(from, cfg, rng_seed, static_cast<int>(n));
    std::vector<double> logw(points.size());
    double maxw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        logw[i] = log_density(points[i], other, cfg);
        if (logw[i] > maxw) maxw = logw[i];
    }
    double sum = 0.0, sumsq = 0.0;
    for (const double lw : logw) {
        const double w = std::exp(lw - maxw);
        sum += w;
        sumsq += w * w;
    }
    const double mean = sum / n;
    const double var = (sumsq - n * mean * mean) / (n - 1.0);
    McEstimate est;
    est.n = n;
    est.value = maxw + std::log(mean) - std::log(cfg.r);
    est.std_error = std::sqrt(std::max(0.0, var / n)) / mean;
    return est;
}

}  // namespace vmfc
