#pragma once

// Test-side oracles, deliberately independent of the library implementation
// paths they are used to check: closed forms for d = 3 (half-integer Bessel
// orders), plain quadrature, finite differences, and small statistics
// helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vmfc/random.hpp"
#include "vmfc/vec.hpp"

namespace oracle {

// ln C_3(kappa) = ln( kappa / (4 pi sinh kappa) ), stable for large kappa:
// sinh k = e^k (1 - e^{-2k})/2.
inline double log_normalizer_d3(double kappa) {
    return std::log(kappa) - std::log(4.0 * M_PI) -
           (kappa + std::log1p(-std::exp(-2.0 * kappa)) - M_LN2);
}

// Eq-form mutual likelihood score for d = 3 via I_{1/2}(x) = sqrt(2/(pi x)) sinh x,
// written directly in terms of sinh logs.
inline double mls_d3(double ka, double kb, double cos_theta, double r) {
    const double kt = std::sqrt(ka * ka + kb * kb + 2.0 * ka * kb * cos_theta);
    auto log_sinh = [](double x) {
        return x + std::log1p(-std::exp(-2.0 * x)) - M_LN2;
    };
    // 0.5*log(ka kb/kt) + log I(kt) - log I(ka) - log I(kb) - 3 log(sqrt(2pi) r)
    const double log_i_kt = 0.5 * std::log(2.0 / (M_PI * kt)) + log_sinh(kt);
    const double log_i_ka = 0.5 * std::log(2.0 / (M_PI * ka)) + log_sinh(ka);
    const double log_i_kb = 0.5 * std::log(2.0 / (M_PI * kb)) + log_sinh(kb);
    return 0.5 * std::log(ka * kb / kt) + log_i_kt - log_i_ka - log_i_kb -
           3.0 * std::log(std::sqrt(2.0 * M_PI) * r);
}

// Composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Relative closeness with an absolute floor for near-zero references.
inline bool rel_close(double got, double want, double rtol,
                      double floor_scale = 0.0) {
    const double scale =
        std::max({std::fabs(got), std::fabs(want), floor_scale});
    if (scale == 0.0) return true;
    return std::fabs(got - want) <= rtol * scale;
}

inline double rel_err(double got, double want, double floor_scale = 0.0) {
    const double scale =
        std::max({std::fabs(got), std::fabs(want), floor_scale});
    if (scale == 0.0) return 0.0;
    return std::fabs(got - want) / scale;
}

// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF given as
// sorted (x, F(x)) table with linear interpolation.
inline double ks_statistic(std::vector<double> samples,
                           const std::vector<double>& xs,
                           const std::vector<double>& cdf) {
    std::sort(samples.begin(), samples.end());
    auto interp = [&](double x) {
        if (x <= xs.front()) return 0.0;
        if (x >= xs.back()) return 1.0;
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = it - xs.begin();
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return cdf[i - 1] + t * (cdf[i] - cdf[i - 1]);
    };
    double d = 0.0;
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = interp(samples[i]);
        d = std::max(d, std::fabs((i + 1) / n - F));
        d = std::max(d, std::fabs(F - i / n));
    }
    return d;
}

// Random rotation: orthonormalize a Gaussian matrix (Gram-Schmidt).
inline std::vector<vmfc::Vec> random_rotation(int d, vmfc::Rng& rng) {
    std::vector<vmfc::Vec> q;
    while (static_cast<int>(q.size()) < d) {
        vmfc::Vec v(d);
        for (double& x : v) x = rng.normal();
        for (const auto& u : q) vmfc::axpy(-vmfc::dot(v, u), u, v);
        const double n = vmfc::norm(v);
        if (n < 1e-8) continue;
        q.push_back(vmfc::scaled(v, 1.0 / n));
    }
    return q;
}

inline vmfc::Vec apply_rotation(const std::vector<vmfc::Vec>& q,
                                const vmfc::Vec& x) {
    vmfc::Vec out(x.size(), 0.0);
    for (std::size_t r = 0; r < q.size(); ++r) {
        // rows of Q are the orthonormal basis; out = Q x
        out[r] = vmfc::dot(q[r], x);
    }
    return out;
}

}  // namespace oracle
