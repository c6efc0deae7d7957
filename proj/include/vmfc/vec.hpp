#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vmfc {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(const Vec& a, double c) {
    Vec out(a);
    for (double& x : out) x *= c;
    return out;
}

inline void axpy(double c, const Vec& x, Vec& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec out(a);
    axpy(1.0, b, out);
    return out;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec out(a);
    axpy(-1.0, b, out);
    return out;
}

inline Vec normalized(const Vec& a) {
    const double n = norm(a);
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::domain_error("normalized: zero or non-finite vector");
    return scaled(a, 1.0 / n);
}

// Remove the component of g along the unit vector mu.
inline Vec tangent_project(const Vec& g, const Vec& mu) {
    Vec out(g);
    axpy(-dot(g, mu), mu, out);
    return out;
}

}  // namespace vmfc
