#pragma once

// Mutual likelihood score of two r-radius vMF embeddings, its landscape form
// over (kappa_i, kappa_j, cos theta), and analytic gradients.
//
//   s = (d/2-1) log(ka*kb/kt) + log( I_nu(kt) / (I_nu(ka) I_nu(kb)) )
//       - d log(sqrt(2 pi) r),        kt = ||ka*mu_a + kb*mu_b||.
//
// The Bessel block is evaluated through the scaled function so the three
// exponentials cancel exactly:  lnI(kt)-lnI(ka)-lnI(kb) =
// [scaled terms] + (kt-ka-kb), and kt-ka-kb = -2*ka*kb*(1-cos)/(ka+kb+kt)
// is formed without cancellation.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmfc/bessel.hpp"
#include "vmfc/csv.hpp"
#include "vmfc/vmf.hpp"

namespace vmfc {

struct MlsInputs {
    StochasticEmbedding a;
    StochasticEmbedding b;
    SphereConfig cfg;
};

// Tangent-space gradients of mls_score: d_mu_* are orthogonal to their mu.
struct MlsGradients {
    Vec d_mu_a;
    Vec d_mu_b;
    double d_kappa_a = 0.0;
    double d_kappa_b = 0.0;
};

// kt = 0 makes the score's angular part non-smooth; gradients refuse there.
class DegenerateGradientError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline double kappa_tilde(const StochasticEmbedding& a,
                          const StochasticEmbedding& b) {
    Vec w = scaled(a.mu, a.kappa);
    axpy(b.kappa, b.mu, w);
    return norm(w);
}

namespace detail {

constexpr double kKappaTildeLimit = 1e-12;  // analytic limit below this

struct MlsParts {
    double kt;     // ||ka mu_a + kb mu_b||
    double delta;  // kt - ka - kb  (always <= 0)
};

inline MlsParts mls_parts(double ka, double kb, double cos_theta) {
    const double kt =
        std::sqrt(std::max(0.0, ka * ka + kb * kb + 2.0 * ka * kb * cos_theta));
    const double delta =
        -2.0 * ka * kb * (1.0 - cos_theta) / ((ka + kb) + kt);
    return {kt, delta};
}

// Core of Eq-form s(ka, kb, cos theta); shared by the score and the
// landscape so the two are bitwise identical.
inline double mls_core(double ka, double kb, double cos_theta,
                       const SphereConfig& cfg) {
    const double nu = cfg.nu();
    const double offset =
        -cfg.d * (0.5 * std::log(2.0 * M_PI) + std::log(cfg.r));
    const auto [kt, delta] = mls_parts(ka, kb, cos_theta);

    if (kt < kKappaTildeLimit) {
        // kappa^nu / I_nu(kappa) -> 2^nu Gamma(nu+1) as kappa -> 0
        const double angular =
            (nu == 0.0) ? 0.0
                        : nu * (std::log(ka * kb) - M_LN2) - std::lgamma(nu + 1.0);
        return angular -
               (log_bessel_i_scaled(nu, ka) + log_bessel_i_scaled(nu, kb)) -
               (ka + kb) + offset;
    }

    const double angular =
        (nu == 0.0) ? 0.0 : nu * (std::log(ka * kb) - std::log(kt));
    const double bessel =
        log_bessel_i_scaled(nu, kt) -
        (log_bessel_i_scaled(nu, ka) + log_bessel_i_scaled(nu, kb));
    return angular + bessel + delta + offset;
}

inline void check_kappa_positive(double kappa, const char* who) {
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw std::domain_error(std::string(who) + ": kappa must be positive");
}

}  // namespace detail

// Landscape form: s as a function of the two concentrations and the cosine
// of the angle between the mean directions. Equal to mls_score for any
// embedding pair realizing the same cos theta.
inline double mls_landscape(double kappa_a, double kappa_b, double cos_theta,
                            const SphereConfig& cfg) {
    detail::check_kappa_positive(kappa_a, "mls_landscape");
    detail::check_kappa_positive(kappa_b, "mls_landscape");
    if (std::fabs(cos_theta) > 1.0 + 1e-12)
        throw std::domain_error("mls_landscape: |cos_theta| must be <= 1");
    cos_theta = std::min(1.0, std::max(-1.0, cos_theta));
    return detail::mls_core(kappa_a, kappa_b, cos_theta, cfg);
}

inline double mls_score(const MlsInputs& in) {
    check_embedding(in.a, "mls_score");
    check_embedding(in.b, "mls_score");
    if (in.a.mu.size() != in.b.mu.size() ||
        static_cast<int>(in.a.mu.size()) != in.cfg.d)
        throw std::invalid_argument("mls_score: dimension mismatch");
    const double c = std::min(1.0, std::max(-1.0, dot(in.a.mu, in.b.mu)));
    return detail::mls_core(in.a.kappa, in.b.kappa, c, in.cfg);
}

inline double mls_score(const StochasticEmbedding& a,
                        const StochasticEmbedding& b,
                        const SphereConfig& cfg) {
    return mls_score({a, b, cfg});
}

// Analytic gradients. With R = bessel_ratio and w = ka mu_a + kb mu_b:
//   ds/dka    = -R(ka) + R(kt) (ka + kb cos)/kt
//   ds/dmu_a  = R(kt) ka w / kt, projected to the tangent space at mu_a
// (the nu/kappa terms of d/dk ln I cancel against the log(ka kb / kt) part).
inline MlsGradients mls_grad(const MlsInputs& in) {
    check_embedding(in.a, "mls_grad");
    check_embedding(in.b, "mls_grad");
    const double ka = in.a.kappa, kb = in.b.kappa;
    const double c = std::min(1.0, std::max(-1.0, dot(in.a.mu, in.b.mu)));
    const auto [kt, delta] = detail::mls_parts(ka, kb, c);
    if (kt <= 1e-10)
        throw DegenerateGradientError(
            "mls_grad: kappa_tilde <= 1e-10 (antipodal degeneracy)");
    const double nu = in.cfg.nu();
    const double rt = bessel_ratio(nu, kt);

    MlsGradients g;
    g.d_kappa_a = -bessel_ratio(nu, ka) + rt * (ka + kb * c) / kt;
    g.d_kappa_b = -bessel_ratio(nu, kb) + rt * (kb + ka * c) / kt;

    Vec w = scaled(in.a.mu, ka);
    axpy(kb, in.b.mu, w);
    g.d_mu_a = tangent_project(scaled(w, rt * ka / kt), in.a.mu);
    g.d_mu_b = tangent_project(scaled(w, rt * kb / kt), in.b.mu);
    return g;
}

// Grid of landscape values; row-major over (kappa_i, kappa_j, cos_theta)
// with cos_theta fastest. See write_landscape_csv for the serialized order.
struct LandscapeGrid {
    std::vector<double> kappa_axis;
    std::vector<double> cos_theta_axis;
    std::vector<double> values;
    SphereConfig cfg;

    double at(std::size_t ia, std::size_t ib, std::size_t ic) const {
        return values[(ia * kappa_axis.size() + ib) * cos_theta_axis.size() + ic];
    }
};

inline LandscapeGrid sweep_landscape(const std::vector<double>& kappa_axis,
                                     const std::vector<double>& cos_theta_axis,
                                     const SphereConfig& cfg) {
    if (kappa_axis.empty() || cos_theta_axis.empty())
        throw std::domain_error("sweep_landscape: empty axis");
    LandscapeGrid grid{kappa_axis, cos_theta_axis, {}, cfg};
    grid.values.reserve(kappa_axis.size() * kappa_axis.size() *
                        cos_theta_axis.size());
    for (std::size_t ia = 0; ia < kappa_axis.size(); ++ia)
        for (std::size_t ib = 0; ib < kappa_axis.size(); ++ib)
            for (std::size_t ic = 0; ic < cos_theta_axis.size(); ++ic) {
                try {
                    grid.values.push_back(mls_landscape(
                        kappa_axis[ia], kappa_axis[ib], cos_theta_axis[ic], cfg));
                } catch (const std::exception& e) {
                    throw std::domain_error(
                        "sweep_landscape: cell (" + std::to_string(ia) + "," +
                        std::to_string(ib) + "," + std::to_string(ic) +
                        "): " + e.what());
                }
            }
    return grid;
}

// CSV schema: header `kappa_i,kappa_j,cos_theta,s`, one row per grid cell,
// kappa_i outermost and cos_theta innermost, 17 significant digits, LF.
inline void write_landscape_csv(std::ostream& os, const LandscapeGrid& grid) {
    os << "kappa_i,kappa_j,cos_theta,s\n";
    for (std::size_t ia = 0; ia < grid.kappa_axis.size(); ++ia)
        for (std::size_t ib = 0; ib < grid.kappa_axis.size(); ++ib)
            for (std::size_t ic = 0; ic < grid.cos_theta_axis.size(); ++ic)
                csv_row(os, grid.kappa_axis[ia], grid.kappa_axis[ib],
                        grid.cos_theta_axis[ic], grid.at(ia, ib, ic));
}

}  // namespace vmfc
