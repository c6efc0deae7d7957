#pragma once

// InfoNCE-style contrastive objectives with a pluggable similarity: the
// classic scaled inner product (temperature form) or the mutual likelihood
// score. One anchor, one positive, M negatives; negatives are scored
// against the anchor.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vmfc/mls.hpp"
#include "vmfc/vmf.hpp"

namespace vmfc {

enum class SimilarityKind { scaled_inner_product, mls };

struct ContrastiveBatch {
    StochasticEmbedding anchor;    // x_j
    StochasticEmbedding positive;  // x_i
    std::vector<StochasticEmbedding> negatives;
};

// Loss with its intermediates; entry 0 of per_similarity / softmax_weights
// is the positive pair, entries 1..M the negatives.
struct LossValue {
    double value = 0.0;
    std::vector<double> per_similarity;
    std::vector<double> softmax_weights;
};

// Gradients with respect to every (mu, kappa) in the batch; mu gradients are
// tangent to their unit vectors. kappa entries are zero for the
// inner-product similarity, which ignores concentrations.
struct BatchGradients {
    Vec d_mu_anchor;
    double d_kappa_anchor = 0.0;
    Vec d_mu_positive;
    double d_kappa_positive = 0.0;
    std::vector<Vec> d_mu_negatives;
    std::vector<double> d_kappa_negatives;
};

inline double radius_from_temperature(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::domain_error("radius_from_temperature: tau must be positive");
    return std::sqrt(1.0 / tau);
}

inline double temperature_from_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::domain_error("temperature_from_radius: r must be positive");
    return 1.0 / (r * r);
}

// s(x, anchor) for the selected similarity. The inner product is taken
// between the radius-r embeddings z = r mu, hence the r^2 factor.
inline double similarity(const StochasticEmbedding& x,
                         const StochasticEmbedding& anchor, SimilarityKind kind,
                         const SphereConfig& cfg) {
    switch (kind) {
        case SimilarityKind::scaled_inner_product:
            return cfg.r * cfg.r * dot(x.mu, anchor.mu);
        case SimilarityKind::mls:
        default:
            return mls_score(x, anchor, cfg);
    }
}

namespace detail {

inline void check_batch(const ContrastiveBatch& batch, const char* who) {
    if (batch.negatives.empty())
        throw std::domain_error(std::string(who) + ": need at least one negative");
    const std::size_t d = batch.anchor.mu.size();
    if (batch.positive.mu.size() != d)
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    for (const auto& n : batch.negatives)
        if (n.mu.size() != d)
            throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// Similarities of (positive, negatives...) against the anchor, with pair
// index attached to any domain error.
inline std::vector<double> batch_similarities(const ContrastiveBatch& batch,
                                              SimilarityKind kind,
                                              const SphereConfig& cfg) {
    std::vector<double> s;
    s.reserve(batch.negatives.size() + 1);
    for (std::size_t k = 0; k <= batch.negatives.size(); ++k) {
        const StochasticEmbedding& x =
            (k == 0) ? batch.positive : batch.negatives[k - 1];
        try {
            s.push_back(similarity(x, batch.anchor, kind, cfg));
        } catch (const std::exception& e) {
            throw std::domain_error("similarity pair " + std::to_string(k) +
                                    (k == 0 ? " (positive)" : " (negative)") +
                                    ": " + e.what());
        }
    }
    return s;
}

}  // namespace detail

// -log softmax of the positive similarity among all M+1, via max-subtracted
// log-sum-exp (MLS scores grow with kappa and overflow a raw softmax).
inline LossValue info_nce(const ContrastiveBatch& batch, SimilarityKind kind,
                          const SphereConfig& cfg) {
    detail::check_batch(batch, "info_nce");
    LossValue out;
    out.per_similarity = detail::batch_similarities(batch, kind, cfg);

    double m = out.per_similarity[0];
    for (const double s : out.per_similarity) m = std::max(m, s);
    double z = 0.0;
    out.softmax_weights.resize(out.per_similarity.size());
    for (std::size_t k = 0; k < out.per_similarity.size(); ++k) {
        out.softmax_weights[k] = std::exp(out.per_similarity[k] - m);
        z += out.softmax_weights[k];
    }
    for (double& w : out.softmax_weights) w /= z;
    out.value = std::log(z) - (out.per_similarity[0] - m);
    return out;
}

// dL/ds_k = softmax_k - [k == positive], chained through the similarity.
inline BatchGradients info_nce_grad(const ContrastiveBatch& batch,
                                    SimilarityKind kind,
                                    const SphereConfig& cfg) {
    detail::check_batch(batch, "info_nce_grad");
    const LossValue loss = info_nce(batch, kind, cfg);
    const std::size_t m = batch.negatives.size();
    const std::size_t d = batch.anchor.mu.size();

    BatchGradients g;
    g.d_mu_anchor.assign(d, 0.0);
    g.d_mu_positive.assign(d, 0.0);
    g.d_mu_negatives.assign(m, Vec(d, 0.0));
    g.d_kappa_negatives.assign(m, 0.0);

    for (std::size_t k = 0; k <= m; ++k) {
        const double coeff = loss.softmax_weights[k] - (k == 0 ? 1.0 : 0.0);
        const StochasticEmbedding& x =
            (k == 0) ? batch.positive : batch.negatives[k - 1];
        Vec* d_mu_x = (k == 0) ? &g.d_mu_positive : &g.d_mu_negatives[k - 1];
        double* d_kappa_x =
            (k == 0) ? &g.d_kappa_positive : &g.d_kappa_negatives[k - 1];

        if (kind == SimilarityKind::scaled_inner_product) {
            const double r2 = cfg.r * cfg.r;
            axpy(coeff * r2, tangent_project(batch.anchor.mu, x.mu), *d_mu_x);
            axpy(coeff * r2, tangent_project(x.mu, batch.anchor.mu),
                 g.d_mu_anchor);
        } else {
            const MlsGradients mg = mls_grad({x, batch.anchor, cfg});
            axpy(coeff, mg.d_mu_a, *d_mu_x);
            *d_kappa_x += coeff * mg.d_kappa_a;
            axpy(coeff, mg.d_mu_b, g.d_mu_anchor);
            g.d_kappa_anchor += coeff * mg.d_kappa_b;
        }
    }
    return g;
}

// |library InfoNCE at r = sqrt(1/tau)  -  plain temperature-form InfoNCE|.
// The direct form is computed the naive way on purpose, as an independent
// check of the radius reparameterization.
inline double equivalence_check(const ContrastiveBatch& batch, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("equivalence_check: tau must be > 0");
    const SphereConfig cfg(static_cast<int>(batch.anchor.mu.size()),
                           radius_from_temperature(tau));
    const double via_radius =
        info_nce(batch, SimilarityKind::scaled_inner_product, cfg).value;

    double num = std::exp(dot(batch.positive.mu, batch.anchor.mu) / tau);
    double den = num;
    for (const auto& neg : batch.negatives)
        den += std::exp(dot(neg.mu, batch.anchor.mu) / tau);
    const double direct = -std::log(num / den);
    return std::fabs(via_radius - direct);
}

}  // namespace vmfc
