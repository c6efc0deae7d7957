#pragma once

// Desk-scale self-supervised trainer: a two-layer perceptron emits a unit
// mean direction and a softplus confidence per augmented view, and is trained
// by minimizing the contrastive loss over synthetic clustered data with
// manual backpropagation. Alignment, uniformity and per-noise-tag confidence
// are tracked as diagnostics.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vmfc/contrastive.hpp"
#include "vmfc/random.hpp"
#include "vmfc/vec.hpp"
#include "vmfc/vmf.hpp"

namespace vmfc {

namespace detail {

// Row-major dense matrix, just enough for the toy encoder.
struct Mat {
    int rows = 0, cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += m(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

inline Vec matTvec(const Mat& m, const Vec& y) {
    Vec x(m.cols, 0.0);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) x[c] += m(r, c) * y[r];
    return x;
}

inline void add_outer(Mat& m, const Vec& y, const Vec& x, double scale = 1.0) {
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) m(r, c) += scale * y[r] * x[c];
}

inline double softplus(double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace detail

struct EncoderConfig {
    int input_dim = 16;
    int hidden_dim = 64;
    int embed_dim = 8;
    double kappa_min = 1e-2;
    double kappa_max = 1e4;
    double init_kappa = 10.0;  // confidence-head bias target at init
    double init_scale = 1.0;   // weight std multiplier (over 1/sqrt(fan_in))
};

// Two dense layers with tanh, a normalized direction head and a
// softplus-clamped confidence head.
class ToyEncoder {
public:
    struct Cache {
        Vec x, hidden, pre_dir;
        double pre_dir_norm = 0.0;
        double pre_kappa = 0.0;
        bool kappa_clamped = false;
        StochasticEmbedding emb;
    };

    struct Gradients {
        detail::Mat w1, w_dir;
        Vec b1, b_dir, w_kappa;
        double b_kappa = 0.0;

        explicit Gradients(const EncoderConfig& c)
            : w1(c.hidden_dim, c.input_dim),
              w_dir(c.embed_dim, c.hidden_dim),
              b1(c.hidden_dim, 0.0),
              b_dir(c.embed_dim, 0.0),
              w_kappa(c.hidden_dim, 0.0) {}
    };

    ToyEncoder(const EncoderConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          w1_(cfg.hidden_dim, cfg.input_dim),
          w_dir_(cfg.embed_dim, cfg.hidden_dim),
          b1_(cfg.hidden_dim, 0.0),
          b_dir_(cfg.embed_dim, 0.0),
          w_kappa_(cfg.hidden_dim, 0.0) {
        Rng rng(mix_seed(seed, 0xE2C0DE));
        const double s1 = cfg.init_scale / std::sqrt(cfg.input_dim);
        for (double& w : w1_.a) w = s1 * rng.normal();
        const double s2 = cfg.init_scale / std::sqrt(cfg.hidden_dim);
        for (double& w : w_dir_.a) w = s2 * rng.normal();
        for (double& w : w_kappa_) w = s2 * rng.normal();
        // softplus(b) = init_kappa at zero hidden activation
        b_kappa_ = std::log(std::expm1(cfg.init_kappa));
    }

    const EncoderConfig& config() const { return cfg_; }

    Cache forward_cached(const Vec& x) const {
        if (static_cast<int>(x.size()) != cfg_.input_dim)
            throw std::invalid_argument("ToyEncoder: input dimension mismatch");
        Cache c;
        c.x = x;
        Vec a1 = detail::matvec(w1_, x);
        axpy(1.0, b1_, a1);
        c.hidden.resize(a1.size());
        for (std::size_t i = 0; i < a1.size(); ++i) c.hidden[i] = std::tanh(a1[i]);

        c.pre_dir = detail::matvec(w_dir_, c.hidden);
        axpy(1.0, b_dir_, c.pre_dir);
        c.pre_dir_norm = norm(c.pre_dir);
        if (!(c.pre_dir_norm > 0.0))
            throw std::runtime_error("ToyEncoder: zero direction pre-activation");
        c.emb.mu = scaled(c.pre_dir, 1.0 / c.pre_dir_norm);

        c.pre_kappa = dot(w_kappa_, c.hidden) + b_kappa_;
        const double raw = detail::softplus(c.pre_kappa);
        c.emb.kappa = std::min(cfg_.kappa_max, std::max(cfg_.kappa_min, raw));
        c.kappa_clamped = (raw != c.emb.kappa);
        return c;
    }

    StochasticEmbedding forward(const Vec& x) const { return forward_cached(x).emb; }

    // Accumulates parameter gradients for one view given tangent d_mu and
    // d_kappa. The direction head uses the exact normalization Jacobian
    // (I - mu mu^T)/||pre_dir||; a clamped kappa contributes no gradient.
    void backward(const Cache& c, const Vec& d_mu, double d_kappa,
                  Gradients& acc) const {
        Vec d_pre_dir = tangent_project(d_mu, c.emb.mu);
        for (double& v : d_pre_dir) v /= c.pre_dir_norm;

        const double d_pre_kappa =
            c.kappa_clamped ? 0.0
                            : d_kappa * detail::logistic(c.pre_kappa);

        Vec d_hidden = detail::matTvec(w_dir_, d_pre_dir);
        axpy(d_pre_kappa, w_kappa_, d_hidden);

        Vec d_a1(d_hidden.size());
        for (std::size_t i = 0; i < d_hidden.size(); ++i)
            d_a1[i] = (1.0 - c.hidden[i] * c.hidden[i]) * d_hidden[i];

        detail::add_outer(acc.w_dir, d_pre_dir, c.hidden);
        axpy(1.0, d_pre_dir, acc.b_dir);
        axpy(d_pre_kappa, c.hidden, acc.w_kappa);
        acc.b_kappa += d_pre_kappa;
        detail::add_outer(acc.w1, d_a1, c.x);
        axpy(1.0, d_a1, acc.b1);
    }

    void apply_update(const Gradients& g, double step) {
        axpy(step, g.w1.a, w1_.a);
        axpy(step, g.b1, b1_);
        axpy(step, g.w_dir.a, w_dir_.a);
        axpy(step, g.b_dir, b_dir_);
        axpy(step, g.w_kappa, w_kappa_);
        b_kappa_ += step * g.b_kappa;
    }

    Vec get_params() const {
        Vec p;
        p.reserve(num_params());
        p.insert(p.end(), w1_.a.begin(), w1_.a.end());
        p.insert(p.end(), b1_.begin(), b1_.end());
        p.insert(p.end(), w_dir_.a.begin(), w_dir_.a.end());
        p.insert(p.end(), b_dir_.begin(), b_dir_.end());
        p.insert(p.end(), w_kappa_.begin(), w_kappa_.end());
        p.push_back(b_kappa_);
        return p;
    }

    void set_params(const Vec& p) {
        if (p.size() != static_cast<std::size_t>(num_params()))
            throw std::invalid_argument("ToyEncoder: parameter vector size mismatch");
        std::size_t at = 0;
        auto take = [&](double* dst, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) dst[i] = p[at++];
        };
        take(w1_.a.data(), w1_.a.size());
        take(b1_.data(), b1_.size());
        take(w_dir_.a.data(), w_dir_.a.size());
        take(b_dir_.data(), b_dir_.size());
        take(w_kappa_.data(), w_kappa_.size());
        b_kappa_ = p[at];
    }

    int num_params() const {
        return static_cast<int>(w1_.a.size() + b1_.size() + w_dir_.a.size() +
                                b_dir_.size() + w_kappa_.size() + 1);
    }

    static Vec flatten(const Gradients& g) {
        Vec p;
        p.insert(p.end(), g.w1.a.begin(), g.w1.a.end());
        p.insert(p.end(), g.b1.begin(), g.b1.end());
        p.insert(p.end(), g.w_dir.a.begin(), g.w_dir.a.end());
        p.insert(p.end(), g.b_dir.begin(), g.b_dir.end());
        p.insert(p.end(), g.w_kappa.begin(), g.w_kappa.end());
        p.push_back(g.b_kappa);
        return p;
    }

private:
    EncoderConfig cfg_;
    detail::Mat w1_, w_dir_;
    Vec b1_, b_dir_, w_kappa_;
    double b_kappa_ = 0.0;
};

struct DatasetSpec {
    int num_classes = 4;
    int input_dim = 16;
    double center_scale = 3.0;    // class-center norm
    double cluster_noise = 0.3;   // within-class spread
    double noise_low = 0.1;       // augmentation noise, low-corruption views
    double noise_high = 1.5;      // augmentation noise, high-corruption views
    double high_noise_prob = 0.5;
};

struct View {
    Vec x;
    bool high_noise = false;
};

// Clustered Gaussian data with additive-noise augmentations; positive pairs
// are two augmentations of the same draw, negatives are independent draws.
class SyntheticDataset {
public:
    SyntheticDataset(const DatasetSpec& spec, std::uint64_t seed) : spec_(spec) {
        if (spec.num_classes < 1 || spec.input_dim < 1)
            throw std::domain_error("SyntheticDataset: bad spec");
        Rng rng(mix_seed(seed, 0xDA7A5E7));
        for (int k = 0; k < spec.num_classes; ++k)
            centers_.push_back(scaled(rng.unit_vector(spec.input_dim),
                                      spec.center_scale));
    }

    const std::vector<Vec>& centers() const { return centers_; }

    Vec draw_base(Rng& rng) const {
        const int k = static_cast<int>(rng.uniform() * spec_.num_classes) %
                      spec_.num_classes;
        Vec x = centers_[k];
        for (double& v : x) v += spec_.cluster_noise * rng.normal();
        return x;
    }

    View augment(const Vec& base, Rng& rng) const {
        View v;
        v.high_noise = rng.uniform() < spec_.high_noise_prob;
        const double s = v.high_noise ? spec_.noise_high : spec_.noise_low;
        v.x = base;
        for (double& e : v.x) e += s * rng.normal();
        return v;
    }

    std::pair<View, View> positive_pair(Rng& rng) const {
        const Vec base = draw_base(rng);
        View a = augment(base, rng);
        View b = augment(base, rng);
        return {a, b};
    }

    View negative(Rng& rng) const { return augment(draw_base(rng), rng); }

private:
    DatasetSpec spec_;
    std::vector<Vec> centers_;
};

// Mean squared distance between positive-pair mean directions.
inline double alignment_metric(
    const std::vector<std::pair<Vec, Vec>>& pairs) {
    if (pairs.size() < 1)
        throw std::domain_error("alignment_metric: need at least one pair");
    double s = 0.0;
    for (const auto& [a, b] : pairs) {
        const Vec d = sub(a, b);
        s += dot(d, d);
    }
    return s / pairs.size();
}

// log mean Gaussian-kernel value exp(-2||a-b||^2) over all distinct pairs.
inline double uniformity_metric(const std::vector<Vec>& mus) {
    if (mus.size() < 2)
        throw std::domain_error("uniformity_metric: need at least two points");
    double s = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < mus.size(); ++i)
        for (std::size_t j = i + 1; j < mus.size(); ++j) {
            const Vec d = sub(mus[i], mus[j]);
            s += std::exp(-2.0 * dot(d, d));
            ++n;
        }
    return std::log(s / n);
}

struct TrainConfig {
    EncoderConfig encoder;
    DatasetSpec dataset;
    SimilarityKind similarity = SimilarityKind::mls;
    int negatives = 8;  // M
    int batch_size = 16;
    int steps = 2000;
    double lr = 0.05;
    bool cosine_decay = false;
    double radius = 1.0;  // r; tau = 1/r^2
    int diag_every = 50;
    int probe_pairs = 128;
    double divergence_factor = 10.0;
};

struct DiagnosticsRow {
    long step = 0;
    double loss = 0.0;
    double alignment = 0.0;
    double uniformity = 0.0;
    double mean_kappa_low = 0.0;
    double mean_kappa_high = 0.0;
};

struct TrainResult {
    TrainConfig config;
    std::uint64_t seed = 0;
    ToyEncoder encoder;
    std::vector<DiagnosticsRow> history;
    bool diverged = false;
};

struct ConfidenceReport {
    double mean_kappa_low = 0.0;
    double mean_kappa_high = 0.0;
    long n_low = 0;
    long n_high = 0;
};

// Mean confidence grouped by the views' noise tag.
inline ConfidenceReport confidence_report(const ToyEncoder& encoder,
                                          const std::vector<View>& views) {
    ConfidenceReport rep;
    double lo = 0.0, hi = 0.0;
    for (const View& v : views) {
        const double k = encoder.forward(v.x).kappa;
        if (v.high_noise) {
            hi += k;
            ++rep.n_high;
        } else {
            lo += k;
            ++rep.n_low;
        }
    }
    rep.mean_kappa_low = rep.n_low ? lo / rep.n_low : 0.0;
    rep.mean_kappa_high = rep.n_high ? hi / rep.n_high : 0.0;
    return rep;
}

namespace detail {

// Fixed probe set for diagnostics: pairs plus a shared negative pool, drawn
// once so successive diagnostic rows are comparable.
struct ProbeSet {
    std::vector<std::pair<View, View>> pairs;
    std::vector<View> negatives;

    ProbeSet(const SyntheticDataset& data, int n_pairs, int n_negatives,
             std::uint64_t seed) {
        Rng rng(mix_seed(seed, 0x9B0BE5));
        for (int i = 0; i < n_pairs; ++i) pairs.push_back(data.positive_pair(rng));
        for (int i = 0; i < n_negatives; ++i) negatives.push_back(data.negative(rng));
    }

    std::vector<View> all_views() const {
        std::vector<View> out;
        for (const auto& [a, b] : pairs) {
            out.push_back(a);
            out.push_back(b);
        }
        out.insert(out.end(), negatives.begin(), negatives.end());
        return out;
    }
};

inline DiagnosticsRow evaluate_diagnostics(const ToyEncoder& enc,
                                           const ProbeSet& probe,
                                           const TrainConfig& cfg, long step) {
    const SphereConfig sphere(cfg.encoder.embed_dim, cfg.radius);
    DiagnosticsRow row;
    row.step = step;

    std::vector<StochasticEmbedding> neg_emb;
    neg_emb.reserve(probe.negatives.size());
    for (const View& v : probe.negatives) neg_emb.push_back(enc.forward(v.x));

    std::vector<std::pair<Vec, Vec>> mu_pairs;
    std::vector<Vec> mus;
    double loss = 0.0;
    for (std::size_t i = 0; i < probe.pairs.size(); ++i) {
        const auto& [va, vb] = probe.pairs[i];
        const StochasticEmbedding ea = enc.forward(va.x);
        const StochasticEmbedding eb = enc.forward(vb.x);
        mu_pairs.emplace_back(ea.mu, eb.mu);
        mus.push_back(eb.mu);

        ContrastiveBatch batch;
        batch.anchor = eb;
        batch.positive = ea;
        for (int m = 0; m < cfg.negatives; ++m)
            batch.negatives.push_back(
                neg_emb[(i * cfg.negatives + m) % neg_emb.size()]);
        loss += info_nce(batch, cfg.similarity, sphere).value;
    }
    row.loss = loss / probe.pairs.size();
    row.alignment = alignment_metric(mu_pairs);
    row.uniformity = uniformity_metric(mus);

    const ConfidenceReport rep = confidence_report(enc, probe.all_views());
    row.mean_kappa_low = rep.mean_kappa_low;
    row.mean_kappa_high = rep.mean_kappa_high;
    return row;
}

}  // namespace detail

// Mini-batch SGD on the contrastive loss with manual backprop through the
// encoder. Deterministic for a given (config, seed); diagnostics every
// diag_every steps plus the initial and final state. Sets `diverged` (and
// stops) if the probe loss exceeds divergence_factor times its initial value.
inline TrainResult train(const TrainConfig& cfg, std::uint64_t seed) {
    if (cfg.dataset.input_dim != cfg.encoder.input_dim)
        throw std::invalid_argument("train: dataset/encoder input_dim mismatch");
    if (cfg.negatives < 1 || cfg.batch_size < 1 || cfg.steps < 0)
        throw std::domain_error("train: bad config");

    const SphereConfig sphere(cfg.encoder.embed_dim, cfg.radius);
    SyntheticDataset data(cfg.dataset, mix_seed(seed, 1));
    ToyEncoder enc(cfg.encoder, mix_seed(seed, 2));
    Rng rng(mix_seed(seed, 3));
    const detail::ProbeSet probe(data, cfg.probe_pairs,
                                 std::max(cfg.probe_pairs, cfg.negatives),
                                 mix_seed(seed, 4));

    TrainResult result{cfg, seed, enc, {}, false};
    result.history.push_back(detail::evaluate_diagnostics(enc, probe, cfg, 0));
    const double initial_loss = result.history.front().loss;

    for (int step = 1; step <= cfg.steps; ++step) {
        ToyEncoder::Gradients acc(cfg.encoder);
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto [va, vb] = data.positive_pair(rng);
            ToyEncoder::Cache ca = enc.forward_cached(va.x);
            ToyEncoder::Cache cb = enc.forward_cached(vb.x);
            std::vector<ToyEncoder::Cache> cn;
            cn.reserve(cfg.negatives);
            ContrastiveBatch batch;
            batch.anchor = cb.emb;
            batch.positive = ca.emb;
            for (int m = 0; m < cfg.negatives; ++m) {
                cn.push_back(enc.forward_cached(data.negative(rng).x));
                batch.negatives.push_back(cn.back().emb);
            }
            const BatchGradients bg = info_nce_grad(batch, cfg.similarity, sphere);
            enc.backward(ca, bg.d_mu_positive, bg.d_kappa_positive, acc);
            enc.backward(cb, bg.d_mu_anchor, bg.d_kappa_anchor, acc);
            for (int m = 0; m < cfg.negatives; ++m)
                enc.backward(cn[m], bg.d_mu_negatives[m], bg.d_kappa_negatives[m],
                             acc);
        }
        const double lr_t =
            cfg.cosine_decay
                ? cfg.lr * 0.5 * (1.0 + std::cos(M_PI * (step - 1.0) / cfg.steps))
                : cfg.lr;
        enc.apply_update(acc, -lr_t / cfg.batch_size);

        if (step % cfg.diag_every == 0 || step == cfg.steps) {
            result.history.push_back(
                detail::evaluate_diagnostics(enc, probe, cfg, step));
            if (result.history.back().loss >
                cfg.divergence_factor * std::max(initial_loss, 1e-12)) {
                result.diverged = true;
                break;
            }
        }
    }
    result.encoder = enc;
    return result;
}

}  // namespace vmfc
