#pragma once

#include <string>

#include "tabr/ops.hpp"
#include "tabr/params.hpp"

namespace tabr {

// Embeddings for numerical features. LR is Linear+ReLU per feature, PLR adds
// a trainable periodic stage cos/sin(2*pi*c_j*x_j) before the linear, and
// PLR-lite shares the linear stage across features.
struct NumEmbeddingConfig {
    enum class Scheme { none, lr, plr, plr_lite };
    Scheme scheme = Scheme::none;
    int64_t dim = 24;            // d_emb
    int64_t n_frequencies = 48;  // k_f, PLR variants
    double frequency_scale = 0.01;  // sigma_f, PLR variants

    bool enabled() const { return scheme != Scheme::none; }
    void validate() const {
        if (!enabled()) return;
        check(dim >= 1, "embedding dim must be >= 1");
        check(n_frequencies >= 1, "embedding n_frequencies must be >= 1");
        check(frequency_scale > 0.0, "embedding frequency_scale must be > 0");
    }
};

std::string embedding_scheme_name(NumEmbeddingConfig::Scheme s);
NumEmbeddingConfig::Scheme embedding_scheme_from_name(const std::string& s);

template <class S>
void init_num_embedding_params(ParamStore<S>& ps, const NumEmbeddingConfig& cfg, int64_t p_num,
                               const SeedSequence& seeds) {
    using Scheme = NumEmbeddingConfig::Scheme;
    if (!cfg.enabled() || p_num == 0) return;
    cfg.validate();
    if (cfg.scheme == Scheme::lr) {
        // per-feature Linear(1 -> d_emb)
        ps.add_uniform("emb/weight", {p_num, cfg.dim}, 1.0, seeds);
        ps.add_uniform("emb/bias", {p_num, cfg.dim}, 1.0, seeds);
        return;
    }
    // periodic stage, frequencies ~ Normal(0, sigma_f^2), trainable
    {
        Tensor<S> freq({p_num, cfg.n_frequencies});
        Rng rng = seeds.stream("init/emb/frequencies");
        S* p = freq.mutable_data();
        for (int64_t i = 0; i < freq.numel(); ++i)
            p[i] = static_cast<S>(cfg.frequency_scale * rng.normal());
        ps.add("emb/frequencies", std::move(freq));
    }
    const int64_t lin_in = 2 * cfg.n_frequencies;
    if (cfg.scheme == Scheme::plr) {
        ps.add_uniform("emb/lin_w", {p_num * lin_in, cfg.dim},
                       1.0 / std::sqrt(static_cast<double>(lin_in)), seeds);
        ps.add_uniform("emb/lin_b", {p_num, cfg.dim},
                       1.0 / std::sqrt(static_cast<double>(lin_in)), seeds);
    } else {  // plr_lite: linear shared across features
        ps.add_linear_weight("emb/lin_w", lin_in, cfg.dim, seeds);
        ps.add_linear_bias("emb/lin_b", lin_in, cfg.dim, seeds);
    }
}

// x_num: [n, p_num] node of transformed numeric features.
// Returns [n, p_num * d_emb] (or x_num itself when the scheme is none).
template <class S>
typename Graph<S>::Id embed_numeric(Graph<S>& g, const Leaves<S>& leaves,
                                    const NumEmbeddingConfig& cfg, typename Graph<S>::Id x_num) {
    using Scheme = NumEmbeddingConfig::Scheme;
    if (!cfg.enabled()) return x_num;
    const Tensor<S>& X = g.value(x_num);
    check(X.rank() == 2, "embed_numeric: expected [n, p_num]");
    const int64_t n = X.dim(0), p = X.dim(1);

    if (cfg.scheme == Scheme::lr) {
        // out[:, j*d:(j+1)*d] = relu(x_j * w_j + b_j)
        std::vector<typename Graph<S>::Id> parts;
        parts.reserve(static_cast<size_t>(p));
        for (int64_t j = 0; j < p; ++j) {
            auto xj = ops::slice_cols(g, x_num, j, j + 1);                 // [n,1]
            auto wj = ops::slice_cols(g, ops::gather_rows(g, leaves["emb/weight"], {j}), 0,
                                      cfg.dim);                            // [1,d]
            auto bj = ops::gather_rows(g, leaves["emb/bias"], {j});        // [1,d]
            auto lin = ops::add(g, ops::matmul(g, xj, wj), ops::repeat_rows(g, bj, n));
            parts.push_back(ops::relu(g, lin));
        }
        return ops::concat_cols(g, parts);
    }

    // PLR variants: z_j = [cos(2 pi c_j x_j), sin(2 pi c_j x_j)] in R^{2 k_f}
    const int64_t kf = cfg.n_frequencies;
    std::vector<typename Graph<S>::Id> parts;
    parts.reserve(static_cast<size_t>(p));
    for (int64_t j = 0; j < p; ++j) {
        auto xj = ops::slice_cols(g, x_num, j, j + 1);                     // [n,1]
        auto cj = ops::gather_rows(g, leaves["emb/frequencies"], {j});     // [1,kf]
        auto phase = ops::scale(g, ops::matmul(g, xj, cj), 2.0 * M_PI);    // [n,kf]
        auto z = ops::concat_cols(g, {ops::cos_op(g, phase), ops::sin_op(g, phase)});
        typename Graph<S>::Id lin;
        if (cfg.scheme == Scheme::plr) {
            std::vector<int64_t> w_rows(static_cast<size_t>(2 * kf));
            for (int64_t r = 0; r < 2 * kf; ++r)
                w_rows[static_cast<size_t>(r)] = j * 2 * kf + r;
            auto wj = ops::gather_rows(g, leaves["emb/lin_w"], w_rows);    // [2kf, d]
            auto bj = ops::gather_rows(g, leaves["emb/lin_b"], {j});       // [1, d]
            lin = ops::add(g, ops::matmul(g, z, wj), ops::repeat_rows(g, bj, n));
        } else {
            lin = ops::linear(g, z, leaves["emb/lin_w"], leaves["emb/lin_b"]);
        }
        parts.push_back(ops::relu(g, lin));
    }
    return ops::concat_cols(g, parts);
}

// output width of the embedding stage
inline int64_t embedded_numeric_dim(const NumEmbeddingConfig& cfg, int64_t p_num) {
    return cfg.enabled() ? p_num * cfg.dim : p_num;
}

}  // namespace tabr
