#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabr/embeddings.hpp"
#include "tabr/ops.hpp"
#include "tabr/params.hpp"
#include "tabr/preprocess.hpp"
#include "tabr/retrieval.hpp"

namespace tabr {

struct BackboneConfig {
    int64_t d = 265;
    int64_t n_encoder_blocks = 0;   // N_E
    int64_t n_predictor_blocks = 1; // N_P
    double ffn_dropout = 0.0;
    NumEmbeddingConfig embedding;

    void validate() const {
        check(d >= 1, "model width d must be >= 1");
        check(n_encoder_blocks >= 0, "N_E must be >= 0");
        check(n_predictor_blocks >= 1, "N_P must be >= 1");
        check(ffn_dropout >= 0.0 && ffn_dropout < 1.0, "ffn dropout must be in [0,1)");
        embedding.validate();
    }
};

template <class S>
Tensor<S> matrix_to_tensor(const std::vector<double>& m, int64_t rows, int64_t cols) {
    check(static_cast<int64_t>(m.size()) == rows * cols, "matrix_to_tensor: size mismatch");
    Tensor<S> t({rows, cols});
    S* p = t.mutable_data();
    for (size_t i = 0; i < m.size(); ++i) p[i] = static_cast<S>(m[i]);
    return t;
}

// dense feature rows for a subset of dataset rows
template <class S>
Tensor<S> gather_matrix_rows(const Tensor<S>& m, const std::vector<int64_t>& rows) {
    const int64_t p = m.dim(1);
    Tensor<S> t({static_cast<int64_t>(rows.size()), p});
    S* out = t.mutable_data();
    const S* src = m.data();
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy(src + rows[i] * p, src + (rows[i] + 1) * p, out + static_cast<int64_t>(i) * p);
    return t;
}

// Candidate side of a retrieval forward: either raw features to be encoded
// with the current parameters, or encodings precomputed by a candidate store.
template <class S>
struct CandidateBatch {
    const Tensor<S>* features = nullptr;     // [N, p_in]
    const Tensor<S>* pre_x_tilde = nullptr;  // [N, d], post shared-LN
    const Tensor<S>* pre_keys = nullptr;     // [N, d]
    const std::vector<double>* y_reg = nullptr;    // normalized labels
    const std::vector<int64_t>* y_class = nullptr;

    int64_t count() const {
        if (features) return features->dim(0);
        check(pre_keys != nullptr, "candidate batch has neither features nor encodings");
        return pre_keys->dim(0);
    }
};

template <class S>
struct ForwardOptions {
    bool train = false;
    Rng* dropout_rng = nullptr;
    // per-target index of the target inside the candidate set, or -1
    const std::vector<int64_t>* self_index = nullptr;
    // per-target frozen contexts (candidate indices); skips the full scan
    const std::vector<std::vector<int32_t>>* frozen_contexts = nullptr;
    bool want_records = false;
    // analysis hook: unit direction removed from the T-module output
    const Tensor<S>* remove_projection = nullptr;
};

template <class S>
struct ForwardResult {
    typename Graph<S>::Id prediction = -1;  // [B, output_dim]
    std::vector<ContextRecord> records;
    int64_t encoded_candidate_rows = 0;
    int64_t similarity_evals = 0;
};

// Retrieval-augmented model: input module -> encoder E -> retrieval module R
// (residual) -> predictor P -> head.
template <class S>
class TabrModel {
public:
    Task task = Task::regression;
    int64_t n_classes = 0;
    int64_t p_num = 0;
    int64_t p_rest = 0;  // binary + one-hot widths
    BackboneConfig backbone;
    RetrievalConfig retrieval;
    ParamStore<S> params;

    TabrModel() = default;

    TabrModel(Task task_, int64_t n_classes_, int64_t p_num_, int64_t p_rest_,
              BackboneConfig bb, RetrievalConfig rc, const SeedSequence& seeds)
        : task(task_), n_classes(n_classes_), p_num(p_num_), p_rest(p_rest_),
          backbone(std::move(bb)), retrieval(rc) {
        backbone.validate();
        retrieval.validate();
        if (task != Task::regression)
            check(n_classes >= 2, "classification model needs n_classes >= 2");
        build_params(seeds);
    }

    int64_t output_dim() const {
        return task == Task::multiclass ? n_classes : 1;
    }

    int64_t input_width() const {
        return embedded_numeric_dim(backbone.embedding, p_num) + p_rest;
    }

    bool uses_queries() const { return retrieval.similarity == SimilarityKind::dot_qk; }
    bool uses_wv() const {
        return retrieval.value == ValueKind::wv || retrieval.value == ValueKind::wy_wv;
    }
    bool uses_wy() const { return retrieval.value != ValueKind::wv; }
    bool uses_t() const { return retrieval.value == ValueKind::wy_t; }
    bool has_pre_retrieval_norm() const { return backbone.n_encoder_blocks > 0; }

    // --- forward pieces -----------------------------------------------------

    using Id = typename Graph<S>::Id;

    // input module + encoder E; x: [n, p_num + p_rest]
    Id encode(Graph<S>& g, const Leaves<S>& lv, Id x, bool train, Rng* rng) const {
        const Tensor<S>& X = g.value(x);
        check(X.rank() == 2 && X.dim(1) == p_num + p_rest,
              "encode: input width " + shape_str(X.shape()) + " does not match preprocessor (" +
                  std::to_string(p_num + p_rest) + ")");
        Id assembled = x;
        if (backbone.embedding.enabled() && p_num > 0) {
            Id num = ops::slice_cols(g, x, 0, p_num);
            Id emb = embed_numeric(g, lv, backbone.embedding, num);
            if (p_rest > 0) {
                Id rest = ops::slice_cols(g, x, p_num, p_num + p_rest);
                assembled = ops::concat_cols<S>(g, {emb, rest});
            } else {
                assembled = emb;
            }
        }
        Id v = ops::linear(g, assembled, lv["input/w"], lv["input/b"]);
        for (int64_t i = 0; i < backbone.n_encoder_blocks; ++i)
            v = block(g, lv, v, "enc" + std::to_string(i), /*skip_ln=*/i == 0, train, rng);
        return v;
    }

    Id block(Graph<S>& g, const Leaves<S>& lv, Id h, const std::string& prefix, bool skip_ln,
             bool train, Rng* rng) const {
        Id u = h;
        if (!skip_ln) u = ops::layer_norm(g, u, lv[prefix + "/ln_g"], lv[prefix + "/ln_b"]);
        u = ops::linear(g, u, lv[prefix + "/w1"], lv[prefix + "/b1"]);
        u = ops::relu(g, u);
        u = ops::dropout(g, u, backbone.ffn_dropout, *rng, train);
        u = ops::linear(g, u, lv[prefix + "/w2"], lv[prefix + "/b2"]);
        return ops::add(g, h, u);
    }

    Id predictor(Graph<S>& g, const Leaves<S>& lv, Id h, bool train, Rng* rng) const {
        for (int64_t j = 0; j < backbone.n_predictor_blocks; ++j)
            h = block(g, lv, h, "pred" + std::to_string(j), /*skip_ln=*/false, train, rng);
        Id n = ops::layer_norm(g, h, lv["head/ln_g"], lv["head/ln_b"]);
        return ops::linear(g, ops::relu(g, n), lv["head/w"], lv["head/b"]);
    }

    ForwardResult<S> forward(Graph<S>& g, const Leaves<S>& lv, const Tensor<S>& x_targets,
                             const CandidateBatch<S>& cand, const ForwardOptions<S>& opt) const;

    // candidate encodings as a store would hold them: post shared-LN x~ and keys
    struct Encoded {
        Tensor<S> x_tilde;  // [N, d]
        Tensor<S> keys;     // [N, d]
    };

    Encoded encode_candidates(const Tensor<S>& features) const {
        Graph<S> g;
        Leaves<S> lv = register_leaves(g, params, /*requires_grad=*/false);
        Rng dummy(0);
        Id x = g.leaf(features, false);
        Id enc = encode(g, lv, x, /*train=*/false, &dummy);
        if (has_pre_retrieval_norm())
            enc = ops::layer_norm(g, enc, lv["retr/pre_ln_g"], lv["retr/pre_ln_b"]);
        Id keys = ops::linear(g, enc, lv["retr/wk_w"], lv["retr/wk_b"]);
        return {g.value(enc).clone(), g.value(keys).clone()};
    }

    Id loss(Graph<S>& g, Id prediction, const std::vector<double>& y_reg_norm,
            const std::vector<int64_t>& y_class) const {
        const int64_t n = g.value(prediction).dim(0);
        if (task == Task::regression) {
            check(static_cast<int64_t>(y_reg_norm.size()) == n, "loss: target count mismatch");
            Tensor<S> t({n, 1});
            for (int64_t i = 0; i < n; ++i)
                t.mutable_data()[i] = static_cast<S>(y_reg_norm[static_cast<size_t>(i)]);
            return ops::mse_loss(g, prediction, g.leaf(t, false));
        }
        check(static_cast<int64_t>(y_class.size()) == n, "loss: label count mismatch");
        if (task == Task::binclass) return ops::bce_logits(g, prediction, y_class);
        return ops::cross_entropy_logits(g, prediction, y_class);
    }

private:
    void build_params(const SeedSequence& seeds) {
        const int64_t d = backbone.d;
        init_num_embedding_params(params, backbone.embedding, p_num, seeds);
        params.add_linear_weight("input/w", input_width(), d, seeds);
        params.add_linear_bias("input/b", input_width(), d, seeds);
        for (int64_t i = 0; i < backbone.n_encoder_blocks; ++i)
            add_block_params("enc" + std::to_string(i), /*with_ln=*/i != 0, seeds);
        if (has_pre_retrieval_norm()) {
            params.add_ones("retr/pre_ln_g", {d});
            params.add_zeros("retr/pre_ln_b", {d});
        }
        if (uses_queries()) {
            params.add_linear_weight("retr/wq_w", d, d, seeds);
            params.add_linear_bias("retr/wq_b", d, d, seeds);
        }
        params.add_linear_weight("retr/wk_w", d, d, seeds);
        params.add_linear_bias("retr/wk_b", d, d, seeds);
        if (uses_wv()) {
            params.add_linear_weight("retr/wv_w", d, d, seeds);
            params.add_linear_bias("retr/wv_b", d, d, seeds);
        }
        if (uses_wy()) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(d));
            if (task == Task::regression) {
                params.add_uniform("retr/wy_w", {1, d}, bound, seeds);
                params.add_uniform("retr/wy_b", {d}, bound, seeds);
            } else {
                params.add_uniform("retr/wy_table", {n_classes, d}, bound, seeds);
            }
        }
        if (uses_t()) {
            params.add_linear_weight("retr/t_w1", d, 2 * d, seeds);
            params.add_linear_bias("retr/t_b1", d, 2 * d, seeds);
            params.add_linear_weight("retr/t_w2", 2 * d, d, seeds);  // no bias
        }
        for (int64_t j = 0; j < backbone.n_predictor_blocks; ++j)
            add_block_params("pred" + std::to_string(j), /*with_ln=*/true, seeds);
        params.add_ones("head/ln_g", {d});
        params.add_zeros("head/ln_b", {d});
        params.add_linear_weight("head/w", d, output_dim(), seeds);
        params.add_linear_bias("head/b", d, output_dim(), seeds);
    }

    void add_block_params(const std::string& prefix, bool with_ln, const SeedSequence& seeds) {
        const int64_t d = backbone.d;
        if (with_ln) {
            params.add_ones(prefix + "/ln_g", {d});
            params.add_zeros(prefix + "/ln_b", {d});
        }
        params.add_linear_weight(prefix + "/w1", d, 2 * d, seeds);
        params.add_linear_bias(prefix + "/b1", d, 2 * d, seeds);
        params.add_linear_weight(prefix + "/w2", 2 * d, d, seeds);
        params.add_linear_bias(prefix + "/b2", 2 * d, d, seeds);
    }
};

template <class S>
ForwardResult<S> TabrModel<S>::forward(Graph<S>& g, const Leaves<S>& lv,
                                       const Tensor<S>& x_targets, const CandidateBatch<S>& cand,
                                       const ForwardOptions<S>& opt) const {
    ForwardResult<S> out;
    const int64_t batch = x_targets.dim(0);
    const int64_t n_cand = cand.count();
    const int64_t d = backbone.d;
    check(n_cand >= 1, "retrieval requires a nonempty candidate set");
    Rng dummy_rng(0);
    Rng* rng = opt.dropout_rng ? opt.dropout_rng : &dummy_rng;
    if (opt.train) check(opt.dropout_rng != nullptr, "train-mode forward needs a dropout stream");

    // ---- encode targets
    Id x_t = g.leaf(x_targets, false);
    Id xt = encode(g, lv, x_t, opt.train, rng);  // [B, d], pre shared-LN
    Id xt_r = xt;                                // what R consumes
    if (has_pre_retrieval_norm())
        xt_r = ops::layer_norm(g, xt_r, lv["retr/pre_ln_g"], lv["retr/pre_ln_b"]);
    Id k_t = ops::linear(g, xt_r, lv["retr/wk_w"], lv["retr/wk_b"]);
    Id q_t = -1;
    if (uses_queries()) q_t = ops::linear(g, xt_r, lv["retr/wq_w"], lv["retr/wq_b"]);

    // ---- candidate encodings and context selection
    // gather_pos: rows in the encoded candidate node; cand_ids: logical ids
    std::vector<int64_t> gather_pos;
    std::vector<int64_t> cand_ids;
    int64_t width = 0;  // contexts per target (uniform across the batch)
    Id xc_r = -1;       // [*, d] post shared-LN candidate representations
    Id k_c = -1;

    auto encode_cand_features = [&](const Tensor<S>& rows) {
        Id xc = encode(g, lv, g.leaf(rows, false), opt.train, rng);
        out.encoded_candidate_rows += rows.dim(0);
        if (has_pre_retrieval_norm())
            xc = ops::layer_norm(g, xc, lv["retr/pre_ln_g"], lv["retr/pre_ln_b"]);
        return xc;
    };

    if (opt.frozen_contexts) {
        const auto& ctx = *opt.frozen_contexts;
        check(static_cast<int64_t>(ctx.size()) == batch, "frozen contexts: batch mismatch");
        width = static_cast<int64_t>(ctx[0].size());
        // union of the batch's contexts, encoded once
        std::vector<int64_t> union_rows;
        {
            std::vector<int32_t> all;
            for (const auto& c : ctx) {
                check(static_cast<int64_t>(c.size()) == width,
                      "frozen contexts must have uniform size");
                all.insert(all.end(), c.begin(), c.end());
            }
            std::sort(all.begin(), all.end());
            all.erase(std::unique(all.begin(), all.end()), all.end());
            union_rows.assign(all.begin(), all.end());
        }
        std::unordered_map<int64_t, int64_t> pos;
        pos.reserve(union_rows.size() * 2);
        for (size_t i = 0; i < union_rows.size(); ++i)
            pos[union_rows[i]] = static_cast<int64_t>(i);

        if (cand.features) {
            xc_r = encode_cand_features(gather_matrix_rows(*cand.features, union_rows));
        } else {
            Tensor<S> sub = gather_matrix_rows(*cand.pre_x_tilde, union_rows);
            xc_r = g.leaf(sub, false);
        }
        if (cand.pre_keys) {
            k_c = g.leaf(gather_matrix_rows(*cand.pre_keys, union_rows), false);
        } else {
            k_c = ops::linear(g, xc_r, lv["retr/wk_w"], lv["retr/wk_b"]);
        }
        gather_pos.reserve(static_cast<size_t>(batch * width));
        cand_ids.reserve(static_cast<size_t>(batch * width));
        for (const auto& c : ctx)
            for (int32_t id : c) {
                gather_pos.push_back(pos.at(id));
                cand_ids.push_back(id);
            }
    } else {
        if (cand.features) {
            xc_r = encode_cand_features(*cand.features);
        } else {
            xc_r = g.leaf(*cand.pre_x_tilde, false);
        }
        if (cand.pre_keys) {
            k_c = g.leaf(*cand.pre_keys, false);
        } else {
            k_c = ops::linear(g, xc_r, lv["retr/wk_w"], lv["retr/wk_b"]);
        }

        // full scan on values (selection itself is not differentiable)
        ScanResult<S> scan = scan_similarities<S>(
            retrieval, g.value(uses_queries() ? q_t : k_t), g.value(k_c));
        out.similarity_evals += scan.similarity_evals;

        // uniform context width: all targets in a batch share the same pool size
        bool any_self = false, all_self = true;
        for (int64_t b = 0; b < batch; ++b) {
            int64_t self = opt.self_index ? (*opt.self_index)[static_cast<size_t>(b)] : -1;
            if (self >= 0)
                any_self = true;
            else
                all_self = false;
        }
        check(!any_self || all_self, "mixed self/non-self batch");
        const int64_t avail = n_cand - (any_self ? 1 : 0);
        width = std::min<int64_t>(retrieval.m, avail);
        check(width >= 1, "no candidates available after self-removal");
        if (width < retrieval.m)
            warn("only " + std::to_string(width) + " candidates available (m=" +
                 std::to_string(retrieval.m) + "); using all");

        gather_pos.reserve(static_cast<size_t>(batch * width));
        cand_ids.reserve(static_cast<size_t>(batch * width));
        const S* sc = scan.scores.data();
        for (int64_t b = 0; b < batch; ++b) {
            int64_t self = opt.self_index ? (*opt.self_index)[static_cast<size_t>(b)] : -1;
            auto sel = top_m_indices<S>(sc + b * n_cand, n_cand, width, self);
            for (int32_t id : sel) {
                gather_pos.push_back(id);
                cand_ids.push_back(id);
            }
        }
    }

    const int64_t n_pairs = batch * width;

    // ---- differentiable scores over the selected contexts
    const double sim_scale =
        retrieval.scale_by_sqrt_d ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
    Id k_sel = ops::gather_rows(g, k_c, gather_pos);     // [B*w, d]
    Id k_rep = ops::repeat_rows(g, k_t, width);          // [B*w, d]
    Id key_diff = ops::sub(g, k_rep, k_sel);             // reused by the T module
    Id scores;
    if (retrieval.similarity == SimilarityKind::l2_key) {
        Id d2 = ops::sum_cols(g, ops::mul(g, key_diff, key_diff));
        scores = ops::scale(g, ops::reshape(g, d2, {batch, width}), -sim_scale);
    } else {
        Id q_rep = ops::repeat_rows(g, q_t, width);
        Id dots = ops::sum_cols(g, ops::mul(g, q_rep, k_sel));
        scores = ops::scale(g, ops::reshape(g, dots, {batch, width}), sim_scale);
    }

    if (retrieval.include_self) {
        Id self_col;
        if (retrieval.similarity == SimilarityKind::l2_key) {
            // S(x, x) = -||k - k||^2 = 0 with zero gradient
            self_col = g.leaf(Tensor<S>::zeros({batch, 1}), false);
        } else {
            Id dots = ops::sum_cols(g, ops::mul(g, q_t, k_t));
            self_col = ops::scale(g, ops::reshape(g, dots, {batch, 1}), sim_scale);
        }
        scores = ops::concat_cols<S>(g, {scores, self_col});
    }

    Id weights = ops::softmax(g, scores);  // [B, w(+1)]

    if (opt.want_records) {
        out.records.resize(static_cast<size_t>(batch));
        const S* wv = g.value(weights).data();
        const int64_t stride = width + (retrieval.include_self ? 1 : 0);
        for (int64_t b = 0; b < batch; ++b) {
            ContextRecord& r = out.records[static_cast<size_t>(b)];
            r.indices.resize(static_cast<size_t>(width));
            r.weights.resize(static_cast<size_t>(width));
            for (int64_t j = 0; j < width; ++j) {
                r.indices[static_cast<size_t>(j)] =
                    static_cast<int32_t>(cand_ids[static_cast<size_t>(b * width + j)]);
                r.weights[static_cast<size_t>(j)] = static_cast<double>(wv[b * stride + j]);
            }
            if (retrieval.include_self)
                r.self_weight = static_cast<double>(wv[b * stride + width]);
        }
    }

    // attention dropout; intentionally not renormalized
    Id weights_d = ops::dropout(g, weights, retrieval.attention_dropout, *rng, opt.train);

    // ---- values
    Id value_ctx = -1;
    Id y_part = -1;
    if (uses_wy()) {
        if (task == Task::regression) {
            Tensor<S> y_sel({n_pairs, 1});
            for (int64_t i = 0; i < n_pairs; ++i)
                y_sel.mutable_data()[i] = static_cast<S>(
                    (*cand.y_reg)[static_cast<size_t>(cand_ids[static_cast<size_t>(i)])]);
            y_part = ops::linear(g, g.leaf(y_sel, false), lv["retr/wy_w"], lv["retr/wy_b"]);
        } else {
            std::vector<int64_t> y_ids(static_cast<size_t>(n_pairs));
            for (int64_t i = 0; i < n_pairs; ++i)
                y_ids[static_cast<size_t>(i)] =
                    (*cand.y_class)[static_cast<size_t>(cand_ids[static_cast<size_t>(i)])];
            y_part = ops::embedding(g, lv["retr/wy_table"], y_ids);
        }
    }
    auto t_module = [&](Id diff) {
        Id h = ops::relu(g, ops::linear(g, diff, lv["retr/t_w1"], lv["retr/t_b1"]));
        h = ops::dropout(g, h, backbone.ffn_dropout, *rng, opt.train);
        Id t_out = ops::matmul(g, h, lv["retr/t_w2"]);  // LinearWithoutBias
        if (opt.remove_projection) {
            const Tensor<S>& u = *opt.remove_projection;
            Id u_col = g.leaf(u.reshaped({d, 1}), false);
            Id u_row = g.leaf(u.reshaped({1, d}), false);
            t_out = ops::sub(g, t_out, ops::matmul(g, ops::matmul(g, t_out, u_col), u_row));
        }
        return t_out;
    };
    if (uses_t()) {
        Id t_out = t_module(key_diff);
        value_ctx = ops::add(g, y_part, t_out);
    } else {
        Id x_sel = ops::gather_rows(g, xc_r, gather_pos);
        Id wv_out = ops::linear(g, x_sel, lv["retr/wv_w"], lv["retr/wv_b"]);
        value_ctx = uses_wy() ? ops::add(g, y_part, wv_out) : wv_out;
    }

    // ---- aggregate
    Id r;
    if (retrieval.include_self) {
        Id w_ctx = ops::slice_cols(g, weights_d, 0, width);
        Id w_self = ops::slice_cols(g, weights_d, width, width + 1);
        Id r_ctx = ops::weighted_sum_rows(g, w_ctx, value_ctx);
        // the appended self carries no label: only the label-free value part
        Id v_self;
        if (uses_t()) {
            v_self = t_module(ops::sub(g, k_t, k_t));
        } else {
            v_self = ops::linear(g, xt_r, lv["retr/wv_w"], lv["retr/wv_b"]);
        }
        r = ops::add(g, r_ctx, ops::rowwise_scale(g, v_self, w_self));
    } else {
        r = ops::weighted_sum_rows(g, weights_d, value_ctx);
    }

    Id enriched = ops::add(g, xt, r);
    out.prediction = predictor(g, lv, enriched, opt.train, rng);
    return out;
}

// Plain MLP baseline: [Linear -> ReLU -> Dropout] x L -> Linear head. No
// retrieval, no LayerNorm.
struct MlpConfig {
    int64_t n_layers = 3;
    int64_t width = 384;
    double dropout = 0.0;

    void validate() const {
        check(n_layers >= 1, "mlp n_layers must be >= 1");
        check(width >= 1, "mlp width must be >= 1");
        check(dropout >= 0.0 && dropout < 1.0, "mlp dropout must be in [0,1)");
    }
};

template <class S>
class MlpModel {
public:
    Task task = Task::regression;
    int64_t n_classes = 0;
    int64_t p_in = 0;
    MlpConfig cfg;
    ParamStore<S> params;

    MlpModel() = default;

    MlpModel(Task task_, int64_t n_classes_, int64_t p_in_, MlpConfig c,
             const SeedSequence& seeds)
        : task(task_), n_classes(n_classes_), p_in(p_in_), cfg(c) {
        cfg.validate();
        int64_t in = p_in;
        for (int64_t i = 0; i < cfg.n_layers; ++i) {
            params.add_linear_weight("mlp" + std::to_string(i) + "/w", in, cfg.width, seeds);
            params.add_linear_bias("mlp" + std::to_string(i) + "/b", in, cfg.width, seeds);
            in = cfg.width;
        }
        params.add_linear_weight("head/w", in, output_dim(), seeds);
        params.add_linear_bias("head/b", in, output_dim(), seeds);
    }

    int64_t output_dim() const { return task == Task::multiclass ? n_classes : 1; }

    using Id = typename Graph<S>::Id;

    Id forward(Graph<S>& g, const Leaves<S>& lv, const Tensor<S>& x, bool train,
               Rng* rng) const {
        Rng dummy(0);
        if (!rng) rng = &dummy;
        Id h = g.leaf(x, false);
        for (int64_t i = 0; i < cfg.n_layers; ++i) {
            const std::string p = "mlp" + std::to_string(i);
            h = ops::relu(g, ops::linear(g, h, lv[p + "/w"], lv[p + "/b"]));
            h = ops::dropout(g, h, cfg.dropout, *rng, train);
        }
        return ops::linear(g, h, lv["head/w"], lv["head/b"]);
    }

    Id loss(Graph<S>& g, Id prediction, const std::vector<double>& y_reg_norm,
            const std::vector<int64_t>& y_class) const {
        const int64_t n = g.value(prediction).dim(0);
        if (task == Task::regression) {
            Tensor<S> t({n, 1});
            for (int64_t i = 0; i < n; ++i)
                t.mutable_data()[i] = static_cast<S>(y_reg_norm[static_cast<size_t>(i)]);
            return ops::mse_loss(g, prediction, g.leaf(t, false));
        }
        if (task == Task::binclass) return ops::bce_logits(g, prediction, y_class);
        return ops::cross_entropy_logits(g, prediction, y_class);
    }
};

}  // namespace tabr
