#pragma once

#include <cmath>
#include <vector>

#include "tabr/candidate_store.hpp"
#include "tabr/data_context.hpp"

namespace tabr {

template <class S>
struct PredictOptions {
    const CandidateStore<S>* store = nullptr;  // retrieve over a store instead of ctx candidates
    const Tensor<S>* remove_projection = nullptr;
    bool want_records = false;
    bool exclude_self = false;  // drop the target's own row from candidacy (training rows)
    int64_t eval_batch = 512;
};

template <class S>
struct PredictOutput {
    Tensor<S> raw;  // [n, output_dim] logits / normalized regression outputs
    std::vector<ContextRecord> records;
};

// Eval-mode forward over arbitrary dataset rows. Candidate encodings are
// computed once with the current parameters (or taken from the store).
template <class S>
PredictOutput<S> predict_tabr(const TabrModel<S>& model, const DataContext<S>& ctx,
                              const std::vector<int64_t>& rows,
                              const PredictOptions<S>& po = {}) {
    if (po.store)
        check(po.store->param_version == model.params.version(),
              "predict: store parameter version does not match the model");
    typename TabrModel<S>::Encoded enc;
    CandidateBatch<S> cand;
    if (po.store) {
        cand.pre_x_tilde = &po.store->x_tilde;
        cand.pre_keys = &po.store->keys;
        cand.y_reg = &po.store->y_reg;
        cand.y_class = &po.store->y_class;
    } else {
        enc = model.encode_candidates(ctx.x_cand);
        cand.pre_x_tilde = &enc.x_tilde;
        cand.pre_keys = &enc.keys;
        cand.y_reg = &ctx.cand_y_reg;
        cand.y_class = &ctx.cand_y_class;
    }

    PredictOutput<S> out;
    out.raw = Tensor<S>({static_cast<int64_t>(rows.size()), model.output_dim()});
    if (po.want_records) out.records.reserve(rows.size());

    for (size_t start = 0; start < rows.size(); start += static_cast<size_t>(po.eval_batch)) {
        const size_t end = std::min(rows.size(), start + static_cast<size_t>(po.eval_batch));
        std::vector<int64_t> chunk(rows.begin() + static_cast<int64_t>(start),
                                   rows.begin() + static_cast<int64_t>(end));
        Tensor<S> x = gather_matrix_rows(ctx.x_all, chunk);
        std::vector<int64_t> self_idx;
        if (po.exclude_self) {
            self_idx.reserve(chunk.size());
            for (int64_t r : chunk) self_idx.push_back(ctx.row_to_cand[static_cast<size_t>(r)]);
        }

        Graph<S> g;
        Leaves<S> lv = register_leaves(g, model.params, /*requires_grad=*/false);
        ForwardOptions<S> fo;
        fo.train = false;
        fo.want_records = po.want_records;
        fo.remove_projection = po.remove_projection;
        if (po.exclude_self) fo.self_index = &self_idx;
        auto res = model.forward(g, lv, x, cand, fo);

        const Tensor<S>& pred = g.value(res.prediction);
        std::copy(pred.data(), pred.data() + pred.numel(),
                  out.raw.mutable_data() + static_cast<int64_t>(start) * model.output_dim());
        for (auto& r : res.records) out.records.push_back(std::move(r));
    }
    return out;
}

template <class S>
Tensor<S> predict_mlp(const MlpModel<S>& model, const DataContext<S>& ctx,
                      const std::vector<int64_t>& rows, int64_t eval_batch = 4096) {
    Tensor<S> out({static_cast<int64_t>(rows.size()), model.output_dim()});
    for (size_t start = 0; start < rows.size(); start += static_cast<size_t>(eval_batch)) {
        const size_t end = std::min(rows.size(), start + static_cast<size_t>(eval_batch));
        std::vector<int64_t> chunk(rows.begin() + static_cast<int64_t>(start),
                                   rows.begin() + static_cast<int64_t>(end));
        Graph<S> g;
        Leaves<S> lv = register_leaves(g, model.params, false);
        auto pred = model.forward(g, lv, gather_matrix_rows(ctx.x_all, chunk), false, nullptr);
        const Tensor<S>& p = g.value(pred);
        std::copy(p.data(), p.data() + p.numel(),
                  out.mutable_data() + static_cast<int64_t>(start) * model.output_dim());
    }
    return out;
}

// Contexts of all training objects under the current parameters: full scan,
// eval mode, own row excluded. Only similarities and the softmax are needed,
// so this skips the value module and predictor entirely.
template <class S>
std::vector<ContextRecord> collect_contexts(const TabrModel<S>& model, const DataContext<S>& ctx,
                                            int64_t eval_batch = 2048,
                                            int64_t* similarity_evals = nullptr) {
    auto enc = model.encode_candidates(ctx.x_cand);
    const int64_t n_cand = enc.keys.dim(0);
    const int64_t m = model.retrieval.m;
    std::vector<ContextRecord> records;
    records.reserve(ctx.train_rows.size());

    for (size_t start = 0; start < ctx.train_rows.size();
         start += static_cast<size_t>(eval_batch)) {
        const size_t end =
            std::min(ctx.train_rows.size(), start + static_cast<size_t>(eval_batch));
        std::vector<int64_t> chunk(ctx.train_rows.begin() + static_cast<int64_t>(start),
                                   ctx.train_rows.begin() + static_cast<int64_t>(end));
        // encode the chunk and form queries/keys (eval mode, no grad)
        Graph<S> g;
        Leaves<S> lv = register_leaves(g, model.params, false);
        Rng dummy(0);
        auto x = g.leaf(gather_matrix_rows(ctx.x_all, chunk), false);
        auto xt = model.encode(g, lv, x, false, &dummy);
        if (model.has_pre_retrieval_norm())
            xt = ops::layer_norm(g, xt, lv["retr/pre_ln_g"], lv["retr/pre_ln_b"]);
        auto k_t = ops::linear(g, xt, lv["retr/wk_w"], lv["retr/wk_b"]);
        auto query = k_t;
        if (model.uses_queries())
            query = ops::linear(g, xt, lv["retr/wq_w"], lv["retr/wq_b"]);

        ScanResult<S> scan = scan_similarities<S>(model.retrieval, g.value(query), enc.keys);
        if (similarity_evals) *similarity_evals += scan.similarity_evals;
        const S* sc = scan.scores.data();
        for (size_t b = 0; b < chunk.size(); ++b) {
            const int64_t self = ctx.row_to_cand[static_cast<size_t>(chunk[b])];
            auto sel =
                top_m_indices<S>(sc + static_cast<int64_t>(b) * n_cand, n_cand, m, self);
            ContextRecord rec;
            rec.indices = sel;
            rec.weights.resize(sel.size());
            // softmax over the selected scores
            double mx = -std::numeric_limits<double>::infinity();
            for (int32_t id : sel)
                mx = std::max(mx, static_cast<double>(sc[static_cast<int64_t>(b) * n_cand + id]));
            double sum = 0;
            for (size_t j = 0; j < sel.size(); ++j) {
                double e = std::exp(
                    static_cast<double>(sc[static_cast<int64_t>(b) * n_cand + sel[j]]) - mx);
                rec.weights[j] = e;
                sum += e;
            }
            for (double& w : rec.weights) w /= sum;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

// user-space predictions: de-normalized values (regression), P(y=1)
// (binclass), or class probabilities (multiclass), row-major
template <class S>
std::vector<double> to_user_predictions(const Tensor<S>& raw, Task task,
                                        const Preprocessor& pp) {
    const int64_t n = raw.dim(0), k = raw.dim(1);
    std::vector<double> out;
    if (task == Task::regression) {
        out.resize(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i)
            out[static_cast<size_t>(i)] = pp.denormalize_target(static_cast<double>(raw.at(i * k)));
    } else if (task == Task::binclass) {
        out.resize(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i)
            out[static_cast<size_t>(i)] = 1.0 / (1.0 + std::exp(-static_cast<double>(raw.at(i * k))));
    } else {
        out.resize(static_cast<size_t>(n * k));
        for (int64_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int64_t j = 0; j < k; ++j) mx = std::max(mx, static_cast<double>(raw.at(i * k + j)));
            double sum = 0;
            for (int64_t j = 0; j < k; ++j) {
                double e = std::exp(static_cast<double>(raw.at(i * k + j)) - mx);
                out[static_cast<size_t>(i * k + j)] = e;
                sum += e;
            }
            for (int64_t j = 0; j < k; ++j) out[static_cast<size_t>(i * k + j)] /= sum;
        }
    }
    return out;
}

}  // namespace tabr
