#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "tabr/adamw.hpp"
#include "tabr/infer.hpp"
#include "tabr/metrics.hpp"

namespace tabr {

struct TrainConfig {
    int64_t batch_size = 256;
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int64_t patience = 16;
    int64_t max_epochs = -1;  // -1: unbounded, early stopping terminates
    uint64_t seed = 0;
    int64_t freeze_epoch = -1;  // N >= 0: freeze training contexts after epoch N
    bool collect_delta_context = true;
    int64_t eval_batch = 512;

    void validate() const {
        check(batch_size >= 1, "batch_size must be >= 1");
        check(patience >= 0, "patience must be >= 0");
        check(learning_rate > 0, "learning rate must be positive");
        check(weight_decay >= 0, "weight decay must be >= 0");
    }
};

// Strict-improvement early stopping: ties do not reset the patience counter;
// training stops after patience+1 consecutive non-improving epochs.
class EarlyStopTracker {
public:
    enum class Decision { new_best, go_on, stop };

    EarlyStopTracker(int64_t patience, bool higher_better)
        : patience_(patience), higher_better_(higher_better) {}

    Decision update(int64_t epoch, double metric) {
        const bool improved =
            best_epoch_ < 0 || (higher_better_ ? metric > best_ : metric < best_);
        if (improved) {
            best_ = metric;
            best_epoch_ = epoch;
            bad_streak_ = 0;
            return Decision::new_best;
        }
        ++bad_streak_;
        return bad_streak_ > patience_ ? Decision::stop : Decision::go_on;
    }

    double best() const { return best_; }
    int64_t best_epoch() const { return best_epoch_; }

private:
    int64_t patience_;
    bool higher_better_;
    double best_ = 0.0;
    int64_t best_epoch_ = -1;
    int64_t bad_streak_ = 0;
};

struct EpochLog {
    int64_t epoch = 0;
    double train_loss = 0.0;
    double val_metric = 0.0;
    double delta_context_mean = std::numeric_limits<double>::quiet_NaN();
    double train_seconds = 0.0;  // optimization only (what the context freeze speeds up)
    double epoch_seconds = 0.0;  // including evaluation and context collection
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    int64_t best_epoch = -1;
    double best_val_metric = 0.0;
    double test_metric = 0.0;
    int64_t freeze_epoch = -1;
    double total_seconds = 0.0;
};

namespace detail {

template <class S>
std::vector<Tensor<S>> grads_for(Graph<S>& g, const Leaves<S>& leaves) {
    std::vector<Tensor<S>> grads(leaves.ids.size());
    for (size_t i = 0; i < leaves.ids.size(); ++i)
        if (g.has_grad(leaves.ids[i])) grads[i] = g.grad(leaves.ids[i]);
    return grads;
}

inline void check_finite_loss(double loss, int64_t epoch, int64_t step) {
    if (!std::isfinite(loss))
        fatal("divergence: non-finite loss " + std::to_string(loss) + " at epoch " +
              std::to_string(epoch) + ", step " + std::to_string(step));
}

}  // namespace detail

template <class S>
double evaluate_tabr(const TabrModel<S>& model, const DataContext<S>& ctx,
                     const std::vector<int64_t>& rows, int64_t eval_batch = 512) {
    PredictOptions<S> po;
    po.eval_batch = eval_batch;
    auto out = predict_tabr(model, ctx, rows, po);
    auto preds = to_user_predictions(out.raw, model.task, *ctx.pp);
    return metric_from_predictions(preds, model.task, model.n_classes, *ctx.ds, rows);
}

template <class S>
double evaluate_mlp(const MlpModel<S>& model, const DataContext<S>& ctx,
                    const std::vector<int64_t>& rows) {
    auto raw = predict_mlp(model, ctx, rows);
    auto preds = to_user_predictions(raw, model.task, *ctx.pp);
    return metric_from_predictions(preds, model.task, model.n_classes, *ctx.ds, rows);
}

template <class S>
TrainLog train_tabr(TabrModel<S>& model, const DataContext<S>& ctx, const TrainConfig& tc) {
    tc.validate();
    TrainLog log;
    log.freeze_epoch = tc.freeze_epoch;
    const double t_start = now_seconds();
    SeedSequence seeds(tc.seed);
    AdamW<S> opt({.learning_rate = tc.learning_rate, .weight_decay = tc.weight_decay},
                 model.params);
    EarlyStopTracker tracker(tc.patience, metric_higher_is_better(model.task));
    std::vector<Tensor<S>> best_snapshot = model.params.snapshot();

    std::optional<std::vector<ContextRecord>> prev_contexts;
    std::optional<std::vector<std::vector<int32_t>>> frozen;
    auto freeze_now = [&](const std::vector<ContextRecord>& recs) {
        std::vector<std::vector<int32_t>> cache;
        cache.reserve(recs.size());
        for (const auto& r : recs) cache.push_back(r.indices);
        frozen = std::move(cache);
    };

    if (tc.collect_delta_context || tc.freeze_epoch == 0) {
        auto recs = collect_contexts(model, ctx, tc.eval_batch * 4);
        if (tc.freeze_epoch == 0) freeze_now(recs);
        if (tc.collect_delta_context) prev_contexts = std::move(recs);
    }

    int64_t global_step = 0;
    for (int64_t epoch = 1; tc.max_epochs < 0 || epoch <= tc.max_epochs; ++epoch) {
        const double t_epoch = now_seconds();
        auto batches = make_batches(ctx.train_rows, tc.batch_size, /*shuffle=*/true,
                                    seeds.stream("shuffle", static_cast<uint64_t>(epoch)));
        double loss_sum = 0;
        for (const auto& batch : batches) {
            Rng drop = seeds.stream("dropout", static_cast<uint64_t>(global_step));
            Graph<S> g;
            Leaves<S> lv = register_leaves(g, model.params, /*requires_grad=*/true);

            Tensor<S> x = gather_matrix_rows(ctx.x_all, batch);
            std::vector<int64_t> self_idx(batch.size());
            std::vector<double> y_reg(model.task == Task::regression ? batch.size() : 0);
            std::vector<int64_t> y_cls(model.task == Task::regression ? 0 : batch.size());
            for (size_t i = 0; i < batch.size(); ++i) {
                self_idx[i] = ctx.row_to_cand[static_cast<size_t>(batch[i])];
                if (model.task == Task::regression)
                    y_reg[i] = ctx.y_norm[static_cast<size_t>(batch[i])];
                else
                    y_cls[i] = ctx.ds->y_class[static_cast<size_t>(batch[i])];
            }

            CandidateBatch<S> cand;
            cand.features = &ctx.x_cand;
            cand.y_reg = &ctx.cand_y_reg;
            cand.y_class = &ctx.cand_y_class;

            std::vector<std::vector<int32_t>> batch_ctx;
            ForwardOptions<S> fo;
            fo.train = true;
            fo.dropout_rng = &drop;
            fo.self_index = &self_idx;
            if (frozen) {
                batch_ctx.reserve(batch.size());
                for (int64_t row : batch)
                    batch_ctx.push_back(
                        (*frozen)[static_cast<size_t>(ctx.row_to_cand[static_cast<size_t>(row)])]);
                fo.frozen_contexts = &batch_ctx;
                fo.self_index = nullptr;  // the cache already excludes the object itself
            }

            auto res = model.forward(g, lv, x, cand, fo);
            auto loss = model.loss(g, res.prediction, y_reg, y_cls);
            const double loss_v = static_cast<double>(g.value(loss).at(0));
            detail::check_finite_loss(loss_v, epoch, global_step);
            loss_sum += loss_v * static_cast<double>(batch.size());
            g.backward(loss);
            auto grads = detail::grads_for(g, lv);
            opt.step(model.params, grads);
            ++global_step;
        }
        const double train_seconds = now_seconds() - t_epoch;

        EpochLog el;
        el.epoch = epoch;
        el.train_loss = loss_sum / static_cast<double>(ctx.train_rows.size());
        el.train_seconds = train_seconds;

        if (tc.collect_delta_context) {
            auto cur = collect_contexts(model, ctx, tc.eval_batch * 4);
            double acc = 0;
            for (size_t i = 0; i < cur.size(); ++i)
                acc += delta_context((*prev_contexts)[i], cur[i]);
            el.delta_context_mean = acc / static_cast<double>(cur.size());
            prev_contexts = std::move(cur);
        }

        el.val_metric = evaluate_tabr(model, ctx, ctx.ds->idx_val, tc.eval_batch);
        auto decision = tracker.update(epoch, el.val_metric);
        if (decision == EarlyStopTracker::Decision::new_best)
            best_snapshot = model.params.snapshot();

        el.epoch_seconds = now_seconds() - t_epoch;
        log.epochs.push_back(el);
        if (decision == EarlyStopTracker::Decision::stop) break;

        if (tc.freeze_epoch == epoch) {
            auto recs = collect_contexts(model, ctx, tc.eval_batch * 4);
            freeze_now(recs);
        }
    }

    model.params.restore(best_snapshot);
    log.best_epoch = tracker.best_epoch();
    log.best_val_metric = tracker.best();
    log.test_metric = evaluate_tabr(model, ctx, ctx.ds->idx_test, tc.eval_batch);
    log.total_seconds = now_seconds() - t_start;
    return log;
}

template <class S>
TrainLog train_mlp(MlpModel<S>& model, const DataContext<S>& ctx, const TrainConfig& tc) {
    tc.validate();
    TrainLog log;
    const double t_start = now_seconds();
    SeedSequence seeds(tc.seed);
    AdamW<S> opt({.learning_rate = tc.learning_rate, .weight_decay = tc.weight_decay},
                 model.params);
    EarlyStopTracker tracker(tc.patience, metric_higher_is_better(model.task));
    std::vector<Tensor<S>> best_snapshot = model.params.snapshot();

    int64_t global_step = 0;
    for (int64_t epoch = 1; tc.max_epochs < 0 || epoch <= tc.max_epochs; ++epoch) {
        const double t_epoch = now_seconds();
        auto batches = make_batches(ctx.train_rows, tc.batch_size, /*shuffle=*/true,
                                    seeds.stream("shuffle", static_cast<uint64_t>(epoch)));
        double loss_sum = 0;
        for (const auto& batch : batches) {
            Rng drop = seeds.stream("dropout", static_cast<uint64_t>(global_step));
            Graph<S> g;
            Leaves<S> lv = register_leaves(g, model.params, true);
            std::vector<double> y_reg(model.task == Task::regression ? batch.size() : 0);
            std::vector<int64_t> y_cls(model.task == Task::regression ? 0 : batch.size());
            for (size_t i = 0; i < batch.size(); ++i) {
                if (model.task == Task::regression)
                    y_reg[i] = ctx.y_norm[static_cast<size_t>(batch[i])];
                else
                    y_cls[i] = ctx.ds->y_class[static_cast<size_t>(batch[i])];
            }
            auto pred = model.forward(g, lv, gather_matrix_rows(ctx.x_all, batch), true, &drop);
            auto loss = model.loss(g, pred, y_reg, y_cls);
            const double loss_v = static_cast<double>(g.value(loss).at(0));
            detail::check_finite_loss(loss_v, epoch, global_step);
            loss_sum += loss_v * static_cast<double>(batch.size());
            g.backward(loss);
            auto grads = detail::grads_for(g, lv);
            opt.step(model.params, grads);
            ++global_step;
        }
        EpochLog el;
        el.epoch = epoch;
        el.train_loss = loss_sum / static_cast<double>(ctx.train_rows.size());
        el.train_seconds = now_seconds() - t_epoch;
        el.val_metric = evaluate_mlp(model, ctx, ctx.ds->idx_val);
        auto decision = tracker.update(epoch, el.val_metric);
        if (decision == EarlyStopTracker::Decision::new_best)
            best_snapshot = model.params.snapshot();
        el.epoch_seconds = now_seconds() - t_epoch;
        log.epochs.push_back(el);
        if (decision == EarlyStopTracker::Decision::stop) break;
    }

    model.params.restore(best_snapshot);
    log.best_epoch = tracker.best_epoch();
    log.best_val_metric = tracker.best();
    log.test_metric = evaluate_mlp(model, ctx, ctx.ds->idx_test);
    log.total_seconds = now_seconds() - t_start;
    return log;
}

}  // namespace tabr
