#pragma once

#include "tabr/infer.hpp"
#include "tabr/metrics.hpp"

namespace tabr {

// Entropy of the average attention distribution over candidates for the given
// eval rows (natural log). Per-object distributions carry the top-m mask
// (zeros outside the selected context); mass on the object itself is
// reassigned to one virtual context atom shared by all objects.
template <class S>
double attention_entropy(const TabrModel<S>& model, const DataContext<S>& ctx,
                         const std::vector<int64_t>& rows,
                         const CandidateStore<S>* store = nullptr) {
    PredictOptions<S> po;
    po.store = store;
    po.want_records = true;
    auto out = predict_tabr(model, ctx, rows, po);
    const int64_t n_cand = store ? store->count() : ctx.x_cand.dim(0);
    std::vector<double> avg(static_cast<size_t>(n_cand) + 1, 0.0);
    const double inv = 1.0 / static_cast<double>(out.records.size());
    for (const auto& rec : out.records) {
        for (size_t j = 0; j < rec.indices.size(); ++j)
            avg[static_cast<size_t>(rec.indices[j])] += rec.weights[j] * inv;
        avg[static_cast<size_t>(n_cand)] += rec.self_weight * inv;  // virtual self atom
    }
    return distribution_entropy(avg);
}

enum class ProjectionSubspace { none, label_line, random_unit };

inline std::string projection_subspace_name(ProjectionSubspace s) {
    switch (s) {
        case ProjectionSubspace::none: return "none";
        case ProjectionSubspace::label_line: return "label-line";
        case ProjectionSubspace::random_unit: return "random";
    }
    return "?";
}

// Test metric of a trained regression model when the projection of the
// T-module output on a one-dimensional subspace is removed at inference (no
// retraining). The label line is the image of the regression label embedding.
template <class S>
double value_projection_metric(const TabrModel<S>& model, const DataContext<S>& ctx,
                               const std::vector<int64_t>& rows, ProjectionSubspace subspace,
                               uint64_t seed = 0) {
    check(model.task == Task::regression,
          "value projection ablation is unsupported for classification tasks");
    check(model.uses_t(), "value projection ablation requires the key-difference value module");

    Tensor<S> unit;
    if (subspace == ProjectionSubspace::label_line) {
        const Tensor<S>& w = model.params["retr/wy_w"];  // [1, d]
        double norm = 0;
        for (int64_t i = 0; i < w.numel(); ++i)
            norm += static_cast<double>(w.at(i)) * static_cast<double>(w.at(i));
        norm = std::sqrt(norm);
        if (norm > 0) {
            unit = Tensor<S>({w.numel()});
            for (int64_t i = 0; i < w.numel(); ++i)
                unit.mutable_data()[i] = static_cast<S>(static_cast<double>(w.at(i)) / norm);
        }
        // a zero label embedding leaves nothing to remove
    } else if (subspace == ProjectionSubspace::random_unit) {
        Rng rng = SeedSequence(seed).stream("value-ablation");
        const int64_t d = model.backbone.d;
        unit = Tensor<S>({d});
        double norm = 0;
        std::vector<double> v(static_cast<size_t>(d));
        for (auto& x : v) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (int64_t i = 0; i < d; ++i)
            unit.mutable_data()[i] = static_cast<S>(v[static_cast<size_t>(i)] / norm);
    }

    PredictOptions<S> po;
    if (unit.defined()) po.remove_projection = &unit;
    auto out = predict_tabr(model, ctx, rows, po);
    auto preds = to_user_predictions(out.raw, model.task, *ctx.pp);
    return metric_from_predictions(preds, model.task, model.n_classes, *ctx.ds, rows);
}

}  // namespace tabr
