#pragma once

#include <vector>

#include "tabr/data_context.hpp"
#include "tabr/model.hpp"

namespace tabr {

// Preprocessed candidate rows with their labels and the encodings a trained
// model retrieves against. Keys and representations are precomputed at
// build/add time and tagged with the parameter version that produced them;
// values cannot be precomputed since they depend on the target object.
template <class S>
struct CandidateStore {
    uint64_t param_version = 0;
    Tensor<S> features;  // [N, p_in]
    Tensor<S> x_tilde;   // [N, d], post shared-LN
    Tensor<S> keys;      // [N, d]
    std::vector<double> y_reg;  // normalized label space
    std::vector<int64_t> y_class;

    int64_t count() const { return features.defined() ? features.dim(0) : 0; }
};

namespace detail {

template <class S>
Tensor<S> concat_rows_tensor(const Tensor<S>& a, const Tensor<S>& b) {
    check(a.dim(1) == b.dim(1), "concat_rows: width mismatch");
    Tensor<S> out({a.dim(0) + b.dim(0), a.dim(1)});
    std::copy(a.data(), a.data() + a.numel(), out.mutable_data());
    std::copy(b.data(), b.data() + b.numel(), out.mutable_data() + a.numel());
    return out;
}

}  // namespace detail

template <class S>
CandidateStore<S> build_store(const TabrModel<S>& model, const Tensor<S>& features,
                              std::vector<double> y_reg, std::vector<int64_t> y_class) {
    check(features.dim(0) >= 1, "build_store: empty candidate set");
    if (model.task == Task::regression)
        check(static_cast<int64_t>(y_reg.size()) == features.dim(0),
              "build_store: label count mismatch");
    else
        check(static_cast<int64_t>(y_class.size()) == features.dim(0),
              "build_store: label count mismatch");
    for (int64_t y : y_class)
        check(y >= 0 && y < std::max<int64_t>(model.n_classes, 1),
              "build_store: label outside the model's classes");
    CandidateStore<S> store;
    store.param_version = model.params.version();
    store.features = features.clone();
    auto enc = model.encode_candidates(features);
    store.x_tilde = std::move(enc.x_tilde);
    store.keys = std::move(enc.keys);
    store.y_reg = std::move(y_reg);
    store.y_class = std::move(y_class);
    return store;
}

// Post-training addition of labeled rows: appended rows are encoded with the
// frozen model, existing entries stay untouched.
template <class S>
void add_candidates(CandidateStore<S>& store, const TabrModel<S>& model,
                    const Tensor<S>& new_features, const std::vector<double>& new_y_reg,
                    const std::vector<int64_t>& new_y_class) {
    check(store.param_version == model.params.version(),
          "add_candidates: store was built with different parameters");
    if (new_features.dim(0) == 0) return;
    check(new_features.dim(1) == store.features.dim(1),
          "add_candidates: feature width mismatch");
    if (model.task == Task::regression)
        check(new_y_reg.size() == static_cast<size_t>(new_features.dim(0)),
              "add_candidates: label count mismatch");
    else
        check(new_y_class.size() == static_cast<size_t>(new_features.dim(0)),
              "add_candidates: label count mismatch");
    for (int64_t y : new_y_class)
        check(y >= 0 && y < std::max<int64_t>(model.n_classes, 1),
              "add_candidates: label outside the model's classes");

    auto enc = model.encode_candidates(new_features);
    store.features = detail::concat_rows_tensor(store.features, new_features);
    store.x_tilde = detail::concat_rows_tensor(store.x_tilde, enc.x_tilde);
    store.keys = detail::concat_rows_tensor(store.keys, enc.keys);
    store.y_reg.insert(store.y_reg.end(), new_y_reg.begin(), new_y_reg.end());
    store.y_class.insert(store.y_class.end(), new_y_class.begin(), new_y_class.end());
}

// store over the context's candidate set (the usual serving setup)
template <class S>
CandidateStore<S> build_store(const TabrModel<S>& model, const DataContext<S>& ctx) {
    return build_store(model, ctx.x_cand, ctx.cand_y_reg, ctx.cand_y_class);
}

}  // namespace tabr
