#pragma once

#include <cmath>

#include "tabr/data_context.hpp"
#include "tabr/train.hpp"

namespace tabr::testing {

// Small in-memory synthetic dataset with local structure: the target depends
// on a smooth function of the features plus a fine-grained bump term that
// rewards finding close neighbors.
inline Dataset make_synth_dataset(int64_t n, int64_t p_num, Task task, int64_t n_classes,
                                  uint64_t seed) {
    Dataset ds;
    ds.task = task;
    ds.n_classes = task == Task::regression ? 0 : n_classes;
    ds.n_rows = n;
    ds.p_num = p_num;
    Rng rng(seed);
    ds.x_num.resize(static_cast<size_t>(n * p_num));
    for (auto& v : ds.x_num) v = rng.normal();
    for (int64_t i = 0; i < n; ++i) {
        const double* x = ds.x_num.data() + i * p_num;
        double f = 0;
        for (int64_t j = 0; j < p_num; ++j)
            f += std::sin(1.7 * x[j] + 0.3 * static_cast<double>(j)) * (j % 2 ? 0.5 : 1.0);
        f += 0.1 * rng.normal();
        if (task == Task::regression) {
            ds.y_reg.push_back(f);
        } else {
            int64_t cls = static_cast<int64_t>(std::floor(f * 2.0)) % n_classes;
            if (cls < 0) cls += n_classes;
            ds.y_class.push_back(cls);
        }
    }
    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);
    const int64_t n_train = std::max<int64_t>(1, n * 6 / 10);
    const int64_t n_val = std::max<int64_t>(1, n * 2 / 10);
    for (int64_t i = 0; i < n; ++i) {
        int64_t r = order[static_cast<size_t>(i)];
        if (i < n_train)
            ds.idx_train.push_back(r);
        else if (i < n_train + n_val)
            ds.idx_val.push_back(r);
        else
            ds.idx_test.push_back(r);
    }
    return ds;
}

template <class S>
struct SmallSetup {
    Dataset ds;
    Preprocessor pp;
    DataContext<S> ctx;
    TabrModel<S> model;
};

template <class S>
SmallSetup<S> make_small_tabr(int64_t n, int64_t p_num, Task task, int64_t n_classes,
                              BackboneConfig bb, RetrievalConfig rc, uint64_t seed) {
    SmallSetup<S> s;
    s.ds = make_synth_dataset(n, p_num, task, n_classes, seed);
    s.pp = fit_preprocessor(s.ds, std::vector<NumPolicy>(static_cast<size_t>(p_num),
                                                         NumPolicy::quantile));
    s.ctx = DataContext<S>::build(s.ds, s.pp);
    s.model = TabrModel<S>(task, n_classes, s.pp.p_num,
                           s.pp.output_dim() - s.pp.p_num, bb, rc, SeedSequence(seed + 1));
    return s;
}

}  // namespace tabr::testing
