#pragma once

#include <vector>

#include "tabr/model.hpp"

namespace tabr {

// Everything a training or evaluation run needs in model space: preprocessed
// feature rows for the whole dataset, normalized targets, and the candidate
// set (the actual training rows).
template <class S>
struct DataContext {
    const Dataset* ds = nullptr;
    const Preprocessor* pp = nullptr;

    Tensor<S> x_all;             // [n, p_in]
    std::vector<double> y_norm;  // normalized regression targets (all rows)

    std::vector<int64_t> train_rows;   // optimization rows == candidate rows
    Tensor<S> x_cand;                  // [N, p_in]
    std::vector<double> cand_y_reg;    // normalized
    std::vector<int64_t> cand_y_class;
    std::vector<int64_t> row_to_cand;  // dataset row -> candidate index, or -1

    int64_t input_width() const { return x_all.dim(1); }

    // train_fraction < 1 keeps a seeded random subset of the training split
    // as both optimization rows and retrieval candidates.
    static DataContext build(const Dataset& ds, const Preprocessor& pp,
                             double train_fraction = 1.0, uint64_t seed = 0) {
        check(train_fraction > 0.0 && train_fraction <= 1.0,
              "train fraction must be in (0, 1]");
        DataContext ctx;
        ctx.ds = &ds;
        ctx.pp = &pp;
        std::vector<int64_t> all_rows(static_cast<size_t>(ds.n_rows));
        for (int64_t i = 0; i < ds.n_rows; ++i) all_rows[static_cast<size_t>(i)] = i;
        ctx.x_all = matrix_to_tensor<S>(pp.transform_rows(ds, all_rows), ds.n_rows,
                                        pp.output_dim());
        if (ds.task == Task::regression) {
            ctx.y_norm.resize(static_cast<size_t>(ds.n_rows));
            for (int64_t i = 0; i < ds.n_rows; ++i)
                ctx.y_norm[static_cast<size_t>(i)] =
                    pp.normalize_target(ds.y_reg[static_cast<size_t>(i)]);
        }

        ctx.train_rows = ds.idx_train;
        if (train_fraction < 1.0) {
            Rng rng = SeedSequence(seed).stream("train-fraction");
            rng.shuffle(ctx.train_rows);
            size_t keep = std::max<size_t>(
                1, static_cast<size_t>(train_fraction *
                                       static_cast<double>(ctx.train_rows.size())));
            ctx.train_rows.resize(keep);
            std::sort(ctx.train_rows.begin(), ctx.train_rows.end());
        }
        ctx.rebuild_candidates();
        return ctx;
    }

    void rebuild_candidates() {
        x_cand = gather_matrix_rows(x_all, train_rows);
        cand_y_reg.clear();
        cand_y_class.clear();
        row_to_cand.assign(static_cast<size_t>(ds->n_rows), -1);
        for (size_t i = 0; i < train_rows.size(); ++i) {
            int64_t r = train_rows[i];
            row_to_cand[static_cast<size_t>(r)] = static_cast<int64_t>(i);
            if (ds->task == Task::regression)
                cand_y_reg.push_back(y_norm[static_cast<size_t>(r)]);
            else
                cand_y_class.push_back(ds->y_class[static_cast<size_t>(r)]);
        }
    }

    // the remaining rows of the dataset's training split (for online updates)
    std::vector<int64_t> held_out_train_rows() const {
        std::vector<int64_t> out;
        for (int64_t r : ds->idx_train)
            if (row_to_cand[static_cast<size_t>(r)] < 0) out.push_back(r);
        return out;
    }
};

}  // namespace tabr
