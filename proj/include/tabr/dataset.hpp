#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabr/rng.hpp"

namespace tabr {

enum class Task { binclass, multiclass, regression };

std::string task_name(Task t);
Task task_from_name(const std::string& s);

// On-disk layout (all text, UTF-8, LF):
//   meta.txt                 key=value: task, n, n_classes (classification)
//   X_num.csv / X_bin.csv / X_cat.csv   headerless CSV; absent => 0 columns
//   Y.csv                    one label per line
//   idx_train.txt / idx_val.txt / idx_test.txt   one 0-based row index per line
struct Dataset {
    Task task = Task::regression;
    int64_t n_classes = 0;  // classification only
    int64_t n_rows = 0;
    int64_t p_num = 0, p_bin = 0, p_cat = 0;

    std::vector<double> x_num;             // n_rows x p_num, row-major
    std::vector<double> x_bin;             // n_rows x p_bin, entries in {0,1}
    std::vector<int64_t> x_cat;            // n_rows x p_cat, dense codes
    std::vector<int64_t> cat_cardinality;  // per categorical column

    std::vector<double> y_reg;      // regression targets
    std::vector<int64_t> y_class;   // class indices in [0, n_classes)

    std::vector<int64_t> idx_train, idx_val, idx_test;

    const std::vector<int64_t>& split(const std::string& name) const;
};

Dataset load_dataset(const std::string& dir);

// Deterministic shuffled batches; the last batch may be short.
std::vector<std::vector<int64_t>> make_batches(const std::vector<int64_t>& indices,
                                               int64_t batch_size, bool shuffle, Rng rng);

inline std::vector<std::vector<int64_t>> make_batches(const std::vector<int64_t>& indices,
                                                      int64_t batch_size, bool shuffle,
                                                      uint64_t seed) {
    return make_batches(indices, batch_size, shuffle, Rng(seed));
}

}  // namespace tabr
