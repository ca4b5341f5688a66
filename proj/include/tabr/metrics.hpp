#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabr/dataset.hpp"

namespace tabr {

double rmse(const std::vector<double>& pred, const std::vector<double>& target);

// Final task metric from user-space predictions (see to_user_predictions):
// RMSE for regression, accuracy for classification (binclass threshold 0.5,
// multiclass argmax with ties going to the lowest class index).
double metric_from_predictions(const std::vector<double>& preds, Task task, int64_t n_classes,
                               const Dataset& ds, const std::vector<int64_t>& rows);

inline bool metric_higher_is_better(Task task) { return task != Task::regression; }

// Seed groups are consecutive: [0..g), [g..2g), ... Within a group raw
// predictions are averaged; the reported value is the mean of the per-group
// metrics.
double ensemble_evaluate(const std::vector<std::vector<double>>& per_seed_predictions,
                         int64_t group_size, int64_t n_groups, Task task, int64_t n_classes,
                         const Dataset& ds, const std::vector<int64_t>& rows);

struct RunResult {
    std::string algorithm;
    std::vector<double> per_seed_metrics;
    double mean = 0.0;
    double stdev = 0.0;  // sample (n-1) formula

    static RunResult from_metrics(std::string algorithm, std::vector<double> metrics);
};

// The std-aware comparison rule: the preliminary best is the best mean; every
// algorithm whose mean is within the preliminary best's std of that mean is
// included.
std::vector<std::string> best_set(const std::vector<RunResult>& results, bool higher_better);

// Brute-force kNN over preprocessed features (Euclidean). Regression: mean of
// neighbor labels; classification: majority vote, ties to the lowest class.
struct KnnData {
    int64_t n = 0, p = 0;
    std::vector<double> x;        // [n, p] train features, preprocessed
    std::vector<double> y_reg;    // raw labels
    std::vector<int64_t> y_class;
    Task task = Task::regression;
    int64_t n_classes = 0;
};

double knn_sqdist(const double* a, const double* b, int64_t p);

// the k nearest training rows for one query, ties broken by lower index,
// returned closest-first
std::vector<int32_t> knn_neighbors(const KnnData& data, const double* query, int64_t k);

std::vector<double> knn_predict(const KnnData& data, const std::vector<double>& queries,
                                int64_t n_queries, int64_t k);

// natural-log entropy of a distribution (zeros skipped)
double distribution_entropy(const std::vector<double>& p);

}  // namespace tabr
