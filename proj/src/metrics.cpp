#include "tabr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabr/common.hpp"

namespace tabr {

double rmse(const std::vector<double>& pred, const std::vector<double>& target) {
    check(pred.size() == target.size() && !pred.empty(), "rmse: length mismatch");
    double acc = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        double e = pred[i] - target[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

namespace {

int64_t argmax_lowest_tie(const double* p, int64_t k) {
    int64_t best = 0;
    for (int64_t j = 1; j < k; ++j)
        if (p[j] > p[best]) best = j;
    return best;
}

}  // namespace

double metric_from_predictions(const std::vector<double>& preds, Task task, int64_t n_classes,
                               const Dataset& ds, const std::vector<int64_t>& rows) {
    const size_t n = rows.size();
    check(n > 0, "metric: no rows");
    if (task == Task::regression) {
        check(preds.size() == n, "metric: prediction count mismatch");
        std::vector<double> target(n);
        for (size_t i = 0; i < n; ++i) target[i] = ds.y_reg[static_cast<size_t>(rows[i])];
        return rmse(preds, target);
    }
    int64_t correct = 0;
    if (task == Task::binclass) {
        check(preds.size() == n, "metric: prediction count mismatch");
        for (size_t i = 0; i < n; ++i) {
            int64_t cls = preds[i] >= 0.5 ? 1 : 0;
            if (cls == ds.y_class[static_cast<size_t>(rows[i])]) ++correct;
        }
    } else {
        check(preds.size() == n * static_cast<size_t>(n_classes),
              "metric: prediction count mismatch");
        for (size_t i = 0; i < n; ++i) {
            int64_t cls = argmax_lowest_tie(preds.data() + i * static_cast<size_t>(n_classes),
                                            n_classes);
            if (cls == ds.y_class[static_cast<size_t>(rows[i])]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

double ensemble_evaluate(const std::vector<std::vector<double>>& per_seed_predictions,
                         int64_t group_size, int64_t n_groups, Task task, int64_t n_classes,
                         const Dataset& ds, const std::vector<int64_t>& rows) {
    check(group_size >= 1 && n_groups >= 1, "ensemble: bad grouping");
    check(static_cast<int64_t>(per_seed_predictions.size()) == group_size * n_groups,
          "ensemble: seed count (" + std::to_string(per_seed_predictions.size()) +
              ") does not split into " + std::to_string(n_groups) + " groups of " +
              std::to_string(group_size));
    const size_t len = per_seed_predictions[0].size();
    for (const auto& p : per_seed_predictions)
        check(p.size() == len, "ensemble: prediction length mismatch");

    double metric_sum = 0;
    for (int64_t gi = 0; gi < n_groups; ++gi) {
        std::vector<double> avg(len, 0.0);
        for (int64_t s = 0; s < group_size; ++s) {
            const auto& p = per_seed_predictions[static_cast<size_t>(gi * group_size + s)];
            for (size_t i = 0; i < len; ++i) avg[i] += p[i];
        }
        for (double& v : avg) v /= static_cast<double>(group_size);
        metric_sum += metric_from_predictions(avg, task, n_classes, ds, rows);
    }
    return metric_sum / static_cast<double>(n_groups);
}

RunResult RunResult::from_metrics(std::string algorithm, std::vector<double> metrics) {
    check(!metrics.empty(), "RunResult: no metrics");
    RunResult r;
    r.algorithm = std::move(algorithm);
    r.per_seed_metrics = std::move(metrics);
    r.mean = std::accumulate(r.per_seed_metrics.begin(), r.per_seed_metrics.end(), 0.0) /
             static_cast<double>(r.per_seed_metrics.size());
    if (r.per_seed_metrics.size() > 1) {
        double acc = 0;
        for (double m : r.per_seed_metrics) acc += (m - r.mean) * (m - r.mean);
        r.stdev = std::sqrt(acc / static_cast<double>(r.per_seed_metrics.size() - 1));
    }
    return r;
}

std::vector<std::string> best_set(const std::vector<RunResult>& results, bool higher_better) {
    check(!results.empty(), "best_set: no results");
    size_t best = 0;
    for (size_t i = 1; i < results.size(); ++i) {
        if (higher_better ? results[i].mean > results[best].mean
                          : results[i].mean < results[best].mean)
            best = i;
    }
    std::vector<std::string> out;
    for (const auto& r : results)
        if (std::abs(r.mean - results[best].mean) <= results[best].stdev)
            out.push_back(r.algorithm);
    return out;
}

double knn_sqdist(const double* a, const double* b, int64_t p) {
    double acc = 0;
    for (int64_t j = 0; j < p; ++j) {
        double c = a[j] - b[j];
        acc += c * c;
    }
    return acc;
}

std::vector<int32_t> knn_neighbors(const KnnData& data, const double* query, int64_t k) {
    check(k >= 1, "knn: k must be >= 1");
    check(k <= data.n, "knn: k (" + std::to_string(k) + ") exceeds the training size (" +
                           std::to_string(data.n) + ")");
    std::vector<double> dist(static_cast<size_t>(data.n));
    for (int64_t i = 0; i < data.n; ++i)
        dist[static_cast<size_t>(i)] = knn_sqdist(query, data.x.data() + i * data.p, data.p);
    std::vector<int32_t> order(static_cast<size_t>(data.n));
    for (int64_t i = 0; i < data.n; ++i) order[static_cast<size_t>(i)] = static_cast<int32_t>(i);
    auto closer = [&dist](int32_t a, int32_t b) {
        if (dist[static_cast<size_t>(a)] != dist[static_cast<size_t>(b)])
            return dist[static_cast<size_t>(a)] < dist[static_cast<size_t>(b)];
        return a < b;
    };
    std::nth_element(order.begin(), order.begin() + k - 1, order.end(), closer);
    order.resize(static_cast<size_t>(k));
    std::sort(order.begin(), order.end(), closer);
    return order;
}

std::vector<double> knn_predict(const KnnData& data, const std::vector<double>& queries,
                                int64_t n_queries, int64_t k) {
    check(static_cast<int64_t>(queries.size()) == n_queries * data.p, "knn: query size mismatch");
    const bool classify = data.task != Task::regression;
    std::vector<double> out(static_cast<size_t>(n_queries));
    for (int64_t qi = 0; qi < n_queries; ++qi) {
        auto nb = knn_neighbors(data, queries.data() + qi * data.p, k);
        if (!classify) {
            double acc = 0;
            for (int32_t i : nb) acc += data.y_reg[static_cast<size_t>(i)];
            out[static_cast<size_t>(qi)] = acc / static_cast<double>(k);
        } else {
            std::vector<int64_t> votes(static_cast<size_t>(data.n_classes), 0);
            for (int32_t i : nb) ++votes[static_cast<size_t>(data.y_class[static_cast<size_t>(i)])];
            int64_t best = 0;
            for (int64_t c = 1; c < data.n_classes; ++c)
                if (votes[static_cast<size_t>(c)] > votes[static_cast<size_t>(best)]) best = c;
            out[static_cast<size_t>(qi)] = static_cast<double>(best);
        }
    }
    return out;
}

double distribution_entropy(const std::vector<double>& p) {
    double h = 0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return h;
}

}  // namespace tabr
