#include "tabr/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "tabr/common.hpp"
#include "tabr/rng.hpp"

namespace tabr {

std::string num_policy_name(NumPolicy p) {
    switch (p) {
        case NumPolicy::quantile: return "quantile";
        case NumPolicy::standardize: return "standardize";
        case NumPolicy::none: return "none";
    }
    return "?";
}

NumPolicy num_policy_from_name(const std::string& s) {
    if (s == "quantile") return NumPolicy::quantile;
    if (s == "standardize") return NumPolicy::standardize;
    if (s == "none") return NumPolicy::none;
    fatal("unknown numeric policy: '" + s + "'");
}

namespace {

constexpr double kCdfClamp = 1e-6;
constexpr int64_t kMaxQuantiles = 1000;

// numpy-style linear interpolation quantile of a sorted sample
double linear_quantile(const std::vector<double>& sorted, double p) {
    const size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double pos = p * static_cast<double>(n - 1);
    size_t lo = static_cast<size_t>(pos);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double quantile_cdf(const std::vector<double>& q, double v) {
    const size_t k = q.size();
    if (k == 0) return 0.5;
    if (q.front() == q.back()) return 0.5;  // constant column: distribution center
    if (v <= q.front()) return 0.0;
    if (v >= q.back()) return 1.0;
    auto lo = std::lower_bound(q.begin(), q.end(), v);
    auto hi = std::upper_bound(lo, q.end(), v);
    const double denom = static_cast<double>(k - 1);
    if (lo != hi) {
        // v sits exactly on a (possibly tied) reference: midpoint of the run
        double pl = static_cast<double>(lo - q.begin()) / denom;
        double pr = static_cast<double>(hi - 1 - q.begin()) / denom;
        return 0.5 * (pl + pr);
    }
    size_t i = static_cast<size_t>(lo - q.begin());
    double t = (v - q[i - 1]) / (q[i] - q[i - 1]);
    return (static_cast<double>(i - 1) + t) / denom;
}

int64_t Preprocessor::output_dim() const {
    int64_t d = p_num + p_bin;
    for (int64_t c : cat_cardinality) d += c;
    return d;
}

double Preprocessor::transform_numeric(int64_t col, double v) const {
    if (std::isnan(v)) fatal("NaN numeric input in column " + std::to_string(col));
    switch (policy[static_cast<size_t>(col)]) {
        case NumPolicy::quantile: {
            double p = quantile_cdf(quantiles[static_cast<size_t>(col)], v);
            p = std::clamp(p, kCdfClamp, 1.0 - kCdfClamp);
            return inverse_normal_cdf(p);
        }
        case NumPolicy::standardize:
            return (v - mean[static_cast<size_t>(col)]) / stdev[static_cast<size_t>(col)];
        case NumPolicy::none:
            return v;
    }
    return v;
}

void Preprocessor::transform_row(const Dataset& ds, int64_t row, double* out) const {
    check(ds.p_num == p_num && ds.p_bin == p_bin && ds.p_cat == p_cat,
          "dataset dimensions do not match the fitted preprocessor");
    int64_t o = 0;
    for (int64_t c = 0; c < p_num; ++c)
        out[o++] = transform_numeric(c, ds.x_num[static_cast<size_t>(row * p_num + c)]);
    for (int64_t c = 0; c < p_bin; ++c)
        out[o++] = ds.x_bin[static_cast<size_t>(row * p_bin + c)];
    for (int64_t c = 0; c < p_cat; ++c) {
        const int64_t card = cat_cardinality[static_cast<size_t>(c)];
        const int64_t code = ds.x_cat[static_cast<size_t>(row * p_cat + c)];
        for (int64_t j = 0; j < card; ++j) out[o + j] = 0.0;
        if (code >= 0 && code < card) {
            out[o + code] = 1.0;
        } else {
            warn("unseen categorical code " + std::to_string(code) + " in column " +
                 std::to_string(c) + "; using all-zeros one-hot");
        }
        o += card;
    }
}

std::vector<double> Preprocessor::transform_rows(const Dataset& ds,
                                                 const std::vector<int64_t>& rows) const {
    const int64_t d = output_dim();
    std::vector<double> out(rows.size() * static_cast<size_t>(d));
    for (size_t i = 0; i < rows.size(); ++i) transform_row(ds, rows[i], out.data() + i * d);
    return out;
}

Preprocessor fit_preprocessor(const Dataset& ds, const std::vector<NumPolicy>& policy) {
    check(static_cast<int64_t>(policy.size()) == ds.p_num,
          "fit_preprocessor: need one policy per numeric column (" + std::to_string(ds.p_num) +
              "), got " + std::to_string(policy.size()));
    check(!ds.idx_train.empty(), "fit_preprocessor: empty training split");

    Preprocessor pp;
    pp.task = ds.task;
    pp.p_num = ds.p_num;
    pp.p_bin = ds.p_bin;
    pp.p_cat = ds.p_cat;
    pp.policy = policy;
    pp.cat_cardinality = ds.cat_cardinality;
    pp.quantiles.resize(static_cast<size_t>(ds.p_num));
    pp.mean.assign(static_cast<size_t>(ds.p_num), 0.0);
    pp.stdev.assign(static_cast<size_t>(ds.p_num), 1.0);

    const int64_t n_train = static_cast<int64_t>(ds.idx_train.size());
    std::vector<double> col(static_cast<size_t>(n_train));
    for (int64_t c = 0; c < ds.p_num; ++c) {
        for (int64_t i = 0; i < n_train; ++i) {
            double v = ds.x_num[static_cast<size_t>(ds.idx_train[static_cast<size_t>(i)] *
                                                         ds.p_num + c)];
            if (std::isnan(v)) fatal("NaN in training column " + std::to_string(c));
            col[static_cast<size_t>(i)] = v;
        }
        switch (policy[static_cast<size_t>(c)]) {
            case NumPolicy::quantile: {
                std::vector<double> sorted = col;
                std::sort(sorted.begin(), sorted.end());
                const int64_t k = std::min<int64_t>(kMaxQuantiles, n_train);
                auto& q = pp.quantiles[static_cast<size_t>(c)];
                q.resize(static_cast<size_t>(k));
                if (k == 1) {
                    q[0] = sorted[0];
                } else {
                    for (int64_t j = 0; j < k; ++j)
                        q[static_cast<size_t>(j)] = linear_quantile(
                            sorted, static_cast<double>(j) / static_cast<double>(k - 1));
                }
                break;
            }
            case NumPolicy::standardize: {
                double mu = 0;
                for (double v : col) mu += v;
                mu /= static_cast<double>(n_train);
                double var = 0;
                for (double v : col) var += (v - mu) * (v - mu);
                var /= static_cast<double>(n_train);
                double sd = std::sqrt(var);
                if (sd == 0.0) {
                    warn("zero-variance column " + std::to_string(c) +
                         " under standardize; clamping std to 1");
                    sd = 1.0;
                }
                pp.mean[static_cast<size_t>(c)] = mu;
                pp.stdev[static_cast<size_t>(c)] = sd;
                break;
            }
            case NumPolicy::none:
                break;
        }
    }

    if (ds.task == Task::regression) {
        double mu = 0;
        for (int64_t r : ds.idx_train) mu += ds.y_reg[static_cast<size_t>(r)];
        mu /= static_cast<double>(n_train);
        double var = 0;
        for (int64_t r : ds.idx_train) {
            double d = ds.y_reg[static_cast<size_t>(r)] - mu;
            var += d * d;
        }
        var /= static_cast<double>(n_train);
        double sd = std::sqrt(var);
        if (sd == 0.0) {
            warn("zero-variance regression target; clamping std to 1");
            sd = 1.0;
        }
        pp.y_mean = mu;
        pp.y_std = sd;
    }
    return pp;
}

}  // namespace tabr
