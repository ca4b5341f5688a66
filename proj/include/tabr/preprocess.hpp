#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabr/dataset.hpp"

namespace tabr {

enum class NumPolicy { quantile, standardize, none };

std::string num_policy_name(NumPolicy p);
NumPolicy num_policy_from_name(const std::string& s);

// Fitted on the training split only. Numeric columns go through the
// configured per-column transform, binary columns pass through, categorical
// columns become one-hot blocks, and regression targets are standardized for
// training (predictions are de-normalized before metrics).
struct Preprocessor {
    Task task = Task::regression;
    int64_t p_num = 0, p_bin = 0, p_cat = 0;

    std::vector<NumPolicy> policy;                 // per numeric column
    std::vector<std::vector<double>> quantiles;    // quantile policy references
    std::vector<double> mean, stdev;               // standardize policy stats
    std::vector<int64_t> cat_cardinality;          // one-hot widths

    double y_mean = 0.0;
    double y_std = 1.0;

    int64_t output_dim() const;

    // transform one numeric value of column `col`
    double transform_numeric(int64_t col, double v) const;

    // one preprocessed feature row (length output_dim())
    void transform_row(const Dataset& ds, int64_t row, double* out) const;

    // rows -> row-major matrix of shape [rows.size(), output_dim()]
    std::vector<double> transform_rows(const Dataset& ds,
                                       const std::vector<int64_t>& rows) const;

    double normalize_target(double y) const { return (y - y_mean) / y_std; }
    double denormalize_target(double z) const { return z * y_std + y_mean; }
};

// `policy` must name one entry per numeric column.
Preprocessor fit_preprocessor(const Dataset& ds, const std::vector<NumPolicy>& policy);

// Empirical CDF of `v` against fitted reference quantiles, with linear
// interpolation and tie runs mapped to their midpoint.
double quantile_cdf(const std::vector<double>& quantiles, double v);

}  // namespace tabr
