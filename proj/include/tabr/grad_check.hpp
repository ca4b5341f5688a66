#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "tabr/params.hpp"

namespace tabr {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    int64_t worst_index = -1;
    bool nan_found = false;
    std::string nan_param;

    bool ok(double tol) const { return !nan_found && max_rel_err < tol; }
};

// Central-difference check of the analytic gradients of a scalar function
// built on a fresh graph by `build`. Relative error per coordinate is
// |analytic - fd| / max(1, |analytic|). Must be run with dropout disabled:
// the function has to be deterministic in its parameters.
//
// `max_coords_per_param` < 0 checks every coordinate; otherwise a seeded
// uniform sample of coordinates per tensor is checked.
template <class S>
GradCheckResult grad_check(
    ParamStore<S>& params,
    const std::function<typename Graph<S>::Id(Graph<S>&, const Leaves<S>&)>& build, double eps,
    int64_t max_coords_per_param = -1, uint64_t sample_seed = 0) {
    check(eps > 0.0, "grad_check: eps must be positive");
    GradCheckResult res;

    // analytic pass
    std::vector<Tensor<S>> analytic;
    {
        Graph<S> g;
        Leaves<S> leaves = register_leaves(g, params, /*requires_grad=*/true);
        auto loss = build(g, leaves);
        check(g.value(loss).numel() == 1, "grad_check: function must be scalar-valued");
        if (std::isnan(static_cast<double>(g.value(loss).at(0)))) {
            res.nan_found = true;
            res.nan_param = "<loss>";
            return res;
        }
        g.backward(loss);
        analytic.reserve(params.size());
        for (size_t i = 0; i < params.size(); ++i) analytic.push_back(g.grad(leaves.ids[i]));
    }

    auto eval = [&]() -> double {
        Graph<S> g;
        Leaves<S> leaves = register_leaves(g, params, /*requires_grad=*/false);
        auto loss = build(g, leaves);
        return static_cast<double>(g.value(loss).at(0));
    };

    for (size_t i = 0; i < params.size(); ++i) {
        Tensor<S>& value = params.entry(i).value;
        const std::string& name = params.entry(i).name;
        const int64_t n = value.numel();

        std::vector<int64_t> coords;
        if (max_coords_per_param < 0 || n <= max_coords_per_param) {
            coords.resize(static_cast<size_t>(n));
            for (int64_t j = 0; j < n; ++j) coords[static_cast<size_t>(j)] = j;
        } else {
            Rng rng(fnv1a(name, sample_seed ^ 0x9e3779b97f4a7c15ull));
            for (int64_t j = 0; j < max_coords_per_param; ++j)
                coords.push_back(static_cast<int64_t>(rng.below(static_cast<uint64_t>(n))));
        }

        for (int64_t j : coords) {
            S* p = value.mutable_data();
            const S orig = p[j];
            p[j] = orig + static_cast<S>(eps);
            const double f_plus = eval();
            p[j] = orig - static_cast<S>(eps);
            const double f_minus = eval();
            p[j] = orig;

            if (std::isnan(f_plus) || std::isnan(f_minus)) {
                res.nan_found = true;
                res.nan_param = name;
                return res;
            }
            const double fd = (f_plus - f_minus) / (2.0 * eps);
            const double an = static_cast<double>(analytic[i].at(j));
            if (std::isnan(an)) {
                res.nan_found = true;
                res.nan_param = name;
                return res;
            }
            const double rel = std::abs(an - fd) / std::max(1.0, std::abs(an));
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = name;
                res.worst_index = j;
            }
        }
    }
    return res;
}

}  // namespace tabr
