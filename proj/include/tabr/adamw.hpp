#pragma once

#include <cmath>
#include <vector>

#include "tabr/params.hpp"

namespace tabr {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
};

// AdamW with decoupled weight decay: the decay step param -= lr*wd*param is
// applied separately from (and before) the adaptive update.
template <class S>
class AdamW {
public:
    AdamW(AdamWConfig cfg, const ParamStore<S>& params) : cfg_(cfg) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m_.push_back(Tensor<S>::zeros(params.entry(i).value.shape()));
            v_.push_back(Tensor<S>::zeros(params.entry(i).value.shape()));
        }
    }

    // grads[i] aligns with params.entry(i); undefined tensors mean zero grad.
    void step(ParamStore<S>& params, const std::vector<Tensor<S>>& grads) {
        check(grads.size() == m_.size(), "adamw: gradient count mismatch");
        ++t_;
        const S b1 = static_cast<S>(cfg_.beta1);
        const S b2 = static_cast<S>(cfg_.beta2);
        const S lr = static_cast<S>(cfg_.learning_rate);
        const S eps = static_cast<S>(cfg_.epsilon);
        const S bc1 = static_cast<S>(1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
        const S bc2 = static_cast<S>(1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
        const S decay = static_cast<S>(cfg_.learning_rate * cfg_.weight_decay);
        for (size_t i = 0; i < m_.size(); ++i) {
            Tensor<S>& pt = params.entry(i).value;
            const int64_t n = pt.numel();
            S* p = pt.mutable_data();
            S* m = m_[i].mutable_data();
            S* v = v_[i].mutable_data();
            const bool has_grad = grads[i].defined();
            if (has_grad)
                check(grads[i].numel() == n, "adamw: gradient shape mismatch for " +
                                                 params.entry(i).name);
            const S* gp = has_grad ? grads[i].data() : nullptr;
            for (int64_t j = 0; j < n; ++j) {
                const S gj = gp ? gp[j] : S(0);
                if (decay != S(0)) p[j] -= decay * p[j];
                m[j] = b1 * m[j] + (S(1) - b1) * gj;
                v[j] = b2 * v[j] + (S(1) - b2) * gj * gj;
                const S mhat = m[j] / bc1;
                const S vhat = v[j] / bc2;
                p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    int64_t step_count() const { return t_; }
    const AdamWConfig& config() const { return cfg_; }

private:
    AdamWConfig cfg_;
    std::vector<Tensor<S>> m_;
    std::vector<Tensor<S>> v_;
    int64_t t_ = 0;
};

}  // namespace tabr
