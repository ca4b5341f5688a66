#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tabr/common.hpp"
#include "tabr/tensor.hpp"

namespace tabr {

enum class SimilarityKind { dot_qk, l2_key };
enum class ValueKind { wv, wy_wv, wy_t };

std::string similarity_name(SimilarityKind s);
SimilarityKind similarity_from_name(const std::string& s);
std::string value_kind_name(ValueKind v);
ValueKind value_kind_from_name(const std::string& s);

struct RetrievalConfig {
    SimilarityKind similarity = SimilarityKind::l2_key;
    ValueKind value = ValueKind::wy_t;
    int64_t m = 96;
    bool scale_by_sqrt_d = false;
    bool include_self = false;
    double attention_dropout = 0.0;

    void validate() const {
        check(m >= 1, "retrieval m must be >= 1");
        check(attention_dropout >= 0.0 && attention_dropout < 1.0,
              "attention dropout must be in [0,1)");
    }
};

// The design ladder from the similarity/value ablation: Step-0 is the vanilla
// attention baseline, Step-4 is the final configuration.
inline RetrievalConfig ladder_step_retrieval(int step, int64_t m, double attention_dropout) {
    RetrievalConfig r;
    r.m = m;
    r.attention_dropout = attention_dropout;
    switch (step) {
        case 0:
            r.similarity = SimilarityKind::dot_qk;
            r.value = ValueKind::wv;
            r.scale_by_sqrt_d = true;
            r.include_self = true;
            break;
        case 1:
            r.similarity = SimilarityKind::dot_qk;
            r.value = ValueKind::wy_wv;
            r.scale_by_sqrt_d = true;
            r.include_self = true;
            break;
        case 2:
            r.similarity = SimilarityKind::l2_key;
            r.value = ValueKind::wy_wv;
            r.scale_by_sqrt_d = true;
            r.include_self = true;
            break;
        case 3:
            r.similarity = SimilarityKind::l2_key;
            r.value = ValueKind::wy_t;
            r.scale_by_sqrt_d = true;
            r.include_self = true;
            break;
        case 4:
            r.similarity = SimilarityKind::l2_key;
            r.value = ValueKind::wy_t;
            r.scale_by_sqrt_d = false;
            r.include_self = false;
            break;
        default:
            fatal("ladder step must be in 0..4");
    }
    return r;
}

// Pairwise similarity of two single vectors (tests and small paths).
template <class S>
double similarity_score(const RetrievalConfig& cfg, const S* a, const S* b, int64_t d,
                        const S* q = nullptr) {
    double scale = cfg.scale_by_sqrt_d ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
    if (cfg.similarity == SimilarityKind::dot_qk) {
        const S* query = q ? q : a;
        double acc = 0;
        for (int64_t i = 0; i < d; ++i)
            acc += static_cast<double>(query[i]) * static_cast<double>(b[i]);
        return acc * scale;
    }
    double acc = 0;
    for (int64_t i = 0; i < d; ++i) {
        double c = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += c * c;
    }
    return -acc * scale;
}

// Indices of the m largest scores, ties broken by lower candidate index.
// `exclude` (if >= 0) is removed from candidacy before selection. When fewer
// than m candidates remain, all are used (the caller warns).
template <class S>
std::vector<int32_t> top_m_indices(const S* scores, int64_t n, int64_t m,
                                   int64_t exclude = -1) {
    std::vector<int32_t> idx;
    idx.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        if (i != exclude) idx.push_back(static_cast<int32_t>(i));
    auto better = [scores](int32_t a, int32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    const int64_t w = std::min<int64_t>(m, static_cast<int64_t>(idx.size()));
    std::nth_element(idx.begin(), idx.begin() + w - 1, idx.end(), better);
    idx.resize(static_cast<size_t>(w));
    std::sort(idx.begin(), idx.end(), better);
    return idx;
}

// Score matrix over all candidates: out[b, j] = S(target_b, candidate_j).
// Instrumented with the number of similarity evaluations, which is linear in
// the candidate count per target.
template <class S>
struct ScanResult {
    Tensor<S> scores;  // [B, N]
    int64_t similarity_evals = 0;
};

template <class S>
ScanResult<S> scan_similarities(const RetrievalConfig& cfg, const Tensor<S>& queries_or_keys,
                                const Tensor<S>& cand_keys) {
    using EM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using EV = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    const int64_t b = queries_or_keys.dim(0), n = cand_keys.dim(0);
    const int64_t d = cand_keys.dim(1);
    check(queries_or_keys.dim(1) == d, "scan: key width mismatch");
    const S scale =
        cfg.scale_by_sqrt_d ? static_cast<S>(1.0 / std::sqrt(static_cast<double>(d))) : S(1);

    ScanResult<S> out;
    out.scores = Tensor<S>({b, n});
    out.similarity_evals = b * n;
    Eigen::Map<EM> sm(out.scores.mutable_data(), b, n);
    Eigen::Map<const EM> qm(queries_or_keys.data(), b, d);
    Eigen::Map<const EM> km(cand_keys.data(), n, d);
    if (cfg.similarity == SimilarityKind::dot_qk) {
        sm.noalias() = qm * km.transpose();
        sm *= scale;
    } else {
        sm.noalias() = qm * km.transpose();
        EV qn = qm.rowwise().squaredNorm();
        EV kn = km.rowwise().squaredNorm();
        sm = (2 * sm).colwise() - qn;
        sm.rowwise() -= kn.transpose();
        // now sm = -(||q||^2 + ||k||^2 - 2qk) = -||q - k||^2
        sm *= scale;
    }
    return out;
}

// Per-target retrieval record: selected candidate indices with their
// pre-dropout softmax weights, plus the weight of the optionally appended
// self entry. Feeds the context-change metric and the analysis tools.
struct ContextRecord {
    std::vector<int32_t> indices;
    std::vector<double> weights;
    double self_weight = 0.0;
};

// Change of one object's context between two epochs: novel attention mass on
// newly appearing candidates plus the increase (clamped at 0) of mass on the
// retained ones. Lives in [0, 2].
double delta_context(const ContextRecord& prev, const ContextRecord& cur);

}  // namespace tabr
