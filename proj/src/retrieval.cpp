#include "tabr/retrieval.hpp"

#include <unordered_map>

namespace tabr {

std::string similarity_name(SimilarityKind s) {
    return s == SimilarityKind::dot_qk ? "dotqk" : "l2key";
}

SimilarityKind similarity_from_name(const std::string& s) {
    if (s == "dotqk") return SimilarityKind::dot_qk;
    if (s == "l2key") return SimilarityKind::l2_key;
    fatal("unknown similarity kind: '" + s + "'");
}

std::string value_kind_name(ValueKind v) {
    switch (v) {
        case ValueKind::wv: return "wv";
        case ValueKind::wy_wv: return "wy+wv";
        case ValueKind::wy_t: return "wy+t";
    }
    return "?";
}

ValueKind value_kind_from_name(const std::string& s) {
    if (s == "wv") return ValueKind::wv;
    if (s == "wy+wv") return ValueKind::wy_wv;
    if (s == "wy+t") return ValueKind::wy_t;
    fatal("unknown value kind: '" + s + "'");
}

double delta_context(const ContextRecord& prev, const ContextRecord& cur) {
    check(prev.indices.size() == prev.weights.size() &&
              cur.indices.size() == cur.weights.size(),
          "delta_context: malformed record");
    check(prev.indices.size() == cur.indices.size(),
          "delta_context: support sizes differ (" + std::to_string(prev.indices.size()) +
              " vs " + std::to_string(cur.indices.size()) + ")");
    std::unordered_map<int32_t, double> prev_w;
    prev_w.reserve(prev.indices.size() * 2);
    for (size_t i = 0; i < prev.indices.size(); ++i) prev_w[prev.indices[i]] = prev.weights[i];

    double novel = 0.0;
    double inter_cur = 0.0, inter_prev = 0.0;
    for (size_t i = 0; i < cur.indices.size(); ++i) {
        auto it = prev_w.find(cur.indices[i]);
        if (it == prev_w.end()) {
            novel += cur.weights[i];
        } else {
            inter_cur += cur.weights[i];
            inter_prev += it->second;
        }
    }
    double increased = std::max(inter_cur - inter_prev, 0.0);
    return novel + increased;
}

}  // namespace tabr
