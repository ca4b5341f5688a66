#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tabr/graph.hpp"
#include "tabr/rng.hpp"
#include "tabr/tensor.hpp"

namespace tabr {

// Named learnable tensors in declaration order (the checkpoint serializes
// them in this order). Each parameter gets its own init stream derived from
// its name, so adding or removing one module never shifts another's draws.
template <class S>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor<S> value;
    };

    int add(const std::string& name, Tensor<S> value) {
        check(!index_.count(name), "duplicate parameter name: " + name);
        index_[name] = entries_.size();
        entries_.push_back({name, std::move(value)});
        return static_cast<int>(entries_.size() - 1);
    }

    // uniform(-bound, bound) with bound = 1/sqrt(fan_in)
    int add_linear_weight(const std::string& name, int64_t fan_in, int64_t fan_out,
                          const SeedSequence& seeds) {
        return add_uniform(name, {fan_in, fan_out}, 1.0 / std::sqrt(static_cast<double>(fan_in)),
                           seeds);
    }

    int add_linear_bias(const std::string& name, int64_t fan_in, int64_t fan_out,
                        const SeedSequence& seeds) {
        return add_uniform(name, {fan_out}, 1.0 / std::sqrt(static_cast<double>(fan_in)), seeds);
    }

    int add_uniform(const std::string& name, Shape shape, double bound,
                    const SeedSequence& seeds) {
        Tensor<S> t(shape);
        Rng rng = seeds.stream("init/" + name);
        S* p = t.mutable_data();
        for (int64_t i = 0; i < t.numel(); ++i)
            p[i] = static_cast<S>(rng.uniform(-bound, bound));
        return add(name, std::move(t));
    }

    int add_zeros(const std::string& name, Shape shape) {
        return add(name, Tensor<S>(std::move(shape)));
    }

    int add_ones(const std::string& name, Shape shape) {
        return add(name, Tensor<S>::full(std::move(shape), S(1)));
    }

    size_t size() const { return entries_.size(); }
    Entry& entry(size_t i) { return entries_[i]; }
    const Entry& entry(size_t i) const { return entries_[i]; }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    Tensor<S>& operator[](const std::string& name) {
        auto it = index_.find(name);
        check(it != index_.end(), "unknown parameter: " + name);
        return entries_[it->second].value;
    }

    const Tensor<S>& operator[](const std::string& name) const {
        auto it = index_.find(name);
        check(it != index_.end(), "unknown parameter: " + name);
        return entries_[it->second].value;
    }

    int64_t total_numel() const {
        int64_t n = 0;
        for (const auto& e : entries_) n += e.value.numel();
        return n;
    }

    // deep copy of all values (early-stopping snapshots)
    std::vector<Tensor<S>> snapshot() const {
        std::vector<Tensor<S>> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.value.clone());
        return out;
    }

    void restore(const std::vector<Tensor<S>>& snap) {
        check(snap.size() == entries_.size(), "snapshot size mismatch");
        for (size_t i = 0; i < snap.size(); ++i) {
            check(snap[i].same_shape(entries_[i].value), "snapshot shape mismatch");
            entries_[i].value = snap[i].clone();
        }
    }

    // Version tag over all parameter bytes; candidate stores record it so a
    // stale store cannot serve a different model.
    uint64_t version() const {
        uint64_t h = 1469598103934665603ull;
        for (const auto& e : entries_) {
            h = fnv1a(e.name, h);
            h = fnv1a(e.value.data(), sizeof(S) * static_cast<size_t>(e.value.numel()), h);
        }
        return h;
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, size_t> index_;
};

// All parameters registered as graph leaves for one forward pass.
template <class S>
struct Leaves {
    std::vector<typename Graph<S>::Id> ids;  // parallel to ParamStore entries
    std::unordered_map<std::string, typename Graph<S>::Id> by_name;

    typename Graph<S>::Id operator[](const std::string& name) const {
        auto it = by_name.find(name);
        check(it != by_name.end(), "unknown parameter leaf: " + name);
        return it->second;
    }
};

template <class S>
Leaves<S> register_leaves(Graph<S>& g, const ParamStore<S>& params, bool requires_grad) {
    Leaves<S> leaves;
    leaves.ids.reserve(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        auto id = g.leaf(params.entry(i).value, requires_grad);
        leaves.ids.push_back(id);
        leaves.by_name[params.entry(i).name] = id;
    }
    return leaves;
}

}  // namespace tabr
