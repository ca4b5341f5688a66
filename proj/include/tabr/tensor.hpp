#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "tabr/common.hpp"

namespace tabr {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        check(d > 0, "tensor shape entries must be positive");
        n *= d;
    }
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Dense row-major tensor. Copies are shallow (shared storage); tensors are
// treated as immutable values once handed to the graph. Mutation happens only
// through mutable_data(), used by initialization and the optimizer.
template <class S>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)),
          store_(std::make_shared<std::vector<S>>(shape_numel(shape_), S(0))) {}

    Tensor(Shape shape, std::vector<S> data)
        : shape_(std::move(shape)), store_(std::make_shared<std::vector<S>>(std::move(data))) {
        check(static_cast<int64_t>(store_->size()) == shape_numel(shape_),
              "tensor data length does not match shape " + shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, S v) {
        Tensor t(std::move(shape));
        for (S& x : *t.store_) x = v;
        return t;
    }

    const Shape& shape() const { return shape_; }
    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t numel() const { return store_ ? static_cast<int64_t>(store_->size()) : 0; }
    int64_t dim(int64_t i) const { return shape_.at(static_cast<size_t>(i)); }

    // 2-D helpers
    int64_t rows() const { return rank() == 1 ? 1 : dim(rank() - 2); }
    int64_t cols() const { return rank() == 0 ? 1 : dim(rank() - 1); }

    bool defined() const { return static_cast<bool>(store_); }

    const S* data() const { return store_->data(); }
    S* mutable_data() { return store_->data(); }

    S at(int64_t i) const { return (*store_)[static_cast<size_t>(i)]; }

    // deep copy
    Tensor clone() const {
        Tensor t;
        t.shape_ = shape_;
        t.store_ = std::make_shared<std::vector<S>>(*store_);
        return t;
    }

    // same storage, new shape
    Tensor reshaped(Shape shape) const {
        check(shape_numel(shape) == numel(), "reshape changes element count");
        Tensor t;
        t.shape_ = std::move(shape);
        t.store_ = store_;
        return t;
    }

    template <class T>
    Tensor<T> cast() const {
        std::vector<T> out(static_cast<size_t>(numel()));
        for (int64_t i = 0; i < numel(); ++i) out[static_cast<size_t>(i)] = static_cast<T>(at(i));
        return Tensor<T>(shape_, std::move(out));
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    Shape shape_;
    std::shared_ptr<std::vector<S>> store_;
};

}  // namespace tabr
