#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tabr/adamw.hpp"

using namespace tabr;

TEST_CASE("zero gradient and zero weight decay leave parameters unchanged") {
    ParamStore<double> ps;
    ps.add("w", Tensor<double>({3}, {1.0, -2.0, 0.5}));
    AdamW<double> opt({.learning_rate = 0.1, .weight_decay = 0.0}, ps);
    std::vector<Tensor<double>> grads = {Tensor<double>::zeros({3})};
    opt.step(ps, grads);
    CHECK(ps["w"].at(0) == 1.0);
    CHECK(ps["w"].at(1) == -2.0);
    CHECK(ps["w"].at(2) == 0.5);
}

TEST_CASE("single step with unit gradient moves by about lr") {
    // bias-corrected m'=v'=1 after one step, so the update is lr * 1/(1+eps)
    ParamStore<double> ps;
    ps.add("w", Tensor<double>({1}, {1.0}));
    AdamW<double> opt({.learning_rate = 0.1, .weight_decay = 0.0}, ps);
    std::vector<Tensor<double>> grads = {Tensor<double>({1}, {1.0})};
    opt.step(ps, grads);
    CHECK(ps["w"].at(0) == doctest::Approx(0.9).epsilon(1e-8));
}

TEST_CASE("decoupled decay-only step scales the parameter by 1 - lr*wd") {
    ParamStore<double> ps;
    ps.add("w", Tensor<double>({1}, {1.0}));
    AdamW<double> opt({.learning_rate = 0.1, .weight_decay = 0.01}, ps);
    std::vector<Tensor<double>> grads = {Tensor<double>::zeros({1})};
    opt.step(ps, grads);
    CHECK(ps["w"].at(0) == doctest::Approx(0.999).epsilon(1e-12));
}

TEST_CASE("undefined gradient tensors mean zero gradient") {
    ParamStore<double> ps;
    ps.add("w", Tensor<double>({2}, {1.0, 1.0}));
    AdamW<double> opt({.learning_rate = 0.1, .weight_decay = 0.0}, ps);
    std::vector<Tensor<double>> grads(1);  // undefined
    opt.step(ps, grads);
    CHECK(ps["w"].at(0) == 1.0);
}

TEST_CASE("steps are deterministic given identical inputs") {
    auto run = [] {
        ParamStore<double> ps;
        SeedSequence seeds(5);
        ps.add_uniform("w", {16}, 0.5, seeds);
        AdamW<double> opt({.learning_rate = 3e-4, .weight_decay = 1e-2}, ps);
        for (int i = 0; i < 10; ++i) {
            Tensor<double> gr({16});
            for (int64_t j = 0; j < 16; ++j)
                gr.mutable_data()[j] = 0.01 * static_cast<double>((i + 1) * (j - 8));
            std::vector<Tensor<double>> grads = {gr};
            opt.step(ps, grads);
        }
        std::vector<double> out;
        for (int64_t j = 0; j < 16; ++j) out.push_back(ps["w"].at(j));
        return out;
    };
    auto a = run();
    auto b = run();
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
