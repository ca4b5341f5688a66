#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "tabr/checkpoint.hpp"
#include "tabr/infer.hpp"
#include "test_helpers.hpp"

using namespace tabr;
using tabr::testing::make_small_tabr;

namespace {

BackboneConfig bb8() {
    BackboneConfig bb;
    bb.d = 8;
    return bb;
}

RetrievalConfig rc(int64_t m) {
    RetrievalConfig r;
    r.m = m;
    return r;
}

}  // namespace

TEST_CASE("rebuilding a store from identical inputs gives bitwise-identical keys") {
    auto s = make_small_tabr<double>(50, 4, Task::regression, 0, bb8(), rc(4), 31);
    auto a = build_store(s.model, s.ctx);
    auto b = build_store(s.model, s.ctx);
    REQUIRE(a.keys.numel() == b.keys.numel());
    for (int64_t i = 0; i < a.keys.numel(); ++i) CHECK(a.keys.at(i) == b.keys.at(i));
    CHECK(a.param_version == b.param_version);
}

TEST_CASE("with no additions the store is exactly the training candidates") {
    auto s = make_small_tabr<double>(50, 4, Task::regression, 0, bb8(), rc(4), 32);
    auto store = build_store(s.model, s.ctx);
    CHECK(store.count() == static_cast<int64_t>(s.ctx.train_rows.size()));
    auto enc = s.model.encode_candidates(s.ctx.x_cand);
    for (int64_t i = 0; i < enc.keys.numel(); ++i) CHECK(store.keys.at(i) == enc.keys.at(i));
    // predictions through the store equal plain full-scan predictions
    PredictOptions<double> po;
    po.store = &store;
    auto a = predict_tabr(s.model, s.ctx, s.ds.idx_test, po);
    auto b = predict_tabr(s.model, s.ctx, s.ds.idx_test);
    for (int64_t i = 0; i < a.raw.numel(); ++i) CHECK(a.raw.at(i) == b.raw.at(i));
}

TEST_CASE("add_candidates(A then B) equals build_store(A ∪ B) for every query") {
    for (uint64_t seed : {41u, 42u, 43u}) {
        auto s = make_small_tabr<double>(60, 4, Task::regression, 0, bb8(), rc(5), seed);
        const int64_t n = s.ctx.x_cand.dim(0);
        const int64_t n_a = n / 2;

        std::vector<int64_t> rows_a(n_a), rows_b(n - n_a);
        for (int64_t i = 0; i < n_a; ++i) rows_a[static_cast<size_t>(i)] = i;
        for (int64_t i = n_a; i < n; ++i) rows_b[static_cast<size_t>(i - n_a)] = i;
        Tensor<double> xa = gather_matrix_rows(s.ctx.x_cand, rows_a);
        Tensor<double> xb = gather_matrix_rows(s.ctx.x_cand, rows_b);
        std::vector<double> ya(s.ctx.cand_y_reg.begin(), s.ctx.cand_y_reg.begin() + n_a);
        std::vector<double> yb(s.ctx.cand_y_reg.begin() + n_a, s.ctx.cand_y_reg.end());

        auto grown = build_store(s.model, xa, ya, {});
        add_candidates(grown, s.model, xb, yb, {});
        auto full = build_store(s.model, s.ctx.x_cand, s.ctx.cand_y_reg, {});

        PredictOptions<double> pg, pf;
        pg.store = &grown;
        pf.store = &full;
        auto a = predict_tabr(s.model, s.ctx, s.ds.idx_test, pg);
        auto b = predict_tabr(s.model, s.ctx, s.ds.idx_test, pf);
        REQUIRE(a.raw.numel() == b.raw.numel());
        for (int64_t i = 0; i < a.raw.numel(); ++i) CHECK(a.raw.at(i) == b.raw.at(i));
    }
}

TEST_CASE("duplicate candidates tie and occupy adjacent ranks") {
    auto s = make_small_tabr<double>(40, 4, Task::regression, 0, bb8(), rc(4), 44);
    auto store = build_store(s.model, s.ctx);
    // duplicate candidate 0
    Tensor<double> dup = gather_matrix_rows(s.ctx.x_cand, {0});
    add_candidates(store, s.model, dup, {s.ctx.cand_y_reg[0]}, {});

    PredictOptions<double> po;
    po.store = &store;
    po.want_records = true;
    auto out = predict_tabr(s.model, s.ctx, s.ds.idx_test, po);
    const int32_t dup_id = static_cast<int32_t>(store.count() - 1);
    for (const auto& rec : out.records) {
        // if the original 0 is selected, the duplicate sits right after it
        for (size_t j = 0; j < rec.indices.size(); ++j) {
            if (rec.indices[j] == 0 && j + 1 < rec.indices.size()) {
                CHECK(rec.indices[j + 1] == dup_id);
                CHECK(rec.weights[j] == doctest::Approx(rec.weights[j + 1]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("a store built with different parameters is rejected") {
    auto s = make_small_tabr<double>(40, 4, Task::regression, 0, bb8(), rc(4), 45);
    auto store = build_store(s.model, s.ctx);
    s.model.params["head/b"].mutable_data()[0] += 1.0;  // new version
    CHECK_THROWS_AS(
        add_candidates(store, s.model, gather_matrix_rows(s.ctx.x_cand, {0}),
                       {s.ctx.cand_y_reg[0]}, {}),
        FatalError);
    PredictOptions<double> po;
    po.store = &store;
    CHECK_THROWS_AS(predict_tabr(s.model, s.ctx, s.ds.idx_test, po), FatalError);
}

TEST_CASE("label/task mismatch on addition is fatal") {
    auto s = make_small_tabr<double>(40, 4, Task::regression, 0, bb8(), rc(4), 46);
    auto store = build_store(s.model, s.ctx);
    CHECK_THROWS_AS(add_candidates(store, s.model, gather_matrix_rows(s.ctx.x_cand, {0, 1}),
                                   {0.5}, {}),  // 2 rows, 1 label
                    FatalError);
}

TEST_CASE("growing a store keeps existing keys as a prefix (strict superset)") {
    auto s = make_small_tabr<double>(50, 4, Task::regression, 0, bb8(), rc(4), 47);
    const int64_t n = s.ctx.x_cand.dim(0);
    std::vector<int64_t> tenth;
    for (int64_t i = 0; i < n / 10 + 1; ++i) tenth.push_back(i);
    Tensor<double> x10 = gather_matrix_rows(s.ctx.x_cand, tenth);
    std::vector<double> y10;
    for (int64_t i : tenth) y10.push_back(s.ctx.cand_y_reg[static_cast<size_t>(i)]);
    auto small = build_store(s.model, x10, y10, {});
    auto full = build_store(s.model, s.ctx);
    for (int64_t i = 0; i < small.keys.numel(); ++i) CHECK(small.keys.at(i) == full.keys.at(i));
    CHECK(full.count() > small.count());
}

TEST_CASE("checkpoint round-trips bitwise with all optional sections") {
    namespace fs = std::filesystem;
    auto s = make_small_tabr<double>(40, 4, Task::regression, 0, bb8(), rc(4), 48);
    auto store = build_store(s.model, s.ctx);
    std::vector<std::vector<int32_t>> cache = {{0, 1, 2, 3}, {4, 5, 6, 7}};
    const std::string path =
        (fs::temp_directory_path() / "tabr_test_ckpt.bin").string();
    const std::string cfg = "model.arch=tabr-s\ntrain.seed=7\n";
    write_checkpoint<double>(path, cfg, s.pp, s.model.params, &store, &cache);

    auto loaded = read_checkpoint<double>(path);
    CHECK(loaded.config_text == cfg);
    REQUIRE(loaded.params.size() == s.model.params.size());
    for (size_t i = 0; i < loaded.params.size(); ++i) {
        CHECK(loaded.params[i].name == s.model.params.entry(i).name);
        const auto& a = loaded.params[i].value;
        const auto& b = s.model.params.entry(i).value;
        REQUIRE(a.numel() == b.numel());
        for (int64_t j = 0; j < a.numel(); ++j) CHECK(a.at(j) == b.at(j));
    }
    REQUIRE(loaded.store.has_value());
    CHECK(loaded.store->param_version == store.param_version);
    for (int64_t j = 0; j < store.keys.numel(); ++j)
        CHECK(loaded.store->keys.at(j) == store.keys.at(j));
    REQUIRE(loaded.context_cache.has_value());
    CHECK(*loaded.context_cache == cache);

    // preprocessor round-trip: transforms agree bitwise
    for (double v : {-2.0, 0.0, 0.33, 5.0})
        CHECK(loaded.preprocessor.transform_numeric(0, v) == s.pp.transform_numeric(0, v));
    CHECK(loaded.preprocessor.y_mean == s.pp.y_mean);

    // a fresh model accepts the stored parameters
    TabrModel<double> fresh(Task::regression, 0, s.pp.p_num, s.pp.output_dim() - s.pp.p_num,
                            s.model.backbone, s.model.retrieval, SeedSequence(999));
    load_params(fresh.params, loaded.params);
    CHECK(fresh.params.version() == s.model.params.version());

    // manifest exists and lists every tensor
    std::ifstream mf(path + ".manifest.txt");
    REQUIRE(mf.good());
    size_t lines = 0;
    std::string line;
    while (std::getline(mf, line))
        if (!line.empty()) ++lines;
    CHECK(lines == s.model.params.size());
    fs::remove(path);
    fs::remove(path + ".manifest.txt");
}

TEST_CASE("corrupted containers are rejected with a clear error") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "tabr_bad_ckpt.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTACKPTxxxxxxxxxxxx";
    }
    CHECK_THROWS_WITH_AS(ckpt::read_container(path), doctest::Contains("not a checkpoint"),
                         FatalError);
    fs::remove(path);
}
