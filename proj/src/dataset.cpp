#include "tabr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "tabr/common.hpp"

namespace tabr {

namespace fs = std::filesystem;

std::string task_name(Task t) {
    switch (t) {
        case Task::binclass: return "binclass";
        case Task::multiclass: return "multiclass";
        case Task::regression: return "regression";
    }
    return "?";
}

Task task_from_name(const std::string& s) {
    if (s == "binclass") return Task::binclass;
    if (s == "multiclass") return Task::multiclass;
    if (s == "regression") return Task::regression;
    fatal("unknown task: '" + s + "'");
}

const std::vector<int64_t>& Dataset::split(const std::string& name) const {
    if (name == "train") return idx_train;
    if (name == "val") return idx_val;
    if (name == "test") return idx_test;
    fatal("unknown split: " + name);
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    check(in.good(), "missing file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // tolerate one trailing blank line
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

double parse_double(const std::string& file, size_t lineno, std::string_view tok) {
    double v = 0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        fatal(file + ":" + std::to_string(lineno + 1) + ": bad number '" + std::string(tok) + "'");
    return v;
}

int64_t parse_int(const std::string& file, size_t lineno, std::string_view tok) {
    int64_t v = 0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        fatal(file + ":" + std::to_string(lineno + 1) + ": bad integer '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split_csv(const std::string& line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.emplace_back(line.data() + start, i - start);
            start = i + 1;
        }
    }
    return out;
}

// headerless numeric CSV -> row-major matrix; returns number of columns
int64_t read_numeric_csv(const std::string& path, int64_t expect_rows,
                         std::vector<double>& out) {
    auto lines = read_lines(path);
    check(static_cast<int64_t>(lines.size()) == expect_rows,
          path + ": expected " + std::to_string(expect_rows) + " rows, got " +
              std::to_string(lines.size()));
    int64_t cols = -1;
    out.clear();
    for (size_t i = 0; i < lines.size(); ++i) {
        auto toks = split_csv(lines[i]);
        if (cols < 0) {
            cols = static_cast<int64_t>(toks.size());
            out.reserve(static_cast<size_t>(expect_rows * cols));
        }
        if (static_cast<int64_t>(toks.size()) != cols)
            fatal(path + ":" + std::to_string(i + 1) + ": ragged row (expected " +
                  std::to_string(cols) + " columns, got " + std::to_string(toks.size()) + ")");
        for (auto t : toks) out.push_back(parse_double(path, i, t));
    }
    return cols;
}

std::vector<int64_t> read_index_file(const std::string& path, int64_t n) {
    auto lines = read_lines(path);
    check(!lines.empty(), "empty split: " + path);
    std::vector<int64_t> out;
    out.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        int64_t v = parse_int(path, i, lines[i]);
        check(v >= 0 && v < n,
              path + ":" + std::to_string(i + 1) + ": index " + std::to_string(v) +
                  " out of range [0," + std::to_string(n) + ")");
        out.push_back(v);
    }
    return out;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    const std::string meta_path = dir + "/meta.txt";
    auto meta_lines = read_lines(meta_path);
    std::unordered_map<std::string, std::string> meta;
    for (size_t i = 0; i < meta_lines.size(); ++i) {
        const std::string& line = meta_lines[i];
        if (line.empty()) continue;
        auto eq = line.find('=');
        check(eq != std::string::npos,
              meta_path + ":" + std::to_string(i + 1) + ": expected key=value");
        meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    check(meta.count("task"), meta_path + ": missing key 'task'");
    check(meta.count("n"), meta_path + ": missing key 'n'");
    ds.task = task_from_name(meta["task"]);
    ds.n_rows = parse_int(meta_path, 0, meta["n"]);
    check(ds.n_rows > 0, meta_path + ": n must be positive");
    if (ds.task != Task::regression) {
        check(meta.count("n_classes"), meta_path + ": missing key 'n_classes'");
        ds.n_classes = parse_int(meta_path, 0, meta["n_classes"]);
        if (ds.task == Task::binclass)
            check(ds.n_classes == 2, meta_path + ": binclass requires n_classes=2");
        else
            check(ds.n_classes >= 2, meta_path + ": multiclass requires n_classes>=2");
    }

    if (fs::exists(dir + "/X_num.csv"))
        ds.p_num = read_numeric_csv(dir + "/X_num.csv", ds.n_rows, ds.x_num);
    if (fs::exists(dir + "/X_bin.csv")) {
        const std::string path = dir + "/X_bin.csv";
        ds.p_bin = read_numeric_csv(path, ds.n_rows, ds.x_bin);
        for (size_t i = 0; i < ds.x_bin.size(); ++i)
            if (ds.x_bin[i] != 0.0 && ds.x_bin[i] != 1.0)
                fatal(path + ":" + std::to_string(i / static_cast<size_t>(ds.p_bin) + 1) +
                      ": binary features must be 0 or 1");
    }
    if (fs::exists(dir + "/X_cat.csv")) {
        const std::string path = dir + "/X_cat.csv";
        auto lines = read_lines(path);
        check(static_cast<int64_t>(lines.size()) == ds.n_rows,
              path + ": expected " + std::to_string(ds.n_rows) + " rows, got " +
                  std::to_string(lines.size()));
        std::vector<std::unordered_map<std::string, int64_t>> code_maps;
        for (size_t i = 0; i < lines.size(); ++i) {
            auto toks = split_csv(lines[i]);
            if (i == 0) {
                ds.p_cat = static_cast<int64_t>(toks.size());
                code_maps.resize(static_cast<size_t>(ds.p_cat));
                ds.x_cat.reserve(static_cast<size_t>(ds.n_rows * ds.p_cat));
            }
            check(static_cast<int64_t>(toks.size()) == ds.p_cat,
                  path + ":" + std::to_string(i + 1) + ": ragged row");
            for (size_t c = 0; c < toks.size(); ++c) {
                auto& cm = code_maps[c];
                std::string key(toks[c]);
                auto it = cm.find(key);
                int64_t code;
                if (it == cm.end()) {
                    code = static_cast<int64_t>(cm.size());
                    cm.emplace(std::move(key), code);
                } else {
                    code = it->second;
                }
                ds.x_cat.push_back(code);
            }
        }
        for (auto& cm : code_maps) ds.cat_cardinality.push_back(static_cast<int64_t>(cm.size()));
    }

    {
        const std::string path = dir + "/Y.csv";
        auto lines = read_lines(path);
        check(static_cast<int64_t>(lines.size()) == ds.n_rows,
              path + ": expected " + std::to_string(ds.n_rows) + " labels, got " +
                  std::to_string(lines.size()));
        if (ds.task == Task::regression) {
            ds.y_reg.reserve(lines.size());
            for (size_t i = 0; i < lines.size(); ++i)
                ds.y_reg.push_back(parse_double(path, i, lines[i]));
        } else {
            ds.y_class.reserve(lines.size());
            for (size_t i = 0; i < lines.size(); ++i) {
                int64_t y = parse_int(path, i, lines[i]);
                check(y >= 0 && y < ds.n_classes,
                      path + ":" + std::to_string(i + 1) + ": label " + std::to_string(y) +
                          " outside [0," + std::to_string(ds.n_classes) + ")");
                ds.y_class.push_back(y);
            }
        }
    }

    ds.idx_train = read_index_file(dir + "/idx_train.txt", ds.n_rows);
    ds.idx_val = read_index_file(dir + "/idx_val.txt", ds.n_rows);
    ds.idx_test = read_index_file(dir + "/idx_test.txt", ds.n_rows);

    // splits must be disjoint and cover all rows
    std::vector<int8_t> owner(static_cast<size_t>(ds.n_rows), -1);
    const char* names[3] = {"idx_train.txt", "idx_val.txt", "idx_test.txt"};
    const std::vector<int64_t>* splits[3] = {&ds.idx_train, &ds.idx_val, &ds.idx_test};
    for (int s = 0; s < 3; ++s) {
        for (int64_t r : *splits[s]) {
            int8_t prev = owner[static_cast<size_t>(r)];
            if (prev != -1)
                fatal("row " + std::to_string(r) + " appears in both " + names[prev] + " and " +
                      names[s]);
            owner[static_cast<size_t>(r)] = static_cast<int8_t>(s);
        }
    }
    for (int64_t r = 0; r < ds.n_rows; ++r)
        if (owner[static_cast<size_t>(r)] == -1)
            fatal("row " + std::to_string(r) + " is missing from all splits");

    return ds;
}

std::vector<std::vector<int64_t>> make_batches(const std::vector<int64_t>& indices,
                                               int64_t batch_size, bool shuffle, Rng rng) {
    check(batch_size >= 1, "make_batches: batch_size must be >= 1");
    std::vector<int64_t> order = indices;
    if (shuffle) rng.shuffle(order);
    std::vector<std::vector<int64_t>> batches;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch_size)) {
        size_t end = std::min(order.size(), start + static_cast<size_t>(batch_size));
        batches.emplace_back(order.begin() + static_cast<int64_t>(start),
                             order.begin() + static_cast<int64_t>(end));
    }
    return batches;
}

}  // namespace tabr
