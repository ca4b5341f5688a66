#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tabr/candidate_store.hpp"
#include "tabr/params.hpp"
#include "tabr/preprocess.hpp"

namespace tabr {

// Single binary container: magic + version, then named sections. Parameters
// are raw little-endian arrays in declaration order; a sidecar text manifest
// lists tensor names, shapes and absolute file offsets.
//
//   TABRCKP\x01 | u32 n_sections | { u32 name_len, name, u64 len, payload }*
//
// Sections: "config" (text), "preprocessor", "params", and optionally
// "candidate_store" and "context_cache".

namespace ckpt {

void put_u32(std::string& out, uint32_t v);
void put_u64(std::string& out, uint64_t v);
void put_i64(std::string& out, int64_t v);
void put_f64(std::string& out, double v);
void put_bytes(std::string& out, const void* p, size_t n);
void put_str(std::string& out, const std::string& s);

struct Reader {
    const std::string* buf;
    size_t pos = 0;
    uint32_t u32();
    uint64_t u64();
    int64_t i64();
    double f64();
    std::string str();
    void bytes(void* p, size_t n);
};

std::string serialize_preprocessor(const Preprocessor& pp);
Preprocessor deserialize_preprocessor(const std::string& payload);

struct Section {
    std::string name;
    std::string payload;
};

void write_container(const std::string& path, const std::vector<Section>& sections);
std::vector<Section> read_container(const std::string& path);

template <class S>
constexpr uint8_t dtype_tag() {
    return sizeof(S) == 4 ? 4 : 8;
}

}  // namespace ckpt

template <class S>
struct Checkpoint {
    std::string config_text;
    Preprocessor preprocessor;
    std::vector<typename ParamStore<S>::Entry> params;
    std::optional<CandidateStore<S>> store;
    std::optional<std::vector<std::vector<int32_t>>> context_cache;
};

namespace ckpt {

template <class S>
void put_tensor(std::string& out, const Tensor<S>& t) {
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (int64_t i = 0; i < t.rank(); ++i) put_i64(out, t.dim(i));
    put_bytes(out, t.data(), sizeof(S) * static_cast<size_t>(t.numel()));
}

template <class S>
Tensor<S> get_tensor(Reader& r) {
    uint32_t rank = r.u32();
    Shape shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = r.i64();
    Tensor<S> t(shape);
    r.bytes(t.mutable_data(), sizeof(S) * static_cast<size_t>(t.numel()));
    return t;
}

}  // namespace ckpt

template <class S>
void write_checkpoint(const std::string& path, const std::string& config_text,
                      const Preprocessor& pp, const ParamStore<S>& params,
                      const CandidateStore<S>* store = nullptr,
                      const std::vector<std::vector<int32_t>>* context_cache = nullptr) {
    using namespace ckpt;
    std::vector<Section> sections;
    sections.push_back({"config", config_text});
    sections.push_back({"preprocessor", serialize_preprocessor(pp)});
    {
        std::string p;
        p.push_back(static_cast<char>(dtype_tag<S>()));
        put_u64(p, params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            put_str(p, params.entry(i).name);
            put_tensor(p, params.entry(i).value);
        }
        sections.push_back({"params", std::move(p)});
    }
    if (store) {
        std::string p;
        p.push_back(static_cast<char>(dtype_tag<S>()));
        put_u64(p, store->param_version);
        put_tensor(p, store->features);
        put_tensor(p, store->x_tilde);
        put_tensor(p, store->keys);
        put_u64(p, store->y_reg.size());
        for (double v : store->y_reg) put_f64(p, v);
        put_u64(p, store->y_class.size());
        for (int64_t v : store->y_class) put_i64(p, v);
        sections.push_back({"candidate_store", std::move(p)});
    }
    if (context_cache) {
        std::string p;
        put_u64(p, context_cache->size());
        for (const auto& c : *context_cache) {
            put_u32(p, static_cast<uint32_t>(c.size()));
            put_bytes(p, c.data(), sizeof(int32_t) * c.size());
        }
        sections.push_back({"context_cache", std::move(p)});
    }
    write_container(path, sections);

    // sidecar manifest: tensor name, shape, absolute file offset of its data
    std::ofstream mf(path + ".manifest.txt");
    check(mf.good(), "cannot write manifest for " + path);
    size_t off = 8 + 4;  // magic+version, section count
    for (const auto& s : sections) {
        off += 4 + s.name.size() + 8;  // section header
        if (s.name == "params") {
            size_t p = off + 1 + 8;  // dtype tag, entry count
            for (size_t i = 0; i < params.size(); ++i) {
                p += 4 + params.entry(i).name.size();
                p += 4 + 8 * static_cast<size_t>(params.entry(i).value.rank());
                mf << params.entry(i).name << " " << shape_str(params.entry(i).value.shape())
                   << " " << p << "\n";
                p += sizeof(S) * static_cast<size_t>(params.entry(i).value.numel());
            }
        }
        off += s.payload.size();
    }
}

template <class S>
Checkpoint<S> read_checkpoint(const std::string& path) {
    using namespace ckpt;
    Checkpoint<S> out;
    auto sections = read_container(path);
    bool saw_params = false;
    for (auto& s : sections) {
        Reader r{&s.payload};
        if (s.name == "config") {
            out.config_text = s.payload;
        } else if (s.name == "preprocessor") {
            out.preprocessor = deserialize_preprocessor(s.payload);
        } else if (s.name == "params") {
            uint8_t tag = static_cast<uint8_t>(s.payload.at(0));
            r.pos = 1;
            check(tag == dtype_tag<S>(),
                  "checkpoint stores " + std::to_string(int(tag) * 8) +
                      "-bit parameters; this build expects " +
                      std::to_string(int(dtype_tag<S>()) * 8) + "-bit");
            uint64_t n = r.u64();
            for (uint64_t i = 0; i < n; ++i) {
                typename ParamStore<S>::Entry e;
                e.name = r.str();
                e.value = get_tensor<S>(r);
                out.params.push_back(std::move(e));
            }
            saw_params = true;
        } else if (s.name == "candidate_store") {
            uint8_t tag = static_cast<uint8_t>(s.payload.at(0));
            r.pos = 1;
            check(tag == dtype_tag<S>(), "candidate store dtype mismatch");
            CandidateStore<S> st;
            st.param_version = r.u64();
            st.features = get_tensor<S>(r);
            st.x_tilde = get_tensor<S>(r);
            st.keys = get_tensor<S>(r);
            uint64_t nr = r.u64();
            st.y_reg.resize(nr);
            for (uint64_t i = 0; i < nr; ++i) st.y_reg[i] = r.f64();
            uint64_t nc = r.u64();
            st.y_class.resize(nc);
            for (uint64_t i = 0; i < nc; ++i) st.y_class[i] = r.i64();
            out.store = std::move(st);
        } else if (s.name == "context_cache") {
            std::vector<std::vector<int32_t>> cache(r.u64());
            for (auto& c : cache) {
                c.resize(r.u32());
                r.bytes(c.data(), sizeof(int32_t) * c.size());
            }
            out.context_cache = std::move(cache);
        }
    }
    check(saw_params, path + ": checkpoint has no params section");
    return out;
}

// load checkpoint parameters into a freshly built model (names and shapes
// must line up with the model configuration)
template <class S>
void load_params(ParamStore<S>& params,
                 const std::vector<typename ParamStore<S>::Entry>& stored) {
    check(params.size() == stored.size(),
          "checkpoint has " + std::to_string(stored.size()) + " parameters, model expects " +
              std::to_string(params.size()));
    for (size_t i = 0; i < stored.size(); ++i) {
        check(params.entry(i).name == stored[i].name,
              "checkpoint parameter order mismatch at " + stored[i].name);
        check(params.entry(i).value.same_shape(stored[i].value),
              "checkpoint shape mismatch for " + stored[i].name);
        params.entry(i).value = stored[i].value.clone();
    }
}

}  // namespace tabr
