#include "tabr/checkpoint.hpp"

#include <cstring>

namespace tabr {
namespace ckpt {

namespace {
constexpr char kMagic[8] = {'T', 'A', 'B', 'R', 'C', 'K', 'P', '\x01'};
}

void put_u32(std::string& out, uint32_t v) { put_bytes(out, &v, sizeof(v)); }
void put_u64(std::string& out, uint64_t v) { put_bytes(out, &v, sizeof(v)); }
void put_i64(std::string& out, int64_t v) { put_bytes(out, &v, sizeof(v)); }
void put_f64(std::string& out, double v) { put_bytes(out, &v, sizeof(v)); }

void put_bytes(std::string& out, const void* p, size_t n) {
    out.append(static_cast<const char*>(p), n);
}

void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.append(s);
}

uint32_t Reader::u32() {
    uint32_t v;
    bytes(&v, sizeof(v));
    return v;
}
uint64_t Reader::u64() {
    uint64_t v;
    bytes(&v, sizeof(v));
    return v;
}
int64_t Reader::i64() {
    int64_t v;
    bytes(&v, sizeof(v));
    return v;
}
double Reader::f64() {
    double v;
    bytes(&v, sizeof(v));
    return v;
}
std::string Reader::str() {
    uint32_t n = u32();
    check(pos + n <= buf->size(), "checkpoint: truncated string");
    std::string s = buf->substr(pos, n);
    pos += n;
    return s;
}
void Reader::bytes(void* p, size_t n) {
    check(pos + n <= buf->size(), "checkpoint: truncated payload");
    std::memcpy(p, buf->data() + pos, n);
    pos += n;
}

std::string serialize_preprocessor(const Preprocessor& pp) {
    std::string out;
    out.push_back(static_cast<char>(pp.task));
    put_i64(out, pp.p_num);
    put_i64(out, pp.p_bin);
    put_i64(out, pp.p_cat);
    for (int64_t c = 0; c < pp.p_num; ++c) {
        out.push_back(static_cast<char>(pp.policy[static_cast<size_t>(c)]));
        const auto& q = pp.quantiles[static_cast<size_t>(c)];
        put_u64(out, q.size());
        for (double v : q) put_f64(out, v);
        put_f64(out, pp.mean[static_cast<size_t>(c)]);
        put_f64(out, pp.stdev[static_cast<size_t>(c)]);
    }
    put_u64(out, pp.cat_cardinality.size());
    for (int64_t v : pp.cat_cardinality) put_i64(out, v);
    put_f64(out, pp.y_mean);
    put_f64(out, pp.y_std);
    return out;
}

Preprocessor deserialize_preprocessor(const std::string& payload) {
    Reader r{&payload};
    Preprocessor pp;
    pp.task = static_cast<Task>(payload.at(0));
    r.pos = 1;
    pp.p_num = r.i64();
    pp.p_bin = r.i64();
    pp.p_cat = r.i64();
    pp.policy.resize(static_cast<size_t>(pp.p_num));
    pp.quantiles.resize(static_cast<size_t>(pp.p_num));
    pp.mean.resize(static_cast<size_t>(pp.p_num));
    pp.stdev.resize(static_cast<size_t>(pp.p_num));
    for (int64_t c = 0; c < pp.p_num; ++c) {
        pp.policy[static_cast<size_t>(c)] = static_cast<NumPolicy>((*r.buf)[r.pos]);
        r.pos += 1;
        auto& q = pp.quantiles[static_cast<size_t>(c)];
        q.resize(r.u64());
        for (auto& v : q) v = r.f64();
        pp.mean[static_cast<size_t>(c)] = r.f64();
        pp.stdev[static_cast<size_t>(c)] = r.f64();
    }
    pp.cat_cardinality.resize(r.u64());
    for (auto& v : pp.cat_cardinality) v = r.i64();
    pp.y_mean = r.f64();
    pp.y_std = r.f64();
    return pp;
}

void write_container(const std::string& path, const std::vector<Section>& sections) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    uint32_t n = static_cast<uint32_t>(sections.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (const auto& s : sections) {
        uint32_t nl = static_cast<uint32_t>(s.name.size());
        out.write(reinterpret_cast<const char*>(&nl), sizeof(nl));
        out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
        uint64_t pl = s.payload.size();
        out.write(reinterpret_cast<const char*>(&pl), sizeof(pl));
        out.write(s.payload.data(), static_cast<std::streamsize>(s.payload.size()));
    }
    check(out.good(), "short write: " + path);
}

std::vector<Section> read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    check(in.good() && std::memcmp(magic, kMagic, 7) == 0,
          path + ": not a checkpoint container");
    check(magic[7] == kMagic[7], path + ": unsupported checkpoint version");
    uint32_t n;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    std::vector<Section> sections(n);
    for (auto& s : sections) {
        uint32_t nl;
        in.read(reinterpret_cast<char*>(&nl), sizeof(nl));
        check(in.good(), path + ": truncated section header");
        s.name.resize(nl);
        in.read(s.name.data(), nl);
        uint64_t pl;
        in.read(reinterpret_cast<char*>(&pl), sizeof(pl));
        check(in.good(), path + ": truncated section header");
        s.payload.resize(pl);
        in.read(s.payload.data(), static_cast<std::streamsize>(pl));
        check(in.good(), path + ": truncated section payload");
    }
    return sections;
}

}  // namespace ckpt
}  // namespace tabr
