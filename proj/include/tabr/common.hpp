#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace tabr {

// Unrecoverable errors (bad config, malformed data, contract violations)
// surface as exceptions so the CLI can print a one-line diagnostic and the
// tests can assert on them.
struct FatalError : std::runtime_error {
    explicit FatalError(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fatal(const std::string& msg) {
    throw FatalError(msg);
}

inline void check(bool cond, const std::string& msg) {
    if (!cond) fatal(msg);
}

inline void warn(const std::string& msg) {
    std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

inline double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// FNV-1a, used to derive named RNG streams and parameter-version tags.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t fnv1a(const std::string& s, uint64_t h = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), h);
}

}  // namespace tabr
