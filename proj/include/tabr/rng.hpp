#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tabr/common.hpp"

namespace tabr {

// Inverse of the standard normal CDF (Acklam's rational approximation,
// relative error < 1.2e-9). Shared by the quantile feature transform and by
// normal sampling, so every normal draw is reproducible bit-for-bit across
// standard libraries.
inline double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    check(p > 0.0 && p < 1.0, "inverse_normal_cdf: p must be in (0,1)");
    const double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Deterministic RNG stream. mt19937_64 gives the engine; the uniform/normal
// transforms are hand-rolled because std distributions are not portable
// across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        // uniform() can return 0; shift into (0,1)
        double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return inverse_normal_cdf(u);
    }

    // integer in [0, n)
    uint64_t below(uint64_t n) {
        check(n > 0, "Rng::below: n must be positive");
        // rejection sampling keeps the draw unbiased
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// One global seed, independent named streams: toggling a feature that
// consumes one stream (e.g. dropout) does not shift the draws of any other
// stream (shuffling, init, ...).
class SeedSequence {
public:
    explicit SeedSequence(uint64_t seed) : seed_(seed) {}

    Rng stream(const std::string& name) const {
        return Rng(fnv1a(name, fnv1a(&seed_, sizeof(seed_))));
    }

    Rng stream(const std::string& name, uint64_t index) const {
        uint64_t h = fnv1a(name, fnv1a(&seed_, sizeof(seed_)));
        return Rng(fnv1a(&index, sizeof(index), h));
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
};

}  // namespace tabr
