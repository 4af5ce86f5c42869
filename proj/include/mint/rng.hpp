#pragma once

#include "mint/common.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace mint {

// Deterministic counter-style generator (splitmix64 core). The standard
// <random> distributions are implementation-defined, so sampling through
// them would make checkpoints differ across standard libraries; every
// stochastic draw in the project goes through this type instead.
//
// Streams are derived by hashing a purpose string plus integer keys, so a
// draw made for (step, sample) never depends on evaluation order.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    static Rng stream(uint64_t seed, const std::string& purpose, uint64_t a = 0, uint64_t b = 0) {
        uint64_t h = fnv1a64(purpose, seed * 0x9e3779b97f4a7c15ull + 1);
        h = fnv1a64(&a, sizeof(a), h);
        h = fnv1a64(&b, sizeof(b), h);
        return Rng(h);
    }

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // Rejection to remove modulo bias.
        uint64_t lim = n * (UINT64_MAX / n);
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= lim);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Normal truncated to +-2 sigma, the usual ViT/DINO init.
    double trunc_normal(double stdev) {
        double z;
        do {
            z = normal();
        } while (std::abs(z) > 2.0);
        return z * stdev;
    }

    // Knuth product method carried in log space so large rates do not
    // underflow. O(lambda) per draw, fine at generator scale.
    uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        uint64_t k = 0;
        double acc = 0.0;
        for (;;) {
            double u;
            do {
                u = uniform();
            } while (u <= 0.0);
            acc += std::log(u);
            if (acc < -lambda) break;
            ++k;
        }
        return k;
    }

    template <typename S>
    void fill_trunc_normal(MatX<S>& m, double stdev) {
        for (Index j = 0; j < m.cols(); ++j)
            for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<S>(trunc_normal(stdev));
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mint
