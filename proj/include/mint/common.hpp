#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mint {

// Dense training math runs in float; evaluation, oracles and the gradient
// checker run in double. Templated code uses MatX<S>/VecX<S>.
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Mat = MatX<double>;
using Vec = VecX<double>;
using MatF = MatX<float>;
using VecF = VecX<float>;

using Index = Eigen::Index;

// Input/config/manifest problems the caller can fix. CLI maps these to
// exit code 1; everything else (std::runtime_error and friends) to 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RuntimeFailure : std::runtime_error {
    explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

// FNV-1a, used for config hashes and for deriving per-purpose RNG streams.
// std::hash is implementation-defined, which would break run-to-run
// byte-identical artifacts across toolchains.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t seed = 14695981039346656037ull) {
    return fnv1a64(s.data(), s.size(), seed);
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

template <typename S>
bool all_finite(const MatX<S>& m) {
    return m.allFinite();
}

}  // namespace mint
