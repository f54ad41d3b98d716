#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace nfc {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Error taxonomy. Exit codes in the CLI map: precondition -> 2, budget -> 3,
// invariant violation -> 1.
// ---------------------------------------------------------------------------
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingSplittingData : PreconditionError {
    using PreconditionError::PreconditionError;
};
struct InvalidUnits : PreconditionError {
    using PreconditionError::PreconditionError;
};
struct NearZeroEmbedding : PreconditionError {
    using PreconditionError::PreconditionError;
};
struct DomainError : PreconditionError {
    using PreconditionError::PreconditionError;
};
struct FactorizationBudget : BudgetExceeded {
    using BudgetExceeded::BudgetExceeded;
};

inline i64 ipow(i64 base, int exp) {
    i64 r = 1;
    while (exp-- > 0) {
        if (base != 0 && r > INT64_MAX / (base < 0 ? -base : base))
            throw std::overflow_error("ipow overflow");
        r *= base;
    }
    return r;
}

inline BigInt bpow(const BigInt& base, unsigned exp) {
    BigInt r = 1, b = base;
    while (exp) {
        if (exp & 1) r *= b;
        b *= b;
        exp >>= 1;
    }
    return r;
}

inline i64 floordiv(i64 a, i64 b) {
    i64 q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline i64 imod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 gcd64(i64 a, i64 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) { i64 t = a % b; a = b; b = t; }
    return a;
}

/// p-adic valuation; v_p(0) is clamped to `cap` (caller supplies context).
inline int vp(i64 a, i64 p, int cap = 64) {
    if (a == 0) return cap;
    if (a < 0) a = -a;
    int v = 0;
    while (v < cap && a % p == 0) { a /= p; ++v; }
    return v;
}

inline int vp_big(BigInt a, i64 p, int cap = 1 << 30) {
    if (a == 0) return cap;
    if (a < 0) a = -a;
    int v = 0;
    while (v < cap && a % p == 0) { a /= p; ++v; }
    return v;
}

// FNV-1a, used for cache keys and config hashes.
inline u64 fnv1a(const void* data, size_t len, u64 h = 1469598103934665603ull) {
    const unsigned char* s = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= s[i];
        h *= 1099511628211ull;
    }
    return h;
}
inline u64 fnv1a(const std::string& s, u64 h = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::string hex64(u64 h) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) { s[i] = d[h & 15]; h >>= 4; }
    return s;
}

// Deterministic splitmix64, used wherever a seeded generator is required.
struct SplitMix64 {
    u64 state;
    explicit SplitMix64(u64 seed) : state(seed) {}
    u64 next() {
        u64 z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    u64 below(u64 n) { return n ? next() % n : 0; }
};

}  // namespace nfc
