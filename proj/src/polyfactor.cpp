#include "nfc/polyfactor.hpp"

#include <algorithm>
#include <map>

namespace nfc {
namespace fp {

i64 addm(i64 a, i64 b, i64 p) { i64 s = a + b; return s >= p ? s - p : s; }
i64 subm(i64 a, i64 b, i64 p) { i64 s = a - b; return s < 0 ? s + p : s; }
i64 mulm(i64 a, i64 b, i64 p) { return (a * b) % p; }

i64 powm(i64 a, i64 e, i64 p) {
    i64 r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mulm(r, a, p);
        a = mulm(a, a, p);
        e >>= 1;
    }
    return r;
}

i64 invm(i64 a, i64 p) { return powm(imod(a, p), p - 2, p); }

PolyFp trim(PolyFp f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
    return f;
}

int degree(const PolyFp& f) { return static_cast<int>(f.size()) - 1; }

PolyFp make_monic(PolyFp f, i64 p) {
    f = trim(std::move(f));
    if (f.empty()) return f;
    i64 inv = invm(f.back(), p);
    for (i64& c : f) c = mulm(c, inv, p);
    return f;
}

PolyFp mul(const PolyFp& a, const PolyFp& b, i64 p) {
    if (a.empty() || b.empty()) return {};
    PolyFp r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = addm(r[i + j], mulm(a[i], b[j], p), p);
    }
    return trim(std::move(r));
}

PolyFp rem(PolyFp a, const PolyFp& b, i64 p) {
    a = trim(std::move(a));
    int db = degree(b);
    if (db < 0) throw PreconditionError("poly rem by zero");
    i64 lead_inv = invm(b.back(), p);
    while (degree(a) >= db) {
        int da = degree(a);
        i64 q = mulm(a.back(), lead_inv, p);
        for (int i = 0; i <= db; ++i)
            a[da - db + i] = subm(a[da - db + i], mulm(q, b[i], p), p);
        a = trim(std::move(a));
    }
    return a;
}

PolyFp mulmod(const PolyFp& a, const PolyFp& b, const PolyFp& mod, i64 p) {
    return rem(mul(a, b, p), mod, p);
}

PolyFp gcd(PolyFp a, PolyFp b, i64 p) {
    a = trim(std::move(a));
    b = trim(std::move(b));
    while (!b.empty()) {
        PolyFp r = rem(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return make_monic(std::move(a), p);
}

PolyFp derivative(const PolyFp& f, i64 p) {
    PolyFp d;
    for (size_t i = 1; i < f.size(); ++i)
        d.push_back(mulm(f[i], static_cast<i64>(i % p), p));
    return trim(std::move(d));
}

PolyFp powmod(PolyFp base, const BigInt& e, const PolyFp& mod, i64 p) {
    PolyFp r{1 % p};
    base = rem(std::move(base), mod, p);
    BigInt k = e;
    while (k > 0) {
        if ((k & 1) != 0) r = mulmod(r, base, mod, p);
        base = mulmod(base, base, mod, p);
        k >>= 1;
    }
    return r;
}

PolyFp x_power_mod(const BigInt& e, const PolyFp& mod, i64 p) {
    return powmod(PolyFp{0, 1}, e, mod, p);
}

}  // namespace fp

namespace {

using namespace fp;

// Exact quotient a / b (b | a assumed).
PolyFp divide_exact(PolyFp a, const PolyFp& b, i64 p) {
    a = trim(std::move(a));
    int db = degree(b);
    if (db < 0) throw PreconditionError("poly divide by zero");
    if (degree(a) < db) return {};
    PolyFp q(a.size() - b.size() + 1, 0);
    i64 lead_inv = invm(b.back(), p);
    while (degree(a) >= db) {
        int da = degree(a);
        i64 c = mulm(a.back(), lead_inv, p);
        q[da - db] = c;
        for (int i = 0; i <= db; ++i)
            a[da - db + i] = subm(a[da - db + i], mulm(c, b[i], p), p);
        a = trim(std::move(a));
    }
    return trim(std::move(q));
}

// f(x^(1/p)); valid when f' == 0 (then f = g(x)^p and g is returned).
PolyFp pth_root(const PolyFp& f, i64 p) {
    PolyFp g;
    for (size_t i = 0; i < f.size(); i += static_cast<size_t>(p))
        g.push_back(f[i]);
    return trim(std::move(g));
}

// Squarefree decomposition in characteristic p.
void squarefree_decompose(PolyFp f, i64 p, int mult,
                          std::vector<std::pair<PolyFp, int>>& out) {
    f = make_monic(std::move(f), p);
    if (degree(f) <= 0) return;
    PolyFp df = derivative(f, p);
    if (df.empty()) {
        squarefree_decompose(pth_root(f, p), p,
                             mult * static_cast<int>(p), out);
        return;
    }
    PolyFp c = gcd(f, df, p);
    PolyFp w = divide_exact(f, c, p);
    int i = 1;
    while (degree(w) > 0) {
        PolyFp y = gcd(w, c, p);
        PolyFp part = divide_exact(w, y, p);
        if (degree(part) > 0) out.emplace_back(make_monic(part, p), mult * i);
        w = std::move(y);
        c = divide_exact(c, w, p);
        ++i;
    }
    if (degree(c) > 0)
        squarefree_decompose(pth_root(c, p), p,
                             mult * static_cast<int>(p), out);
}

// Distinct-degree factorization of a monic squarefree f:
// returns pairs (d, product of all irreducible factors of degree d).
std::vector<std::pair<int, PolyFp>> distinct_degree(PolyFp f, i64 p) {
    std::vector<std::pair<int, PolyFp>> out;
    PolyFp h = x_power_mod(1, f, p);  // x mod f
    int d = 0;
    while (degree(f) >= 2 * (d + 1)) {
        ++d;
        h = powmod(h, p, f, p);  // x^(p^d) mod f
        PolyFp diff = h;
        if (diff.size() < 2) diff.resize(2, 0);
        diff[1] = subm(diff[1], 1, p);  // h - x
        PolyFp g = gcd(trim(std::move(diff)), f, p);
        if (degree(g) > 0) {
            out.emplace_back(d, g);
            f = divide_exact(f, g, p);
            h = rem(std::move(h), f, p);
        }
    }
    if (degree(f) > 0) out.emplace_back(degree(f), f);
    return out;
}

// Cantor-Zassenhaus equal-degree splitting of a monic squarefree f that is
// a product of deg(f)/d irreducible factors, all of degree d. The generator
// is seeded by the caller so runs are reproducible.
void equal_degree_split(const PolyFp& f, int d, i64 p, SplitMix64& rng,
                        std::vector<PolyFp>& out) {
    int n = degree(f);
    if (n == d) {
        out.push_back(f);
        return;
    }
    PolyFp g;
    while (true) {
        PolyFp a(static_cast<size_t>(n), 0);
        for (i64& c : a) c = static_cast<i64>(rng.below(static_cast<u64>(p)));
        a = trim(std::move(a));
        if (degree(a) < 1) continue;
        if (p == 2) {
            // trace map: a + a^2 + ... + a^(2^(d-1))
            PolyFp t = a, acc = a;
            for (int i = 1; i < d; ++i) {
                t = mulmod(t, t, f, p);
                for (size_t j = 0; j < t.size(); ++j) {
                    if (acc.size() <= j) acc.resize(j + 1, 0);
                    acc[j] = addm(acc[j], t[j], p);
                }
                acc = trim(std::move(acc));
            }
            g = gcd(acc, f, p);
        } else {
            BigInt e = (bpow(BigInt(p), static_cast<unsigned>(d)) - 1) / 2;
            PolyFp b = powmod(a, e, f, p);
            if (b.empty()) continue;
            b[0] = subm(b[0], 1, p);
            g = gcd(trim(std::move(b)), f, p);
        }
        if (degree(g) > 0 && degree(g) < n) break;
    }
    equal_degree_split(g, d, p, rng, out);
    equal_degree_split(divide_exact(f, g, p), d, p, rng, out);
}

}  // namespace

std::vector<FpFactor> factor_mod_p(const std::vector<i64>& f_int, i64 p) {
    PolyFp f;
    f.reserve(f_int.size());
    for (i64 c : f_int) f.push_back(imod(c, p));
    f = make_monic(std::move(f), p);
    if (degree(f) < 1) throw PreconditionError("factor_mod_p: constant input");

    u64 seed = fnv1a(&p, sizeof p);
    for (i64 c : f) seed = fnv1a(&c, sizeof c, seed);
    SplitMix64 rng(seed);

    std::vector<std::pair<PolyFp, int>> sqf;
    squarefree_decompose(f, p, 1, sqf);

    std::vector<FpFactor> out;
    for (auto& [part, mult] : sqf) {
        for (auto& [d, prod] : distinct_degree(part, p)) {
            std::vector<PolyFp> irr;
            equal_degree_split(prod, d, p, rng, irr);
            // sort for a canonical, seed-independent ordering
            std::sort(irr.begin(), irr.end());
            for (auto& g : irr) out.push_back(FpFactor{g, mult});
        }
    }
    std::sort(out.begin(), out.end(), [](const FpFactor& a, const FpFactor& b) {
        if (a.poly.size() != b.poly.size()) return a.poly.size() < b.poly.size();
        if (a.poly != b.poly) return a.poly < b.poly;
        return a.multiplicity < b.multiplicity;
    });
    return out;
}

bool is_irreducible_mod_p(const PolyFp& f_in, i64 p) {
    PolyFp f = make_monic(f_in, p);
    int n = degree(f);
    if (n <= 0) return false;
    if (n == 1) return true;
    // x^(p^n) == x mod f, and gcd(x^(p^(n/q)) - x, f) == 1 for prime q | n
    PolyFp h = x_power_mod(1, f, p);
    std::vector<PolyFp> powers;  // x^(p^k) for k = 1..n
    for (int k = 1; k <= n; ++k) {
        h = powmod(h, p, f, p);
        powers.push_back(h);
    }
    PolyFp top = powers.back();
    if (top.size() < 2) top.resize(2, 0);
    top[1] = subm(top[1], 1, p);
    if (!trim(std::move(top)).empty()) return false;
    for (int q = 2; q <= n; ++q) {
        if (n % q != 0) continue;
        bool isprime = true;
        for (int t = 2; t * t <= q; ++t)
            if (q % t == 0) { isprime = false; break; }
        if (!isprime) continue;
        PolyFp diff = powers[n / q - 1];
        if (diff.size() < 2) diff.resize(2, 0);
        diff[1] = subm(diff[1], 1, p);
        if (degree(gcd(trim(std::move(diff)), f, p)) != 0) return false;
    }
    return true;
}

PolyFp find_irreducible(i64 p, int d) {
    if (d == 1) return PolyFp{0, 1};
    // deterministic sweep over monic polynomials, low coefficients first
    SplitMix64 rng(fnv1a(&p, sizeof p) ^ static_cast<u64>(d));
    for (u64 attempt = 0;; ++attempt) {
        PolyFp f(static_cast<size_t>(d) + 1, 0);
        f[d] = 1;
        if (attempt < (1u << 16)) {
            u64 code = attempt;
            for (int i = 0; i < d && code; ++i) {
                f[i] = static_cast<i64>(code % static_cast<u64>(p));
                code /= static_cast<u64>(p);
            }
        } else {
            for (int i = 0; i < d; ++i)
                f[i] = static_cast<i64>(rng.below(static_cast<u64>(p)));
        }
        if (f[0] == 0) continue;
        if (is_irreducible_mod_p(f, p)) return f;
    }
}

}  // namespace nfc
