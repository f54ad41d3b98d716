#include "nfc/congruence.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include "nfc/parallel.hpp"
#include "nfc/polyfactor.hpp"

namespace nfc {

namespace {

struct CacheState {
    std::mutex mu;
    std::map<std::string, std::shared_ptr<const std::vector<u64>>> mem;
    std::string dir;
    u64 hits = 0, misses = 0;
};
CacheState& cache() {
    static CacheState c;
    return c;
}

std::string histogram_key(const FieldSpec& f, i64 p, int m,
                          const IdealBasis* ideal, int mu,
                          const std::vector<i64>& x0) {
    u64 h = f.hash();
    h = fnv1a(&p, sizeof p, h);
    h = fnv1a(&m, sizeof m, h);
    h = fnv1a(&mu, sizeof mu, h);
    for (i64 c : x0) h = fnv1a(&c, sizeof c, h);
    if (ideal)
        for (const auto& row : ideal->rows)
            for (i64 c : row) h = fnv1a(&c, sizeof c, h);
    return hex64(h);
}

// Evaluate packed monomials at a point, mod q (values in [0, q)).
u64 eval_monomials_mod(const std::vector<std::pair<u64, i64>>& monos, int nvars,
                       const std::vector<u64>& x, u64 q) {
    u64 acc = 0;
    for (const auto& [exps, coeff] : monos) {
        u64 term = static_cast<u64>(imod(coeff, static_cast<i64>(q)));
        u64 e = exps;
        for (int var = 0; var < nvars; ++var) {
            int k = static_cast<int>((e >> (8 * var)) & 0xff);
            for (int rep = 0; rep < k; ++rep) term = term * x[var] % q;
        }
        acc += term;
        if (acc >= q) acc -= q;
    }
    return acc;
}

int max_total_degree(const std::vector<std::pair<u64, i64>>& monos, int nvars) {
    int deg = 0;
    for (const auto& [exps, coeff] : monos) {
        int d = 0;
        for (int var = 0; var < nvars; ++var)
            d += static_cast<int>((exps >> (8 * var)) & 0xff);
        deg = std::max(deg, d);
    }
    return deg;
}

// Histogram sweep: x ranges over x0 + stride * Z in each coordinate, modulo
// q. The innermost axis is walked with forward differences so the hot loop
// is add/compare only.
std::vector<u64> sweep_histogram(const std::vector<std::pair<u64, i64>>& monos,
                                 int nvars, u64 q, u64 stride,
                                 const std::vector<u64>& base, u64 budget) {
    u64 per_axis = std::max<u64>(q / std::min(stride, q), 1);
    double total = std::pow(static_cast<double>(per_axis), nvars);
    if (total > static_cast<double>(budget))
        throw BudgetExceeded("rho enumeration exceeds budget (" +
                             std::to_string(total) + " > " +
                             std::to_string(budget) + ")");
    int deg = max_total_degree(monos, nvars);

    // outermost axis (nvars-1) split across threads
    int nthreads = thread_count();
    std::vector<std::vector<u64>> hists(
        nthreads, std::vector<u64>(static_cast<size_t>(q), 0));

    parallel_chunks(0, static_cast<long long>(per_axis),
                    [&](int tid, long long lo, long long hi) {
        std::vector<u64>& hist = hists[tid];
        std::vector<u64> x(nvars);
        // odometer over axes 1..nvars-1; axis nvars-1 restricted to chunk
        std::vector<u64> idx(nvars, 0);
        idx[nvars - 1] = static_cast<u64>(lo);
        if (nvars == 1) {
            if (lo > 0) return;  // single axis handled by one chunk
        }
        auto set_coord = [&](int ax) {
            x[ax] = (base[ax] + stride * idx[ax]) % q;
        };
        for (int ax = 0; ax < nvars; ++ax) set_coord(ax);

        std::vector<u64> d(static_cast<size_t>(deg) + 1);
        std::vector<u64> evals(static_cast<size_t>(deg) + 1);
        while (true) {
            std::vector<u64> pt = x;
            if (per_axis <= static_cast<u64>(deg) + 1) {
                // too few points for differences; evaluate directly
                for (u64 k = 0; k < per_axis; ++k) {
                    pt[0] = (base[0] + stride * k) % q;
                    ++hist[eval_monomials_mod(monos, nvars, pt, q)];
                }
                goto advance;
            }
            // forward differences along axis 0
            for (int k = 0; k <= deg; ++k) {
                pt[0] = (base[0] + stride * static_cast<u64>(k)) % q;
                evals[k] = eval_monomials_mod(monos, nvars, pt, q);
            }
            for (int k = 0; k <= deg; ++k) d[k] = evals[k];
            for (int lev = 1; lev <= deg; ++lev)
                for (int k = deg; k >= lev; --k)
                    d[k] = (d[k] + q - d[k - 1]) % q;
            // hot loop
            switch (deg) {
                case 2: {
                    u64 d0 = d[0], d1 = d[1], d2 = d[2];
                    for (u64 k = 0; k < per_axis; ++k) {
                        ++hist[d0];
                        d0 += d1; d0 -= q & (0 - (d0 >= q ? 1ull : 0ull));
                        d1 += d2; d1 -= q & (0 - (d1 >= q ? 1ull : 0ull));
                    }
                    break;
                }
                case 3: {
                    u64 d0 = d[0], d1 = d[1], d2 = d[2], d3 = d[3];
                    for (u64 k = 0; k < per_axis; ++k) {
                        ++hist[d0];
                        d0 += d1; d0 -= q & (0 - (d0 >= q ? 1ull : 0ull));
                        d1 += d2; d1 -= q & (0 - (d1 >= q ? 1ull : 0ull));
                        d2 += d3; d2 -= q & (0 - (d2 >= q ? 1ull : 0ull));
                    }
                    break;
                }
                default: {
                    std::vector<u64> dd = d;
                    for (u64 k = 0; k < per_axis; ++k) {
                        ++hist[dd[0]];
                        for (int lev = 0; lev < deg; ++lev) {
                            dd[lev] += dd[lev + 1];
                            if (dd[lev] >= q) dd[lev] -= q;
                        }
                    }
                }
            }
        advance:
            // advance odometer on axes 1..nvars-1
            int ax = 1;
            while (ax < nvars) {
                u64 limit = (ax == nvars - 1) ? static_cast<u64>(hi)
                                              : per_axis;
                u64 lobase = (ax == nvars - 1) ? static_cast<u64>(lo) : 0;
                if (++idx[ax] >= limit) {
                    idx[ax] = lobase;
                    set_coord(ax);
                    ++ax;
                } else {
                    set_coord(ax);
                    break;
                }
            }
            if (ax >= nvars) break;
            if (nvars == 1) break;
        }
    });

    std::vector<u64> out(static_cast<size_t>(q), 0);
    for (const auto& h : hists)
        for (size_t i = 0; i < out.size(); ++i) out[i] += h[i];
    return out;
}

bool load_from_disk(const std::string& key, std::vector<u64>& out, u64 q) {
    CacheState& c = cache();
    if (c.dir.empty()) return false;
    namespace fs = std::filesystem;
    fs::path p = fs::path(c.dir) / ("rho_" + key + ".bin");
    std::ifstream in(p, std::ios::binary);
    if (!in) return false;
    u64 len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len != q) return false;
    out.resize(len);
    in.read(reinterpret_cast<char*>(out.data()),
            static_cast<std::streamsize>(len * sizeof(u64)));
    return static_cast<bool>(in);
}

void save_to_disk(const std::string& key, const std::vector<u64>& hist) {
    CacheState& c = cache();
    if (c.dir.empty()) return;
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(c.dir, ec);
    fs::path p = fs::path(c.dir) / ("rho_" + key + ".bin");
    if (fs::exists(p)) return;  // append-only
    std::ofstream out(p, std::ios::binary);
    u64 len = hist.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(reinterpret_cast<const char*>(hist.data()),
              static_cast<std::streamsize>(len * sizeof(u64)));
}

}  // namespace

void rho_cache_set_dir(const std::string& dir) { cache().dir = dir; }
std::pair<u64, u64> rho_cache_stats() {
    CacheState& c = cache();
    std::lock_guard<std::mutex> lk(c.mu);
    return {c.hits, c.misses};
}
void rho_cache_clear() {
    CacheState& c = cache();
    std::lock_guard<std::mutex> lk(c.mu);
    c.mem.clear();
    c.hits = c.misses = 0;
}

std::shared_ptr<const std::vector<u64>> rho_histogram(
    const FieldSpec& f, i64 p, int m, const IdealBasis* ideal, int mu,
    const std::vector<i64>& x0, u64 budget) {
    if (m < 1) throw PreconditionError("rho_histogram: m >= 1 required");
    int n = f.degree();
    u64 q = 1;
    for (int i = 0; i < m; ++i) {
        if (q > (1ull << 40) / static_cast<u64>(p))
            throw BudgetExceeded("rho_histogram: modulus too large");
        q *= static_cast<u64>(p);
    }
    if (mu > m) mu = m;
    u64 stride = 1;
    for (int i = 0; i < mu; ++i) stride *= static_cast<u64>(p);

    std::string key = histogram_key(f, p, m, ideal, mu, x0);
    CacheState& c = cache();
    {
        std::lock_guard<std::mutex> lk(c.mu);
        auto it = c.mem.find(key);
        if (it != c.mem.end()) {
            ++c.hits;
            return it->second;
        }
        ++c.misses;
    }
    {
        std::vector<u64> fromdisk;
        if (load_from_disk(key, fromdisk, q)) {
            auto sp = std::make_shared<const std::vector<u64>>(std::move(fromdisk));
            std::lock_guard<std::mutex> lk(c.mu);
            c.mem[key] = sp;
            return sp;
        }
    }

    std::vector<u64> base(static_cast<size_t>(n), 0);
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != n)
            throw PreconditionError("x0 must have n coordinates");
        for (int i = 0; i < n; ++i)
            base[static_cast<size_t>(i)] =
                static_cast<u64>(imod(x0[i], static_cast<i64>(stride)));
    }
    const auto monos =
        ideal ? f.norm_monomials_for_ideal(*ideal) : f.norm_monomials();
    std::vector<u64> hist = sweep_histogram(monos, n, q, stride, base, budget);
    save_to_disk(key, hist);
    auto sp = std::make_shared<const std::vector<u64>>(std::move(hist));
    std::lock_guard<std::mutex> lk(c.mu);
    c.mem[key] = sp;
    return sp;
}

u64 rho_bruteforce(const CongruenceQuery& q, u64 budget) {
    if (q.m == 0) return 1;
    u64 qm = static_cast<u64>(ipow(q.p, q.m));
    auto hist = rho_histogram(*q.field, q.p, q.m, q.ideal, q.mu(), q.x0, budget);
    BigInt a = q.A % qm;
    if (a < 0) a += qm;
    return (*hist)[static_cast<size_t>(static_cast<u64>(a))];
}

u64 rho_closed_form(const FieldSpec& f, i64 p, int m, const BigInt& A) {
    i64 nD = static_cast<i64>(f.degree()) * f.discriminant();
    if (nD % p == 0)
        throw PreconditionError("rho_closed_form: p divides n D_K");
    int k = vp_big(A, p, m + 1);
    if (k >= m) throw PreconditionError("rho_closed_form: v_p(A) >= m");
    SplittingType st = f.splitting_type(p);
    BigInt num = bpow(BigInt(p), static_cast<unsigned>(m * (f.degree() - 1) + 1));
    num *= f.r_K_prime_power(p, k);
    BigInt den = p - 1;
    for (auto& [e, fdeg] : st.ef) {
        num *= bpow(BigInt(p), static_cast<unsigned>(fdeg)) - 1;
        den *= bpow(BigInt(p), static_cast<unsigned>(fdeg));
    }
    if (num % den != 0)
        throw InvariantViolation("rho_closed_form: non-integral value");
    BigInt v = num / den;
    return static_cast<u64>(v);
}

u64 hensel_lift_rho(const CongruenceQuery& q, int target_m, u64 budget) {
    if (target_m < q.m) throw PreconditionError("hensel_lift_rho: target < m");
    if (q.A == 0) throw PreconditionError("hensel_lift_rho: A = 0");
    int k = vp_big(q.A, q.p, q.m);
    int vn = vp(q.field->degree(), q.p);
    if (2 * (q.mu() + k + vn) >= q.m)
        throw PreconditionError(
            "hensel_lift_rho: l + v_p(A) + v_p(n) < m/2 fails");
    u64 out = rho_bruteforce(q, budget);
    for (int lev = q.m; lev < target_m; ++lev) {
        u64 factor = static_cast<u64>(ipow(q.p, q.field->degree() - 1));
        if (out > UINT64_MAX / factor)
            throw BudgetExceeded("hensel_lift_rho: count overflows");
        out *= factor;
    }
    return out;
}

RhoResult rho_dispatch(const CongruenceQuery& q, u64 budget) {
    RhoResult r;
    if (q.m == 0) return {1, "trivial"};
    // closed form
    if (!q.ideal && q.mu() == 0) {
        i64 nD = static_cast<i64>(q.field->degree()) * q.field->discriminant();
        if (nD % q.p != 0 && q.A != 0 && vp_big(q.A, q.p, q.m) < q.m) {
            r.count = rho_closed_form(*q.field, q.p, q.m, q.A);
            r.backend = "closed_form";
            return r;
        }
    }
    // Hensel from a cached lower level
    if (q.A != 0) {
        int k = vp_big(q.A, q.p, q.m);
        int vn = vp(q.field->degree(), q.p);
        for (int m0 = q.m - 1; m0 >= 1; --m0) {
            if (2 * (q.mu() + k + vn) >= m0) break;
            std::string key =
                histogram_key(*q.field, q.p, m0, q.ideal, std::min(q.mu(), m0), q.x0);
            CacheState& c = cache();
            std::shared_ptr<const std::vector<u64>> hist;
            {
                std::lock_guard<std::mutex> lk(c.mu);
                auto it = c.mem.find(key);
                if (it != c.mem.end()) hist = it->second;
            }
            if (hist) {
                u64 qm0 = static_cast<u64>(ipow(q.p, m0));
                BigInt a = q.A % qm0;
                if (a < 0) a += qm0;
                u64 v = (*hist)[static_cast<size_t>(static_cast<u64>(a))];
                for (int lev = m0; lev < q.m; ++lev)
                    v *= static_cast<u64>(ipow(q.p, q.field->degree() - 1));
                r.count = v;
                r.backend = "hensel(" + std::to_string(m0) + ")";
                return r;
            }
        }
    }
    r.count = rho_bruteforce(q, budget);
    r.backend = "bruteforce";
    return r;
}

u64 rho_crt(const FieldSpec& f, i64 q, const BigInt& A, i64 M,
            const std::vector<i64>& x0, u64 budget) {
    if (q < 1) throw PreconditionError("rho_crt: q >= 1 required");
    if (M < 1 || q % M != 0) throw PreconditionError("rho_crt: M | q required");
    u64 out = 1;
    i64 rest = q;
    for (i64 p = 2; p * p <= rest; ++p) {
        if (rest % p) continue;
        int m = 0;
        while (rest % p == 0) { rest /= p; ++m; }
        CongruenceQuery cq{&f, p, m, A, M, x0, nullptr};
        out *= rho_dispatch(cq, budget).count;
    }
    if (rest > 1) {
        CongruenceQuery cq{&f, rest, 1, A, M, x0, nullptr};
        out *= rho_dispatch(cq, budget).count;
    }
    return out;
}

u64 finite_field_norm_count(i64 p, int l, i64 a) {
    if (imod(a, p) == 0) return 1;
    return static_cast<u64>((ipow(p, l) - 1) / (p - 1));
}

u64 finite_field_norm_count_bruteforce(i64 p, int l, i64 a) {
    a = imod(a, p);
    PolyFp g = find_irreducible(p, l);
    // enumerate F_{p^l} as polynomials of degree < l; N(y) = y^((p^l-1)/(p-1))
    i64 count = 0;
    u64 total = static_cast<u64>(ipow(p, l));
    BigInt expo = (bpow(BigInt(p), static_cast<unsigned>(l)) - 1) / (p - 1);
    std::vector<i64> digits(static_cast<size_t>(l), 0);
    for (u64 idx = 0; idx < total; ++idx) {
        u64 r = idx;
        PolyFp y;
        for (int i = 0; i < l; ++i) {
            y.push_back(static_cast<i64>(r % static_cast<u64>(p)));
            r /= static_cast<u64>(p);
        }
        y = fp::trim(std::move(y));
        i64 nv;
        if (y.empty()) {
            nv = 0;
        } else {
            PolyFp pw = fp::powmod(y, expo, g, p);
            if (fp::degree(pw) > 0)
                throw InvariantViolation("finite field norm not in F_p");
            nv = pw.empty() ? 0 : pw[0];
        }
        if (nv == a) ++count;
    }
    return static_cast<u64>(count);
}

bool rho_ideal_equiv_check(const FieldSpec& f, const IdealBasis& a, i64 p,
                           int m, const BigInt& A, u64 budget) {
    if (a.norm % p == 0)
        throw PreconditionError("rho_ideal_equiv_check: p | N(a)");
    CongruenceQuery q1{&f, p, m, A, 1, {}, nullptr};
    CongruenceQuery q2{&f, p, m, A, 1, {}, &a};
    return rho_bruteforce(q1, budget) == rho_bruteforce(q2, budget);
}

LimitDensityReport limit_density_check(const FieldSpec& f, i64 p, int m,
                                       const BigInt& A, i64 x, u64 budget) {
    CongruenceQuery q{&f, p, m, A, 1, {}, nullptr};
    u64 r = rho_dispatch(q, budget).count;
    double lhs = static_cast<double>(r) /
                 std::pow(static_cast<double>(p), m * f.degree());
    auto table = f.r_K_table(x);
    i64 pm = ipow(p, m);
    i64 a0 = static_cast<i64>(imod(static_cast<i64>(A % pm), pm));
    long double s = 0;
    for (i64 l = (a0 == 0 ? pm : a0); l <= x; l += pm)
        s += table[static_cast<size_t>(l)];
    double rhs = static_cast<double>(
        s / (static_cast<long double>(f.class_number()) * f.kappa_residue() * x));
    return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// strata
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::pair<u64, i64>>> gradient_monomials(
    const std::vector<std::pair<u64, i64>>& monos, int s) {
    std::vector<std::vector<std::pair<u64, i64>>> grad(s);
    for (const auto& [exps, coeff] : monos)
        for (int var = 0; var < s; ++var) {
            int k = static_cast<int>((exps >> (8 * var)) & 0xff);
            if (k == 0) continue;
            grad[var].emplace_back(exps - (1ull << (8 * var)),
                                   coeff * static_cast<i64>(k));
        }
    return grad;
}

template <typename Visit>
void enumerate_points(int s, u64 q, u64 stride, const std::vector<u64>& base,
                      u64 budget, const Visit& visit) {
    u64 per_axis = std::max<u64>(q / std::min(stride, q), 1);
    double total = std::pow(static_cast<double>(per_axis), s);
    if (total > static_cast<double>(budget))
        throw BudgetExceeded("stratum enumeration exceeds budget");
    std::vector<u64> idx(static_cast<size_t>(s), 0);
    std::vector<u64> x(static_cast<size_t>(s));
    for (int i = 0; i < s; ++i) x[i] = base[i] % q;
    while (true) {
        visit(x);
        int ax = 0;
        while (ax < s) {
            if (++idx[ax] >= per_axis) {
                idx[ax] = 0;
                x[ax] = base[ax] % q;
                ++ax;
            } else {
                x[ax] = (base[ax] + stride * idx[ax]) % q;
                break;
            }
        }
        if (ax >= s) break;
    }
}

}  // namespace

u64 stratum_count(const StratumQuery& q, u64 budget) {
    if (q.m < 1) throw PreconditionError("stratum_count: m >= 1");
    u64 qq = static_cast<u64>(ipow(q.p, q.m));
    u64 stride = static_cast<u64>(ipow(q.p, std::min(q.l, q.m)));
    std::vector<u64> base(static_cast<size_t>(q.s), 0);
    for (int i = 0; i < q.s && i < static_cast<int>(q.a.size()); ++i)
        base[i] = static_cast<u64>(imod(q.a[i], static_cast<i64>(stride)));
    BigInt amod = q.A % qq;
    if (amod < 0) amod += qq;
    u64 target = static_cast<u64>(amod);
    auto grad = gradient_monomials(q.monomials, q.s);
    u64 count = 0;
    enumerate_points(q.s, qq, stride, base, budget, [&](const std::vector<u64>& x) {
        if (eval_monomials_mod(q.monomials, q.s, x, qq) != target) return;
        int v = q.m;  // v_p of the gradient vector, capped at m
        for (int var = 0; var < q.s; ++var) {
            u64 g = eval_monomials_mod(grad[var], q.s, x, qq);
            if (g != 0) v = std::min(v, vp(static_cast<i64>(g), q.p, q.m));
        }
        if (v == q.delta) ++count;
    });
    return count;
}

u64 gamma_grad_restricted(const StratumQuery& q, int grad_bound, u64 budget) {
    u64 qq = static_cast<u64>(ipow(q.p, q.m));
    u64 stride = static_cast<u64>(ipow(q.p, std::min(q.l, q.m)));
    std::vector<u64> base(static_cast<size_t>(q.s), 0);
    for (int i = 0; i < q.s && i < static_cast<int>(q.a.size()); ++i)
        base[i] = static_cast<u64>(imod(q.a[i], static_cast<i64>(stride)));
    BigInt amod = q.A % qq;
    if (amod < 0) amod += qq;
    u64 target = static_cast<u64>(amod);
    auto grad = gradient_monomials(q.monomials, q.s);
    u64 count = 0;
    enumerate_points(q.s, qq, stride, base, budget, [&](const std::vector<u64>& x) {
        if (eval_monomials_mod(q.monomials, q.s, x, qq) != target) return;
        int v = q.m;
        for (int var = 0; var < q.s; ++var) {
            u64 g = eval_monomials_mod(grad[var], q.s, x, qq);
            if (g != 0) v = std::min(v, vp(static_cast<i64>(g), q.p, q.m));
        }
        if (v < grad_bound) ++count;
    });
    return count;
}

}  // namespace nfc
