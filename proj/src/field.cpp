#include "nfc/field.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nfc/embeddings.hpp"
#include "nfc/polyfactor.hpp"

namespace nfc {

using json = nlohmann::ordered_json;

std::vector<i64> primes_up_to(i64 x) {
    std::vector<i64> out;
    if (x < 2) return out;
    std::vector<bool> comp(static_cast<size_t>(x) + 1, false);
    for (i64 i = 2; i <= x; ++i) {
        if (!comp[static_cast<size_t>(i)]) {
            out.push_back(i);
            for (i64 j = i * i; j <= x; j += i) comp[static_cast<size_t>(j)] = true;
        }
    }
    return out;
}

BigInt det_int(std::vector<std::vector<BigInt>> m) {
    int n = static_cast<int>(m.size());
    BigInt prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m[k][k] == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (m[i][k] != 0) { piv = i; break; }
            if (piv < 0) return 0;
            std::swap(m[k], m[piv]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

namespace {

Rat rat_from_json(const json& v) {
    if (v.is_array()) {
        if (v.size() != 2) throw PreconditionError("rational must be [num, den]");
        return Rat(BigInt(v[0].get<i64>()), BigInt(v[1].get<i64>()));
    }
    return Rat(v.get<i64>());
}

// product of linear forms, used to expand the norm determinant symbolically
using PolyMap = std::map<u64, BigInt>;

void accumulate_term(PolyMap& acc, u64 exps, const BigInt& coeff) {
    if (coeff == 0) return;
    auto it = acc.find(exps);
    if (it == acc.end())
        acc.emplace(exps, coeff);
    else {
        it->second += coeff;
        if (it->second == 0) acc.erase(it);
    }
}

}  // namespace

FieldSpec FieldSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open field file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

FieldSpec FieldSpec::from_json_text(const std::string& text) {
    json j = json::parse(text);
    FieldSpec f;
    f.name_ = j.value("name", std::string("unnamed"));
    f.n_ = j.at("degree").get<int>();
    if (f.n_ < 2) throw PreconditionError("degree must be >= 2");
    f.min_poly_ = j.at("min_poly").get<std::vector<i64>>();
    if (static_cast<int>(f.min_poly_.size()) != f.n_ + 1 || f.min_poly_.back() != 1)
        throw PreconditionError("min_poly must be monic of degree n");
    for (const auto& row : j.at("basis")) {
        std::vector<Rat> b;
        for (const auto& c : row) b.push_back(rat_from_json(c));
        if (static_cast<int>(b.size()) != f.n_)
            throw PreconditionError("basis row length mismatch");
        f.basis_.push_back(std::move(b));
    }
    if (static_cast<int>(f.basis_.size()) != f.n_)
        throw PreconditionError("basis must have n rows");

    f.tensor_.assign(static_cast<size_t>(f.n_) * f.n_ * f.n_, 0);
    const auto& mt = j.at("mult_tensor");
    for (int i = 0; i < f.n_; ++i)
        for (int jj = 0; jj < f.n_; ++jj)
            for (int l = 0; l < f.n_; ++l)
                f.tensor_[(i * f.n_ + jj) * f.n_ + l] = mt[i][jj][l].get<i64>();

    f.disc_ = j.at("discriminant").get<i64>();
    if (f.disc_ == 0) throw PreconditionError("discriminant must be nonzero");
    f.r1_ = j.at("signature")[0].get<int>();
    f.r2_ = j.at("signature")[1].get<int>();
    f.h_ = j.at("class_number").get<i64>();
    if (f.h_ < 1) throw PreconditionError("class_number must be positive");
    f.index_primes_ = j.value("index_primes", std::vector<i64>{});
    if (j.contains("splitting_overrides")) {
        for (auto& [key, val] : j.at("splitting_overrides").items()) {
            SplittingType st;
            for (const auto& pr : val)
                st.ef.emplace_back(pr[0].get<int>(), pr[1].get<int>());
            f.overrides_[std::stoll(key)] = st;
        }
    }
    if (j.contains("dirichlet_density"))
        f.density_ = rat_from_json(j.at("dirichlet_density"));
    if (j.contains("units")) {
        const auto& u = j.at("units");
        f.units_.mu_order = u.value("mu_order", 2);
        f.units_.mu_plus_order = u.value("mu_plus_order", f.units_.mu_order);
        if (u.contains("fundamental"))
            for (const auto& v : u.at("fundamental"))
                f.units_.fundamental.push_back(v.get<std::vector<i64>>());
        if (u.contains("norms")) f.units_.norms = u.at("norms").get<std::vector<int>>();
    }

    f.json_text_ = j.dump();
    f.hash_ = fnv1a(f.json_text_);
    f.build_norm_polynomial();
    f.validate();
    return f;
}

void FieldSpec::build_norm_polynomial() {
    // det of the multiplication-by-(x.w) matrix, entries are linear in x:
    // M[l][j] = sum_i c_{ij}^{(l)} x_i. Expanded over all permutations.
    int n = n_;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    PolyMap acc;
    auto entry_coeff = [&](int l, int jj, int i) { return mult_tensor(i, jj, l); };
    do {
        int sign = 1;
        {
            std::vector<bool> seen(n, false);
            for (int i = 0; i < n; ++i) {
                if (seen[i]) continue;
                int len = 0;
                for (int k = i; !seen[k]; k = perm[k]) { seen[k] = true; ++len; }
                if (len % 2 == 0) sign = -sign;
            }
        }
        // expand prod_l ( sum_i c_{i,perm[l]}^{(l)} x_i )
        PolyMap partial;
        partial.emplace(0ull, BigInt(sign));
        for (int l = 0; l < n; ++l) {
            PolyMap next;
            for (const auto& [exps, coeff] : partial) {
                for (int i = 0; i < n; ++i) {
                    i64 c = entry_coeff(l, perm[l], i);
                    if (!c) continue;
                    accumulate_term(next, exps + (1ull << (8 * i)), coeff * c);
                }
            }
            partial = std::move(next);
        }
        for (const auto& [exps, coeff] : partial) accumulate_term(acc, exps, coeff);
    } while (std::next_permutation(perm.begin(), perm.end()));

    norm_monomials_.clear();
    for (const auto& [exps, coeff] : acc) {
        if (coeff == 0) continue;
        if (coeff < INT64_MIN || coeff > INT64_MAX)
            throw InvariantViolation("norm form coefficient overflows i64");
        norm_monomials_.emplace_back(exps, static_cast<i64>(coeff));
    }
}

void FieldSpec::validate() const {
    int n = n_;
    // symmetry
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l)
                if (mult_tensor(i, j, l) != mult_tensor(j, i, l))
                    throw PreconditionError("mult_tensor not symmetric");
    // omega_1 must be the identity
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            if (mult_tensor(0, j, l) != (j == l ? 1 : 0))
                throw PreconditionError("omega_1 must be 1");
    // associativity on all basis triples, exact
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::vector<BigInt> ei(n, 0), ej(n, 0), ek(n, 0);
                ei[i] = 1;
                ej[j] = 1;
                ek[k] = 1;
                auto lhs = mult_element_big(mult_element_big(ei, ej), ek);
                auto rhs = mult_element_big(ei, mult_element_big(ej, ek));
                if (lhs != rhs) throw PreconditionError("mult_tensor not associative");
            }
    // trace form determinant = discriminant
    std::vector<BigInt> traces(n);
    for (int i = 0; i < n; ++i) {
        std::vector<i64> ei(n, 0);
        ei[i] = 1;
        traces[i] = trace_of(ei);
    }
    std::vector<std::vector<BigInt>> gram(n, std::vector<BigInt>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            BigInt t = 0;
            for (int l = 0; l < n; ++l) t += BigInt(mult_tensor(i, j, l)) * traces[l];
            gram[i][j] = t;
        }
    if (det_int(gram) != BigInt(disc_))
        throw PreconditionError("det(trace form) != discriminant");
    if (r1_ + 2 * r2_ != n) throw PreconditionError("r1 + 2 r2 != n");
    // root isolation counts real roots; throws on mismatch
    Embeddings::of(*this);
    // unit norms
    if (!units_.fundamental.empty() &&
        units_.fundamental.size() != units_.norms.size())
        throw PreconditionError("unit norms list must match generators");
    for (size_t i = 0; i < units_.fundamental.size(); ++i) {
        BigInt nv = norm_form_eval(units_.fundamental[i]);
        if (nv != units_.norms[i] || (nv != 1 && nv != -1))
            throw InvalidUnits("fundamental unit norm mismatch");
    }
}

BigInt FieldSpec::norm_form_eval(const std::vector<i64>& x) const {
    std::vector<BigInt> xb(x.begin(), x.end());
    return norm_form_eval_big(xb);
}

BigInt FieldSpec::norm_form_eval_big(const std::vector<BigInt>& x) const {
    int n = n_;
    std::vector<std::vector<BigInt>> m(n, std::vector<BigInt>(n, 0));
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) {
            BigInt s = 0;
            for (int i = 0; i < n; ++i) {
                i64 c = mult_tensor(i, j, l);
                if (c) s += x[i] * c;
            }
            m[l][j] = std::move(s);
        }
    return det_int(std::move(m));
}

std::vector<i64> FieldSpec::mult_element(const std::vector<i64>& x,
                                         const std::vector<i64>& y) const {
    std::vector<BigInt> xb(x.begin(), x.end()), yb(y.begin(), y.end());
    auto zb = mult_element_big(xb, yb);
    std::vector<i64> z(n_);
    for (int l = 0; l < n_; ++l) {
        if (zb[l] < INT64_MIN || zb[l] > INT64_MAX)
            throw std::overflow_error("mult_element overflow");
        z[l] = static_cast<i64>(zb[l]);
    }
    return z;
}

std::vector<BigInt> FieldSpec::mult_element_big(const std::vector<BigInt>& x,
                                                const std::vector<BigInt>& y) const {
    int n = n_;
    std::vector<BigInt> z(n, 0);
    for (int i = 0; i < n; ++i) {
        if (x[i] == 0) continue;
        for (int j = 0; j < n; ++j) {
            if (y[j] == 0) continue;
            BigInt prod = x[i] * y[j];
            for (int l = 0; l < n; ++l) {
                i64 c = mult_tensor(i, j, l);
                if (c) z[l] += prod * c;
            }
        }
    }
    return z;
}

std::vector<i64> FieldSpec::unit_inverse(const std::vector<i64>& u) const {
    int n = n_;
    BigInt nu = norm_form_eval(u);
    if (nu != 1 && nu != -1) throw InvalidUnits("unit_inverse: |norm| != 1");
    // multiplication-by-u matrix M, solve M z = e1 by Cramer (det = +-1)
    std::vector<std::vector<BigInt>> m(n, std::vector<BigInt>(n, 0));
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) {
            BigInt s = 0;
            for (int i = 0; i < n; ++i) {
                i64 c = mult_tensor(i, j, l);
                if (c) s += BigInt(u[i]) * c;
            }
            m[l][j] = std::move(s);
        }
    BigInt d = det_int(m);
    std::vector<i64> z(n);
    for (int j = 0; j < n; ++j) {
        auto mj = m;
        for (int l = 0; l < n; ++l) mj[l][j] = (l == 0) ? 1 : 0;
        BigInt zj = det_int(std::move(mj)) / d;
        z[j] = static_cast<i64>(zj);
    }
    return z;
}

BigInt FieldSpec::trace_of(const std::vector<i64>& x) const {
    BigInt t = 0;
    for (int j = 0; j < n_; ++j)
        for (int i = 0; i < n_; ++i) t += BigInt(x[i]) * mult_tensor(i, j, j);
    return t;
}

std::vector<std::pair<u64, i64>> FieldSpec::norm_monomials_for_ideal(
    const IdealBasis& a) const {
    // N(x; a) = N_omega(y) with y_l = sum_k x_k C_{kl}: substitute into the
    // expanded norm polynomial.
    int n = n_;
    PolyMap acc;
    for (const auto& [exps, coeff] : norm_monomials_) {
        PolyMap partial;
        partial.emplace(0ull, BigInt(coeff));
        for (int var = 0; var < n; ++var) {
            int e = static_cast<int>((exps >> (8 * var)) & 0xff);
            for (int rep = 0; rep < e; ++rep) {
                PolyMap next;
                for (const auto& [pe, pc] : partial)
                    for (int k = 0; k < n; ++k) {
                        i64 c = a.rows[k][var];
                        if (c) accumulate_term(next, pe + (1ull << (8 * k)), pc * c);
                    }
                partial = std::move(next);
            }
        }
        for (const auto& [pe, pc] : partial) accumulate_term(acc, pe, pc);
    }
    std::vector<std::pair<u64, i64>> out;
    for (const auto& [e, c] : acc)
        if (c != 0) out.emplace_back(e, static_cast<i64>(c));
    return out;
}

IdealBasis FieldSpec::principal_ideal_basis(const std::vector<i64>& alpha) const {
    IdealBasis b;
    b.rows.resize(n_);
    std::vector<std::vector<BigInt>> m(n_, std::vector<BigInt>(n_));
    for (int i = 0; i < n_; ++i) {
        std::vector<i64> ei(n_, 0);
        ei[i] = 1;
        b.rows[i] = mult_element(alpha, ei);
        for (int l = 0; l < n_; ++l) m[i][l] = b.rows[i][l];
    }
    b.norm = abs(det_int(std::move(m)));
    return b;
}

SplittingType FieldSpec::splitting_type(i64 p) const {
    {
        std::lock_guard<std::mutex> lk(cache_mu_);
        auto it = split_cache_.find(p);
        if (it != split_cache_.end()) {
            ++cache_hits_;
            return it->second;
        }
        ++cache_misses_;
    }
    SplittingType st;
    auto ov = overrides_.find(p);
    if (ov != overrides_.end()) {
        st = ov->second;
    } else {
        if (std::find(index_primes_.begin(), index_primes_.end(), p) !=
            index_primes_.end())
            throw MissingSplittingData("no splitting override for index prime " +
                                       std::to_string(p));
        for (const auto& fac : factor_mod_p(min_poly_, p))
            st.ef.emplace_back(fac.multiplicity, fp::degree(fac.poly));
        std::sort(st.ef.begin(), st.ef.end());
    }
    if (st.sum_ef() != n_)
        throw InvariantViolation("splitting type violates sum e_i f_i = n");
    std::lock_guard<std::mutex> lk(cache_mu_);
    split_cache_[p] = st;
    return st;
}

PrimeClass FieldSpec::prime_class(i64 p) const {
    if (disc_ % p == 0) return PrimeClass::P0;
    return splitting_type(p).has_degree_one() ? PrimeClass::P1 : PrimeClass::P2;
}

i64 FieldSpec::r_K_prime_power(i64 p, int k) const {
    if (k == 0) return 1;
    SplittingType st = splitting_type(p);
    // count (m_1..m_r) >= 0 with sum f_i m_i = k
    std::vector<i64> ways(static_cast<size_t>(k) + 1, 0);
    ways[0] = 1;
    for (const auto& [e, f] : st.ef)
        for (int v = f; v <= k; ++v) ways[v] += ways[v - f];
    return ways[k];
}

i64 FieldSpec::r_K(i64 m) const {
    if (m <= 0) throw PreconditionError("r_K needs m >= 1");
    i64 out = 1;
    for (i64 p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        int k = 0;
        while (m % p == 0) { m /= p; ++k; }
        out *= r_K_prime_power(p, k);
        if (!out) return 0;
    }
    if (m > 1) out *= r_K_prime_power(m, 1);
    return out;
}

std::vector<i64> FieldSpec::r_K_table(i64 x) const {
    // smallest-prime-factor sieve, then multiplicative assembly
    size_t N = static_cast<size_t>(x) + 1;
    std::vector<i64> spf(N, 0);
    for (i64 i = 2; i <= x; ++i) {
        if (spf[static_cast<size_t>(i)] == 0)
            for (i64 j = i; j <= x; j += i)
                if (spf[static_cast<size_t>(j)] == 0) spf[static_cast<size_t>(j)] = i;
    }
    std::vector<i64> table(N, 0);
    if (x >= 1) table[1] = 1;
    for (i64 m = 2; m <= x; ++m) {
        i64 p = spf[static_cast<size_t>(m)];
        i64 q = m, k = 0;
        while (q % p == 0) { q /= p; ++k; }
        table[static_cast<size_t>(m)] =
            table[static_cast<size_t>(q)] * r_K_prime_power(p, static_cast<int>(k));
    }
    return table;
}

double FieldSpec::classical_regulator() const {
    int r = unit_rank();
    if (r == 0) return 1.0;
    if (static_cast<int>(units_.fundamental.size()) != r)
        throw InvalidUnits("need exactly r1+r2-1 fundamental units");
    const Embeddings& emb = Embeddings::of(*this);
    // r x r matrix of the first r coordinates of psi(eta_j)
    std::vector<std::vector<double>> m(r, std::vector<double>(r));
    for (int j = 0; j < r; ++j) {
        std::vector<double> xd(units_.fundamental[j].begin(),
                               units_.fundamental[j].end());
        auto psi = emb.log_embedding(xd);
        for (int l = 0; l < r; ++l) m[j][l] = psi[l];
    }
    // small dense determinant
    double det = 1.0;
    for (int k = 0; k < r; ++k) {
        int piv = k;
        for (int i = k + 1; i < r; ++i)
            if (std::fabs(m[i][k]) > std::fabs(m[piv][k])) piv = i;
        if (piv != k) { std::swap(m[piv], m[k]); det = -det; }
        if (m[k][k] == 0) return 0.0;
        det *= m[k][k];
        for (int i = k + 1; i < r; ++i) {
            double f = m[i][k] / m[k][k];
            for (int jj = k; jj < r; ++jj) m[i][jj] -= f * m[k][jj];
        }
    }
    return std::fabs(det);
}

double FieldSpec::kappa_residue() const {
    double rk = classical_regulator();
    return std::pow(2.0, r1_) * std::pow(2 * M_PI, r2_) * rk /
           (units_.mu_order * std::sqrt(std::fabs(static_cast<double>(disc_))));
}

std::pair<double, double> FieldSpec::zeta_partial_sum(i64 x) const {
    auto table = r_K_table(x);
    long double s = 0;
    for (i64 m = 1; m <= x; ++m) s += table[static_cast<size_t>(m)];
    double predicted = h_ * kappa_residue() * static_cast<double>(x);
    return {static_cast<double>(s), predicted};
}

FieldSpec::EulerP2Result FieldSpec::euler_product_P2(i64 T) const {
    double v = 1.0;
    for (i64 p : primes_up_to(T))
        if (prime_class(p) == PrimeClass::P2) v /= (1.0 - 1.0 / static_cast<double>(p));
    double delta = density_ ? static_cast<double>(*density_) : estimate_dirichlet_density(T);
    double denom = std::pow(std::log(static_cast<double>(T)), 1.0 - delta);
    return {v, v / denom};
}

double FieldSpec::estimate_dirichlet_density(i64 X) const {
    double num = 0, den = 0;
    for (i64 p : primes_up_to(X)) {
        double invp = 1.0 / static_cast<double>(p);
        den += invp;
        if (prime_class(p) == PrimeClass::P1) num += invp;
    }
    if (den == 0) return 0;
    return num / den;
}

void FieldSpec::load_splitting_cache(const std::string& cache_dir) const {
    namespace fs = std::filesystem;
    fs::path p = fs::path(cache_dir) / ("splitting_" + hex64(hash_) + ".json");
    std::ifstream in(p);
    if (!in) return;
    json j;
    in >> j;
    std::lock_guard<std::mutex> lk(cache_mu_);
    for (auto& [key, val] : j.items()) {
        SplittingType st;
        for (const auto& pr : val) st.ef.emplace_back(pr[0].get<int>(), pr[1].get<int>());
        split_cache_[std::stoll(key)] = st;
    }
}

void FieldSpec::save_splitting_cache(const std::string& cache_dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    json j = json::object();
    {
        std::lock_guard<std::mutex> lk(cache_mu_);
        for (const auto& [p, st] : split_cache_) {
            json arr = json::array();
            for (auto& [e, f] : st.ef) arr.push_back({e, f});
            j[std::to_string(p)] = arr;
        }
    }
    fs::path path = fs::path(cache_dir) / ("splitting_" + hex64(hash_) + ".json");
    std::ofstream out(path);
    out << j.dump();
}

std::pair<u64, u64> FieldSpec::splitting_cache_stats() const {
    std::lock_guard<std::mutex> lk(cache_mu_);
    return {cache_hits_, cache_misses_};
}

}  // namespace nfc
