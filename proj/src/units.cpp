#include "nfc/units.hpp"

#include <algorithm>
#include <cmath>

#include "nfc/parallel.hpp"
#include "nfc/qmc.hpp"

namespace nfc {

namespace {

template <typename F>
std::vector<std::vector<F>> invert_matrix(std::vector<std::vector<F>> m) {
    int n = static_cast<int>(m.size());
    std::vector<std::vector<F>> inv(n, std::vector<F>(n, F(0)));
    for (int i = 0; i < n; ++i) inv[i][i] = F(1);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (abs(m[i][k]) > abs(m[piv][k])) piv = i;
        if (m[piv][k] == F(0)) throw InvariantViolation("singular log-lattice matrix");
        std::swap(m[piv], m[k]);
        std::swap(inv[piv], inv[k]);
        F d = m[k][k];
        for (int j = 0; j < n; ++j) { m[k][j] /= d; inv[k][j] /= d; }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            F f = m[i][k];
            if (f == F(0)) continue;
            for (int j = 0; j < n; ++j) {
                m[i][j] -= f * m[k][j];
                inv[i][j] -= f * inv[k][j];
            }
        }
    }
    return inv;
}

double abs_det(std::vector<std::vector<double>> m) {
    int n = static_cast<int>(m.size());
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(m[i][k]) > std::fabs(m[piv][k])) piv = i;
        if (m[piv][k] == 0.0) return 0.0;
        if (piv != k) { std::swap(m[piv], m[k]); det = -det; }
        det *= m[k][k];
        for (int i = k + 1; i < n; ++i) {
            double f = m[i][k] / m[k][k];
            for (int j = k; j < n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    return std::fabs(det);
}

}  // namespace

PlusUnitBasis derive_plus_units(const FieldSpec& f) {
    const UnitData& u = f.unit_data();
    int r = f.unit_rank();
    if (static_cast<int>(u.fundamental.size()) != r)
        throw InvalidUnits("expected r1+r2-1 fundamental units");
    PlusUnitBasis out;
    out.index_in_YK = 1;
    if (r == 0) return out;

    std::vector<std::vector<i64>> gens = u.fundamental;
    std::vector<int> norms(u.norms.begin(), u.norms.end());
    for (int j = 0; j < r; ++j) {
        BigInt nv = f.norm_form_eval(gens[j]);
        if (nv != 1 && nv != -1) throw InvalidUnits("generator norm not a unit");
        if (nv != norms[j]) throw InvalidUnits("declared unit norm mismatch");
    }

    bool any_minus = std::any_of(norms.begin(), norms.end(),
                                 [](int s) { return s < 0; });
    if (!any_minus) {
        out.generators = gens;
        return out;
    }
    // a root of unity of norm -1 exists iff N(-1) = (-1)^n = -1
    if (f.degree() % 2 == 1) {
        for (int j = 0; j < r; ++j)
            if (norms[j] < 0)
                for (i64& c : gens[j]) c = -c;
        out.generators = gens;
        out.index_in_YK = 1;
    } else {
        int first = -1;
        for (int j = 0; j < r; ++j)
            if (norms[j] < 0) { first = j; break; }
        std::vector<std::vector<i64>> plus;
        for (int j = 0; j < r; ++j) {
            if (j == first)
                plus.push_back(f.mult_element(gens[first], gens[first]));
            else if (norms[j] < 0)
                plus.push_back(f.mult_element(gens[first], gens[j]));
            else
                plus.push_back(gens[j]);
        }
        out.generators = std::move(plus);
        out.index_in_YK = 2;
    }
    for (const auto& g : out.generators)
        if (f.norm_form_eval(g) != 1)
            throw InvalidUnits("derived plus-unit has norm != +1");
    return out;
}

LogDomain LogDomain::build(const FieldSpec& f) {
    return build(f, derive_plus_units(f));
}

LogDomain LogDomain::build(const FieldSpec& f, const PlusUnitBasis& plus) {
    LogDomain d;
    d.field_ = &f;
    d.plus_ = plus;
    d.n_ = f.degree();
    d.r_ = f.unit_rank();
    d.places_ = f.r1() + f.r2();
    const Embeddings& emb = Embeddings::of(f);

    // columns: psi(delta_1)..psi(delta_r), weight vector
    std::vector<std::vector<double>> cols(d.places_,
                                          std::vector<double>(d.places_, 0.0));
    std::vector<std::vector<Mp2>> cols2(d.places_,
                                        std::vector<Mp2>(d.places_, Mp2(0)));
    std::vector<std::vector<double>> psis;
    for (int j = 0; j < d.r_; ++j) {
        auto psi2 = emb.log_embedding_mp2(plus.generators[j]);
        std::vector<double> psid(d.places_);
        for (int l = 0; l < d.places_; ++l) {
            psid[l] = static_cast<double>(psi2[l]);
            cols[l][j] = psid[l];
            cols2[l][j] = psi2[l];
        }
        psis.push_back(psid);
        // each psi(delta_j) lies in the trace-zero hyperplane
        double s = 0;
        for (double v : psid) s += v;
        if (std::fabs(s) > 1e-8)
            throw InvariantViolation("psi(delta) has nonzero coordinate sum");
    }
    for (int l = 0; l < d.places_; ++l) {
        double w = (l < f.r1()) ? 1.0 : 2.0;
        cols[l][d.r_] = w;
        cols2[l][d.r_] = Mp2(w);
    }
    d.solve_ = invert_matrix(cols);
    d.solve_mp2_ = invert_matrix(cols2);

    // per-place max of the log cell over the vertices of F_+ (xi = 0)
    d.cell_max_.assign(d.places_, 0.0);
    for (int mask = 0; mask < (1 << d.r_); ++mask) {
        for (int l = 0; l < d.places_; ++l) {
            double y = 0;
            for (int j = 0; j < d.r_; ++j)
                if (mask & (1 << j)) y += psis[j][l];
            d.cell_max_[l] = std::max(d.cell_max_[l], y);
        }
    }
    return d;
}

template <typename F>
std::vector<F> LogDomain::solve_coords(
    const std::vector<F>& y, const std::vector<std::vector<F>>& inv) const {
    std::vector<F> out(places_, F(0));
    for (int i = 0; i < places_; ++i) {
        F s(0);
        for (int j = 0; j < places_; ++j) s += inv[i][j] * y[j];
        out[i] = s;
    }
    return out;
}

LogDomain::Membership LogDomain::membership_real(
    const std::vector<double>& x) const {
    const Embeddings& emb = Embeddings::of(*field_);
    Membership m;
    auto y = emb.log_embedding(x);  // throws NearZeroEmbedding
    auto c = solve_coords(y, solve_);
    m.t.assign(c.begin(), c.begin() + r_);
    m.xi = c[r_];
    m.member = true;
    for (int j = 0; j < r_; ++j) {
        if (std::fabs(c[j]) < tol_log_ || std::fabs(c[j] - 1.0) < tol_log_)
            m.near_boundary = true;
        if (!(c[j] >= 0.0 && c[j] < 1.0)) m.member = false;
    }
    return m;
}

LogDomain::Membership LogDomain::membership_int(const std::vector<i64>& x) const {
    const Embeddings& emb = Embeddings::of(*field_);
    Membership m;
    {
        std::vector<double> xd(x.begin(), x.end());
        auto quick = membership_real(xd);
        if (!quick.near_boundary) return quick;
    }
    // doubled precision near a face, then the half-open convention decides
    auto y2 = emb.log_embedding_mp2(x);
    auto c2 = solve_coords(y2, solve_mp2_);
    m.near_boundary = true;
    m.member = true;
    m.t.resize(r_);
    for (int j = 0; j < r_; ++j) {
        // snap values that are zero to well below tol_log at this precision
        if (abs(c2[j]) < Mp2(1e-40)) c2[j] = Mp2(0);
        if (abs(c2[j] - 1) < Mp2(1e-40)) c2[j] = Mp2(1);
        m.t[j] = static_cast<double>(c2[j]);
        if (!(c2[j] >= 0 && c2[j] < 1)) m.member = false;
    }
    m.xi = static_cast<double>(c2[r_]);
    return m;
}

std::pair<std::vector<i64>, std::vector<i64>> LogDomain::reduce_to_domain(
    const std::vector<i64>& x) const {
    if (field_->norm_form_eval(x) == 0)
        throw PreconditionError("reduce_to_domain: zero norm");
    std::vector<i64> word(r_, 0);
    std::vector<i64> cur = x;
    for (int iter = 0; iter < 64; ++iter) {
        Membership m = membership_int(cur);
        bool ok = true;
        for (int j = 0; j < r_; ++j) {
            i64 shift = static_cast<i64>(std::floor(m.t[j]));
            // boundary-safe: re-floor values that are exactly on a face
            if (m.t[j] >= 0 && m.t[j] < 1) shift = 0;
            if (shift != 0) {
                ok = false;
                word[j] -= shift;
                const auto& g = plus_.generators[j];
                std::vector<i64> pw = (shift > 0) ? field_->unit_inverse(g) : g;
                i64 reps = shift > 0 ? shift : -shift;
                for (i64 k = 0; k < reps; ++k) cur = field_->mult_element(pw, cur);
            }
        }
        if (ok) return {word, cur};
    }
    throw InvariantViolation("reduce_to_domain did not converge");
}

std::vector<double> LogDomain::unit_box_halfwidths() const {
    const Embeddings& emb = Embeddings::of(*field_);
    int r1 = field_->r1();
    // |v^(l)| bound at level 1: exp of the cell max (halved on complex places
    // because the log coordinates carry weight 2)
    std::vector<double> vbound(places_);
    for (int l = 0; l < places_; ++l)
        vbound[l] = std::exp(l < r1 ? cell_max_[l] : cell_max_[l] / 2);
    // real n x n change of basis: x -> (real embeddings, Re/Im pairs)
    int n = n_;
    std::vector<std::vector<double>> A(n, std::vector<double>(n));
    std::vector<double> rowbound(n);
    int row = 0;
    for (int l = 0; l < r1; ++l, ++row) {
        for (int j = 0; j < n; ++j) A[row][j] = emb.omega_d[l][j].real();
        rowbound[row] = vbound[l];
    }
    for (int l = r1; l < places_; ++l) {
        for (int j = 0; j < n; ++j) A[row][j] = emb.omega_d[l][j].real();
        rowbound[row++] = vbound[l];
        for (int j = 0; j < n; ++j) A[row][j] = emb.omega_d[l][j].imag();
        rowbound[row++] = vbound[l];
    }
    auto inv = invert_matrix(A);
    std::vector<double> halfw(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int l = 0; l < n; ++l) s += std::fabs(inv[j][l]) * rowbound[l];
        halfw[j] = 1.01 * s;
    }
    return halfw;
}

double modified_regulator(const FieldSpec& f, const PlusUnitBasis& plus) {
    const Embeddings& emb = Embeddings::of(f);
    int places = f.r1() + f.r2();
    int r = f.unit_rank();
    if (static_cast<int>(plus.generators.size()) != r)
        throw InvalidUnits("modified_regulator: wrong number of generators");
    std::vector<std::vector<double>> m(places, std::vector<double>(places));
    for (int j = 0; j < r; ++j) {
        std::vector<double> xd(plus.generators[j].begin(), plus.generators[j].end());
        auto psi = emb.log_embedding(xd);
        for (int l = 0; l < places; ++l) m[j][l] = psi[l];
    }
    for (int l = 0; l < places; ++l)
        m[places - 1][l] = (l < f.r1()) ? 1.0 : 2.0;
    return abs_det(std::move(m));
}

RegulatorAudit modified_regulator_audit(const FieldSpec& f) {
    RegulatorAudit a;
    PlusUnitBasis plus = derive_plus_units(f);
    a.modified = modified_regulator(f, plus);
    a.classical_RK = f.classical_regulator();
    a.index_in_YK = plus.index_in_YK;
    a.degree = f.degree();
    return a;
}

double kappa_closed_form(const FieldSpec& f, int eps) {
    PlusUnitBasis plus = derive_plus_units(f);
    double rmod = modified_regulator(f, plus);
    double signs;
    if (f.r1() == 0)
        signs = (eps > 0) ? 1.0 : 0.0;
    else
        signs = std::pow(2.0, f.r1() - 1);
    return signs * std::pow(2 * M_PI, f.r2()) * (rmod / f.degree()) /
           std::sqrt(std::fabs(static_cast<double>(f.discriminant())));
}

// ---------------------------------------------------------------------------
// cones
// ---------------------------------------------------------------------------

u64 ConeSpec::hash() const {
    u64 h = fnv1a("cone");
    int k = static_cast<int>(kind);
    h = fnv1a(&k, sizeof k, h);
    h = fnv1a(&sign_filter, sizeof sign_filter, h);
    h = fnv1a(&mu_sector, sizeof mu_sector, h);
    for (double c : center) h = fnv1a(&c, sizeof c, h);
    h = fnv1a(&radius, sizeof radius, h);
    return h;
}

namespace {

// exact-enough sector test in the first place; quotient by mu_K^(+)
template <typename VC>
bool sector_test(const FieldSpec& f, int mu_plus, double re, double im) {
    if (mu_plus <= 1) return true;
    if (f.r1() > 0) return re > 0;  // mu^+ = {+-1}
    // r1 = 0: argument in [0, 2 pi / mu_plus)
    double ang = std::atan2(im, re);
    if (ang < 0) ang += 2 * M_PI;
    double width = 2 * M_PI / mu_plus;
    return ang >= 0 && ang < width;
}

}  // namespace

bool cone_member_real(const FieldSpec& f, const ConeSpec& cone,
                      const std::vector<double>& x, double norm_value) {
    if (cone.sign_filter != 0) {
        if (cone.sign_filter > 0 && !(norm_value > 0)) return false;
        if (cone.sign_filter < 0 && !(norm_value < 0)) return false;
    }
    const Embeddings& emb = Embeddings::of(f);
    if (cone.kind == ConeSpec::Kind::FullDomain) {
        if (!cone.mu_sector) return true;
        std::complex<double> v(0, 0);
        int l0 = (f.r1() > 0) ? 0 : f.r1();  // first real, else first complex
        for (int j = 0; j < f.degree(); ++j) v += x[j] * emb.omega_d[l0][j];
        return sector_test<void>(f, f.unit_data().mu_plus_order, v.real(), v.imag());
    }
    // DirectionBall
    double nv = std::fabs(norm_value);
    if (!(nv > 0)) return false;
    double scale = std::pow(nv, 1.0 / f.degree());
    const std::vector<double>& c = cone.center;
    double acc = 0;  // norm of the centre via the expanded polynomial
    for (const auto& [exps, coeff] : f.norm_monomials()) {
        double term = static_cast<double>(coeff);
        u64 e = exps;
        for (int var = 0; var < f.degree(); ++var) {
            int k = static_cast<int>((e >> (8 * var)) & 0xff);
            for (int rep = 0; rep < k; ++rep) term *= c[var];
        }
        acc += term;
    }
    double cn = std::pow(std::fabs(acc), 1.0 / f.degree());
    if (!(cn > 0)) throw PreconditionError("DirectionBall centre has zero norm");
    double dist2 = 0;
    for (int j = 0; j < f.degree(); ++j) {
        double d = x[j] / scale - c[j] / cn;
        dist2 += d * d;
    }
    return dist2 < cone.radius * cone.radius;
}

bool cone_member_int(const FieldSpec& f, const ConeSpec& cone,
                     const std::vector<i64>& x, const BigInt& norm_value) {
    std::vector<double> xd(x.begin(), x.end());
    return cone_member_real(f, cone, xd, static_cast<double>(norm_value));
}

// ---------------------------------------------------------------------------
// volume estimation
// ---------------------------------------------------------------------------

namespace {

struct RegionTester {
    const LogDomain& dom;
    const ConeSpec& cone;
    int eps;
    const FieldSpec& f;
    const std::vector<std::pair<u64, i64>>& monos;
    int n;

    double norm_of(const std::vector<double>& x) const {
        double acc = 0;
        for (const auto& [exps, coeff] : monos) {
            double term = static_cast<double>(coeff);
            u64 e = exps;
            for (int var = 0; var < n; ++var) {
                int k = static_cast<int>((e >> (8 * var)) & 0xff);
                for (int rep = 0; rep < k; ++rep) term *= x[var];
            }
            acc += term;
        }
        return acc;
    }

    bool operator()(const std::vector<double>& x) const {
        double nv = norm_of(x);
        if (eps > 0 ? !(nv > 0 && nv <= 1) : !(nv < 0 && nv >= -1)) return false;
        if (!cone_member_real(f, cone, x, nv)) return false;
        try {
            return dom.membership_real(x).member;
        } catch (const NearZeroEmbedding&) {
            return false;
        }
    }
};

}  // namespace

KappaEstimate kappa_eps(const LogDomain& dom, const ConeSpec& cone, int eps,
                        const std::string& method, u64 budget, u64 seed,
                        std::optional<double> tol) {
    const FieldSpec& f = dom.field();
    int n = f.degree();
    auto hw = dom.unit_box_halfwidths();
    double box_vol = 1.0;
    for (double h : hw) box_vol *= 2 * h;
    RegionTester tester{dom, cone, eps, f, f.norm_monomials(), n};

    KappaEstimate out;
    out.method = method;
    out.budget = budget;

    if (method == "lattice") {
        // midpoint grid at scale S per axis, S^n <= budget
        u64 S = static_cast<u64>(std::floor(std::pow(static_cast<double>(budget),
                                                     1.0 / n)));
        if (S < 8) S = 8;
        u64 total_cells = 1;
        for (int i = 0; i < n; ++i) total_cells *= S;
        std::vector<u64> hits_by_chunk;
        std::vector<u64> toggles_by_chunk;
        u64 outer = total_cells / S;  // all but the innermost axis
        int nthreads = thread_count();
        std::vector<u64> hits(nthreads, 0), togg(nthreads, 0);
        parallel_chunks(0, static_cast<long long>(outer),
                        [&](int tid, long long lo, long long hi) {
            std::vector<double> x(n);
            u64 h = 0, tg = 0;
            for (long long idx = lo; idx < hi; ++idx) {
                u64 rest = static_cast<u64>(idx);
                for (int ax = n - 1; ax >= 1; --ax) {
                    u64 k = rest % S;
                    rest /= S;
                    x[ax] = -hw[ax] + (2 * hw[ax]) * ((k + 0.5) / S);
                }
                bool prev = false;
                for (u64 k0 = 0; k0 < S; ++k0) {
                    x[0] = -hw[0] + (2 * hw[0]) * ((k0 + 0.5) / S);
                    bool in = tester(x);
                    if (in) ++h;
                    if (in != prev) ++tg;
                    prev = in;
                }
                if (prev) ++tg;
            }
            hits[tid] += h;
            togg[tid] += tg;
        });
        u64 H = 0, T = 0;
        for (int t = 0; t < nthreads; ++t) { H += hits[t]; T += togg[t]; }
        out.value = box_vol * static_cast<double>(H) / static_cast<double>(total_cells);
        out.error_estimate =
            box_vol * static_cast<double>(T) / static_cast<double>(total_cells);
    } else if (method == "qmc") {
        u64 N = budget;
        const int blocks = 32;
        HaltonSampler halton(n, seed);
        int nthreads = thread_count();
        std::vector<std::vector<u64>> block_hits(nthreads,
                                                 std::vector<u64>(blocks, 0));
        parallel_chunks(0, static_cast<long long>(N),
                        [&](int tid, long long lo, long long hi) {
            std::vector<double> pt(n), x(n);
            for (long long i = lo; i < hi; ++i) {
                halton.point(static_cast<u64>(i), pt.data());
                for (int j = 0; j < n; ++j) x[j] = -hw[j] + 2 * hw[j] * pt[j];
                if (tester(x))
                    ++block_hits[tid][static_cast<u64>(i) % blocks];
            }
        });
        std::vector<double> means(blocks, 0.0);
        u64 H = 0;
        for (int b = 0; b < blocks; ++b) {
            u64 s = 0;
            for (int t = 0; t < nthreads; ++t) s += block_hits[t][b];
            H += s;
            means[b] = static_cast<double>(s) * blocks / static_cast<double>(N);
        }
        double mean = static_cast<double>(H) / static_cast<double>(N);
        double var = 0;
        for (double m : means) var += (m - mean) * (m - mean);
        var /= blocks * (blocks - 1);
        out.value = box_vol * mean;
        out.error_estimate = box_vol * 3 * std::sqrt(var);
    } else {
        throw PreconditionError("kappa_eps: unknown method " + method);
    }
    if (tol && out.error_estimate > *tol)
        throw BudgetExceeded("kappa_eps error estimate above tolerance at budget");
    return out;
}

std::pair<i64, i64> pell_fundamental(i64 d) {
    i64 a0 = static_cast<i64>(std::sqrt(static_cast<double>(d)));
    while ((a0 + 1) * (a0 + 1) <= d) ++a0;
    while (a0 * a0 > d) --a0;
    if (a0 * a0 == d) throw PreconditionError("pell: d is a square");
    // continued fraction of sqrt(d); convergents until |p^2 - d q^2| = 1
    i64 m = 0, den = 1, a = a0;
    i64 p_prev = 1, p = a0, q_prev = 0, q = 1;
    for (int iter = 0; iter < 10000; ++iter) {
        i128 val = static_cast<i128>(p) * p - static_cast<i128>(d) * q * q;
        if (val == 1 || val == -1) return {p, q};
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
        i64 p_next = a * p + p_prev, q_next = a * q + q_prev;
        p_prev = p; p = p_next;
        q_prev = q; q = q_next;
    }
    throw InvariantViolation("pell: no fundamental solution found");
}

}  // namespace nfc
