#include "nfc/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace nfc {

namespace {

// Durand-Kerner on the monic polynomial with the given integer coefficients.
std::vector<std::complex<double>> all_roots_dk(const std::vector<i64>& poly) {
    int n = static_cast<int>(poly.size()) - 1;
    double lead = static_cast<double>(poly[n]);
    std::vector<std::complex<double>> c(n);
    for (int i = 0; i < n; ++i) c[i] = poly[i] / lead;
    auto eval = [&](std::complex<double> z) {
        std::complex<double> v(1.0, 0.0);
        for (int i = n - 1; i >= 0; --i) v = v * z + c[i];
        return v;
    };
    std::vector<std::complex<double>> r(n);
    std::complex<double> seed(0.4, 0.9);
    r[0] = std::complex<double>(1.0, 0.0);
    for (int i = 1; i < n; ++i) r[i] = r[i - 1] * seed;
    for (int iter = 0; iter < 500; ++iter) {
        double delta = 0;
        for (int i = 0; i < n; ++i) {
            std::complex<double> num = eval(r[i]), den(1.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != i) den *= (r[i] - r[j]);
            std::complex<double> d = num / den;
            r[i] -= d;
            delta = std::max(delta, std::abs(d));
        }
        if (delta < 1e-14) break;
    }
    return r;
}

template <typename F>
CF<F> poly_eval(const std::vector<i64>& poly, const CF<F>& z) {
    CF<F> v(F(poly.back()), F(0));
    for (int i = static_cast<int>(poly.size()) - 2; i >= 0; --i)
        v = v * z + CF<F>(F(poly[i]), F(0));
    return v;
}

template <typename F>
CF<F> poly_eval_deriv(const std::vector<i64>& poly, const CF<F>& z) {
    int n = static_cast<int>(poly.size()) - 1;
    CF<F> v(F(i64(n) * poly[n]), F(0));
    for (int i = n - 1; i >= 1; --i)
        v = v * z + CF<F>(F(i64(i) * poly[i]), F(0));
    return v;
}

template <typename F>
CF<F> newton_polish(const std::vector<i64>& poly, CF<F> z, int iters) {
    for (int i = 0; i < iters; ++i) {
        CF<F> f = poly_eval(poly, z);
        CF<F> df = poly_eval_deriv(poly, z);
        z = z - f / df;
    }
    return z;
}

template <typename F>
std::vector<F> log_embed_impl(int r1, int r2,
                              const std::vector<std::vector<CF<F>>>& omega,
                              const std::vector<i64>& x) {
    int n = static_cast<int>(x.size());
    std::vector<F> out(r1 + r2);
    for (int l = 0; l < r1 + r2; ++l) {
        CF<F> v(F(0), F(0));
        for (int j = 0; j < n; ++j)
            v = v + CF<F>(F(x[j]), F(0)) * omega[l][j];
        F a2 = v.abs2();
        if (a2 == 0) throw NearZeroEmbedding("zero embedding");
        // log|v| = log(a2)/2; complex places carry weight 2
        F lg = log(a2) / 2;
        out[l] = (l < r1) ? lg : 2 * lg;
    }
    return out;
}

}  // namespace

const Embeddings& Embeddings::of(const FieldSpec& f) {
    static std::mutex mu;
    static std::map<u64, std::unique_ptr<Embeddings>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(f.hash());
    if (it != cache.end()) return *it->second;

    auto e = std::make_unique<Embeddings>();
    e->n = f.degree();
    e->r1 = f.r1();
    e->r2 = f.r2();

    auto approx = all_roots_dk(f.min_poly());
    // polish at high precision and classify real/complex
    std::vector<CF<Mp2>> polished;
    for (auto& z : approx)
        polished.push_back(newton_polish<Mp2>(f.min_poly(),
                                              CF<Mp2>(Mp2(z.real()), Mp2(z.imag())), 80));
    std::vector<CF<Mp2>> reals, complexes;
    for (auto& z : polished) {
        Mp2 scale = Mp2(1) + abs(z.re);
        if (abs(z.im) < scale * Mp2(1e-40)) {
            CF<Mp2> zr(z.re, Mp2(0));
            zr = newton_polish<Mp2>(f.min_poly(), zr, 8);
            reals.push_back(zr);
        } else if (z.im > 0) {
            complexes.push_back(z);
        }
    }
    std::sort(reals.begin(), reals.end(),
              [](const CF<Mp2>& a, const CF<Mp2>& b) { return a.re < b.re; });
    std::sort(complexes.begin(), complexes.end(), [](const CF<Mp2>& a, const CF<Mp2>& b) {
        return a.re != b.re ? a.re < b.re : a.im < b.im;
    });
    if (static_cast<int>(reals.size()) != e->r1 ||
        static_cast<int>(complexes.size()) != e->r2)
        throw InvariantViolation("signature does not match isolated roots of min_poly");

    std::vector<CF<Mp2>> roots2;
    for (auto& z : reals) roots2.push_back(z);
    for (auto& z : complexes) roots2.push_back(z);

    int places = e->r1 + e->r2;
    e->roots_mp2 = roots2;
    e->roots_mp.resize(places);
    e->roots_d.resize(places);
    e->omega_mp2.assign(places, std::vector<CF<Mp2>>(e->n));
    e->omega_mp.assign(places, std::vector<CF<Mp>>(e->n));
    e->omega_d.assign(places, std::vector<std::complex<double>>(e->n));

    for (int l = 0; l < places; ++l) {
        const CF<Mp2>& th = roots2[l];
        e->roots_mp[l] = CF<Mp>(Mp(th.re), Mp(th.im));
        e->roots_d[l] = std::complex<double>(static_cast<double>(th.re),
                                             static_cast<double>(th.im));
        for (int j = 0; j < e->n; ++j) {
            CF<Mp2> acc(Mp2(0), Mp2(0)), pw(Mp2(1), Mp2(0));
            const auto& coeffs = f.basis_in_theta(j);
            for (size_t k = 0; k < coeffs.size(); ++k) {
                Mp2 ck(boost::multiprecision::numerator(coeffs[k]).str());
                Mp2 dk(boost::multiprecision::denominator(coeffs[k]).str());
                acc = acc + CF<Mp2>(ck / dk, Mp2(0)) * pw;
                pw = pw * th;
            }
            e->omega_mp2[l][j] = acc;
            e->omega_mp[l][j] = CF<Mp>(Mp(acc.re), Mp(acc.im));
            e->omega_d[l][j] = std::complex<double>(static_cast<double>(acc.re),
                                                    static_cast<double>(acc.im));
        }
    }
    const Embeddings& ref = *e;
    cache[f.hash()] = std::move(e);
    return ref;
}

std::vector<std::complex<double>> Embeddings::embed(
    const std::vector<double>& x) const {
    std::vector<std::complex<double>> v(r1 + r2);
    for (int l = 0; l < r1 + r2; ++l) {
        std::complex<double> s(0, 0);
        for (int j = 0; j < n; ++j) s += x[j] * omega_d[l][j];
        v[l] = s;
    }
    return v;
}

std::vector<double> Embeddings::log_embedding(const std::vector<double>& x,
                                              double tol) const {
    auto v = embed(x);
    std::vector<double> out(r1 + r2);
    for (int l = 0; l < r1 + r2; ++l) {
        double a = std::abs(v[l]);
        if (!(a > tol)) throw NearZeroEmbedding("embedding below tolerance");
        out[l] = (l < r1) ? std::log(a) : 2 * std::log(a);
    }
    return out;
}

std::vector<Mp> Embeddings::log_embedding_mp(const std::vector<i64>& x) const {
    return log_embed_impl<Mp>(r1, r2, omega_mp, x);
}
std::vector<Mp2> Embeddings::log_embedding_mp2(const std::vector<i64>& x) const {
    return log_embed_impl<Mp2>(r1, r2, omega_mp2, x);
}

}  // namespace nfc
