#pragma once

#include <complex>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "nfc/field.hpp"

namespace nfc {

// ~133 and ~266 bit binary floats; the second is the "doubled precision"
// fallback for near-boundary membership decisions.
using Mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<40>>;
using Mp2 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<80>>;

template <typename F>
struct CF {  // minimal complex type over a multiprecision float
    F re{}, im{};
    CF() = default;
    CF(F r, F i) : re(r), im(i) {}
    CF operator+(const CF& o) const { return {re + o.re, im + o.im}; }
    CF operator-(const CF& o) const { return {re - o.re, im - o.im}; }
    CF operator*(const CF& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    CF operator/(const CF& o) const {
        F d = o.re * o.re + o.im * o.im;
        return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
    }
    F abs2() const { return re * re + im * im; }
};

// Isolated embeddings of a field: r1 real places then r2 complex places
// (one representative per conjugate pair). omega[l][j] is the image of the
// j-th integral basis element at place l.
struct Embeddings {
    int n = 0, r1 = 0, r2 = 0;

    std::vector<std::complex<double>> roots_d;
    std::vector<std::vector<std::complex<double>>> omega_d;

    std::vector<CF<Mp>> roots_mp;
    std::vector<std::vector<CF<Mp>>> omega_mp;

    std::vector<CF<Mp2>> roots_mp2;
    std::vector<std::vector<CF<Mp2>>> omega_mp2;

    /// Cached per field (keyed by the field hash).
    static const Embeddings& of(const FieldSpec& f);

    /// v(x) at all places, double precision.
    std::vector<std::complex<double>> embed(const std::vector<double>& x) const;

    /// psi(x) = (log|v^(1)|, .., 2 log|v^(r1+1)|, ..); throws
    /// NearZeroEmbedding if some |v^(l)| <= tol.
    std::vector<double> log_embedding(const std::vector<double>& x,
                                      double tol = 1e-300) const;

    /// Same at ~133-bit precision (input coordinates are exact integers).
    std::vector<Mp> log_embedding_mp(const std::vector<i64>& x) const;
    std::vector<Mp2> log_embedding_mp2(const std::vector<i64>& x) const;
};

}  // namespace nfc
