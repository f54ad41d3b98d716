#pragma once

#include <vector>

#include "nfc/common.hpp"

namespace nfc {

// Dense univariate polynomials over F_p, coefficients in [0, p).
// p is assumed odd or 2, p < 2^31 so products fit in i64.
using PolyFp = std::vector<i64>;

namespace fp {

i64 addm(i64 a, i64 b, i64 p);
i64 subm(i64 a, i64 b, i64 p);
i64 mulm(i64 a, i64 b, i64 p);
i64 powm(i64 a, i64 e, i64 p);
i64 invm(i64 a, i64 p);

PolyFp trim(PolyFp f);
int degree(const PolyFp& f);
PolyFp make_monic(PolyFp f, i64 p);
PolyFp mul(const PolyFp& a, const PolyFp& b, i64 p);
PolyFp mulmod(const PolyFp& a, const PolyFp& b, const PolyFp& mod, i64 p);
PolyFp rem(PolyFp a, const PolyFp& b, i64 p);
PolyFp gcd(PolyFp a, PolyFp b, i64 p);
PolyFp derivative(const PolyFp& f, i64 p);
PolyFp powmod(PolyFp base, const BigInt& e, const PolyFp& mod, i64 p);
PolyFp x_power_mod(const BigInt& e, const PolyFp& mod, i64 p);

}  // namespace fp

struct FpFactor {
    PolyFp poly;  // monic irreducible
    int multiplicity;
};

/// Full factorization of f over F_p: squarefree decomposition, then
/// distinct-degree, then Cantor-Zassenhaus equal-degree splitting driven by
/// a generator seeded from (p, f), so results are reproducible.
std::vector<FpFactor> factor_mod_p(const std::vector<i64>& f_int, i64 p);

bool is_irreducible_mod_p(const PolyFp& f, i64 p);

/// Deterministic search for a monic irreducible polynomial of degree d.
PolyFp find_irreducible(i64 p, int d);

}  // namespace nfc
