#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nfc/field.hpp"

namespace nfc {

// rho(p^m, A, a; M): residue vectors x mod p^m with N(x; a) = A and
// x = x0 mod p^{v_p(M)}.
struct CongruenceQuery {
    const FieldSpec* field = nullptr;
    i64 p = 0;
    int m = 1;
    BigInt A;
    i64 M = 1;                   // only its p-part constrains
    std::vector<i64> x0;         // empty means no base-residue constraint
    const IdealBasis* ideal = nullptr;

    int mu() const { return vp(M, p, m); }
};

struct RhoResult {
    u64 count = 0;
    std::string backend;  // "closed_form" | "hensel(<m0>)" | "bruteforce" | ...
};

/// Histogram of N(x; ideal) mod p^m over the constrained residue set:
/// entry [A] is rho(p^m, A, ideal; p^mu). Cached (memory + optional disk),
/// enumeration parallel over the outermost coordinate.
std::shared_ptr<const std::vector<u64>> rho_histogram(
    const FieldSpec& f, i64 p, int m, const IdealBasis* ideal, int mu,
    const std::vector<i64>& x0, u64 budget);

u64 rho_bruteforce(const CongruenceQuery& q, u64 budget);

/// closed form -> Hensel-from-cache -> brute force, with provenance.
RhoResult rho_dispatch(const CongruenceQuery& q, u64 budget);

/// p^{m(n-1)} r_K(p^k) (1-1/p)^{-1} prod_{P|p}(1 - 1/N(P)); requires
/// p not dividing n D_K and k = v_p(A) < m.
u64 rho_closed_form(const FieldSpec& f, i64 p, int m, const BigInt& A);

/// rho at target_m from level q.m via the lifting invariance (exact).
u64 hensel_lift_rho(const CongruenceQuery& q, int target_m, u64 budget);

/// rho over a general modulus q by CRT over its prime powers (M | q).
u64 rho_crt(const FieldSpec& f, i64 q, const BigInt& A, i64 M,
            const std::vector<i64>& x0, u64 budget);

u64 finite_field_norm_count(i64 p, int l, i64 a);
u64 finite_field_norm_count_bruteforce(i64 p, int l, i64 a);

bool rho_ideal_equiv_check(const FieldSpec& f, const IdealBasis& a, i64 p,
                           int m, const BigInt& A, u64 budget);

struct LimitDensityReport {
    double lhs;  // rho(p^m, A) / p^{mn}
    double rhs;  // S(x; p^m, A) / (h kappa x)
};
LimitDensityReport limit_density_check(const FieldSpec& f, i64 p, int m,
                                       const BigInt& A, i64 x, u64 budget);

// ---------------------------------------------------------------------------
// Stratified counts R_delta for a user-supplied polynomial F.
// ---------------------------------------------------------------------------
struct StratumQuery {
    std::vector<std::pair<u64, i64>> monomials;  // packed exponents, coeffs
    int s = 0;                                   // number of variables
    i64 p = 0;
    int m = 1;
    BigInt A;
    int l = 0;                 // congruence level of the base point
    std::vector<i64> a;        // base point (size s; ignored if l = 0)
    int delta = 0;
};

/// #R_delta(p^m, A; p^l): solutions with v_p(grad F) exactly delta.
u64 stratum_count(const StratumQuery& q, u64 budget);

/// gamma(p^m, A; p^l) restricted to v_p(grad F) < bound (for decomposition
/// checks against the stratified counts).
u64 gamma_grad_restricted(const StratumQuery& q, int grad_bound, u64 budget);

/// Cache controls (process-wide).
void rho_cache_set_dir(const std::string& dir);  // empty disables disk
std::pair<u64, u64> rho_cache_stats();           // hits, misses
void rho_cache_clear();

}  // namespace nfc
