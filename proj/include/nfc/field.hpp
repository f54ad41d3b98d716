#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nfc/common.hpp"

namespace nfc {

// ---------------------------------------------------------------------------
// Splitting data: (p) = prod q_i^{e_i} with N(q_i) = p^{f_i}.
// ---------------------------------------------------------------------------
struct SplittingType {
    std::vector<std::pair<int, int>> ef;  // (e_i, f_i)

    int sum_ef() const {
        int s = 0;
        for (auto& [e, f] : ef) s += e * f;
        return s;
    }
    bool ramified() const {
        for (auto& [e, f] : ef)
            if (e > 1) return true;
        return false;
    }
    bool has_degree_one() const {
        for (auto& [e, f] : ef)
            if (f == 1) return true;
        return false;
    }
};

enum class PrimeClass { P0, P1, P2 };

// Z-basis of an integral ideal, rows in the omega-basis.
struct IdealBasis {
    std::vector<std::vector<i64>> rows;  // n x n
    BigInt norm;                         // |det|
};

struct UnitData {
    int mu_order = 2;
    int mu_plus_order = 2;
    std::vector<std::vector<i64>> fundamental;  // coordinates in omega-basis
    std::vector<int> norms;                     // +-1 per generator
};

// ---------------------------------------------------------------------------
// A number field given by explicit integral-basis data. Immutable after
// validation; all methods are const and thread-safe (the splitting cache is
// guarded internally).
// ---------------------------------------------------------------------------
class FieldSpec {
  public:
    static FieldSpec from_json_file(const std::string& path);
    static FieldSpec from_json_text(const std::string& text);

    const std::string& name() const { return name_; }
    int degree() const { return n_; }
    const std::vector<i64>& min_poly() const { return min_poly_; }
    i64 discriminant() const { return disc_; }
    int r1() const { return r1_; }
    int r2() const { return r2_; }
    int unit_rank() const { return r1_ + r2_ - 1; }
    i64 class_number() const { return h_; }
    const UnitData& unit_data() const { return units_; }
    const std::vector<i64>& index_primes() const { return index_primes_; }
    std::optional<Rat> declared_density() const { return density_; }
    u64 hash() const { return hash_; }

    /// basis element i expressed in powers of theta (rational coefficients)
    const std::vector<Rat>& basis_in_theta(int i) const { return basis_[i]; }

    /// c_{ij}^{(l)}
    i64 mult_tensor(int i, int j, int l) const { return tensor_[(i * n_ + j) * n_ + l]; }

    // -- arithmetic in the omega-basis ------------------------------------
    BigInt norm_form_eval(const std::vector<i64>& x) const;
    BigInt norm_form_eval_big(const std::vector<BigInt>& x) const;
    /// z with (x.w)(y.w) = z.w
    std::vector<i64> mult_element(const std::vector<i64>& x,
                                  const std::vector<i64>& y) const;
    std::vector<BigInt> mult_element_big(const std::vector<BigInt>& x,
                                         const std::vector<BigInt>& y) const;
    /// coordinates of the inverse of a unit u (|N(u)| = 1)
    std::vector<i64> unit_inverse(const std::vector<i64>& u) const;
    BigInt trace_of(const std::vector<i64>& x) const;

    /// Expanded norm form: list of (packed exponent vector, coefficient).
    /// Exponents are packed 8 bits per variable, variable 0 lowest.
    const std::vector<std::pair<u64, i64>>& norm_monomials() const {
        return norm_monomials_;
    }
    /// N(x; a) monomials for the ideal basis a (x -> x^t C substitution).
    std::vector<std::pair<u64, i64>> norm_monomials_for_ideal(
        const IdealBasis& a) const;

    // -- splitting, r_K, prime classes ------------------------------------
    SplittingType splitting_type(i64 p) const;
    PrimeClass prime_class(i64 p) const;
    i64 r_K_prime_power(i64 p, int k) const;
    i64 r_K(i64 m) const;
    /// r_K(m) for all m <= x by a multiplicative sieve.
    std::vector<i64> r_K_table(i64 x) const;

    // -- analytic checks ---------------------------------------------------
    /// (sum_{m<=x} r_K(m), h*kappa*x). kappa uses the classical regulator
    /// computed from the configured fundamental units.
    std::pair<double, double> zeta_partial_sum(i64 x) const;
    double kappa_residue() const;  // kappa from the class number formula
    double classical_regulator() const;

    struct EulerP2Result {
        double value;
        double log_ratio;  // value / (log T)^(1-delta)
    };
    EulerP2Result euler_product_P2(i64 T) const;

    /// \hat{delta} = sum_{p<=X, p in P1} 1/p divided by sum_{p<=X} 1/p
    double estimate_dirichlet_density(i64 X) const;

    // -- cache -------------------------------------------------------------
    void load_splitting_cache(const std::string& cache_dir) const;
    void save_splitting_cache(const std::string& cache_dir) const;
    std::pair<u64, u64> splitting_cache_stats() const;  // hits, misses

    IdealBasis principal_ideal_basis(const std::vector<i64>& alpha) const;

    std::string json_text() const { return json_text_; }

  private:
    FieldSpec() = default;
    void validate() const;
    void build_norm_polynomial();

    std::string name_;
    int n_ = 0;
    std::vector<i64> min_poly_;
    std::vector<std::vector<Rat>> basis_;
    std::vector<i64> tensor_;
    i64 disc_ = 0;
    int r1_ = 0, r2_ = 0;
    i64 h_ = 1;
    std::vector<i64> index_primes_;
    std::map<i64, SplittingType> overrides_;
    std::optional<Rat> density_;
    UnitData units_;
    std::vector<std::pair<u64, i64>> norm_monomials_;
    u64 hash_ = 0;
    std::string json_text_;

    mutable std::mutex cache_mu_;
    mutable std::map<i64, SplittingType> split_cache_;
    mutable u64 cache_hits_ = 0, cache_misses_ = 0;
};

// Truncated Euler product E_{3eH,x}(s; h) evaluated at 1 and 1+s0.
struct MultFn;  // defined in multfn.hpp
struct TruncatedEulerResult {
    std::complex<double> at_one;
    std::complex<double> at_shift;
};
TruncatedEulerResult truncated_euler_compare(const MultFn& h, double H, i64 x,
                                             std::complex<double> s0,
                                             double c_exponent = 0.1);

/// All primes <= x (simple sieve).
std::vector<i64> primes_up_to(i64 x);

/// det of an integer matrix, exact (Bareiss).
BigInt det_int(std::vector<std::vector<BigInt>> m);

}  // namespace nfc
