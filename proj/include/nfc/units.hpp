#pragma once

#include <optional>
#include <vector>

#include "nfc/embeddings.hpp"
#include "nfc/field.hpp"

namespace nfc {

// Generators of the free part of the norm-one unit group.
struct PlusUnitBasis {
    std::vector<std::vector<i64>> generators;  // each of norm exactly +1
    int index_in_YK = 1;                       // [Y_K : Y_K^(+)]
};

/// Build Y_K^(+) generators from the configured Y_K generators: square /
/// pair up norm -1 generators, or absorb them into a norm -1 root of unity
/// (which exists iff n is odd, namely -1).
PlusUnitBasis derive_plus_units(const FieldSpec& f);

// ---------------------------------------------------------------------------
// Fundamental domain D_+ for the action of Y_K^(+), expressed through the
// logarithmic embedding. Parallelotope convention: coordinates t_j in [0,1),
// base point 0; points within tol_log of a face are re-decided at doubled
// precision.
// ---------------------------------------------------------------------------
class LogDomain {
  public:
    static LogDomain build(const FieldSpec& f);
    static LogDomain build(const FieldSpec& f, const PlusUnitBasis& plus);

    int rank() const { return r_; }
    int places() const { return places_; }
    const PlusUnitBasis& plus_units() const { return plus_; }
    double tol_log() const { return tol_log_; }

    struct Membership {
        bool member = false;
        double xi = 0;              // log|N(x)| / n
        std::vector<double> t;      // cell coordinates
        bool near_boundary = false;
    };

    /// Membership for real vectors (volume work, double precision only).
    Membership membership_real(const std::vector<double>& x) const;

    /// Membership for integer vectors; near-boundary cases are recomputed
    /// at doubled precision before the half-open convention is applied.
    Membership membership_int(const std::vector<i64>& x) const;

    /// Reduce x by unit multiplications into D_+; returns the unit word and
    /// the reduced vector. Norm is preserved exactly.
    std::pair<std::vector<i64>, std::vector<i64>> reduce_to_domain(
        const std::vector<i64>& x) const;

    /// Half-widths of an axis-aligned x-space box containing D_+^eps(1),
    /// padded by 1.01.
    std::vector<double> unit_box_halfwidths() const;

    const FieldSpec& field() const { return *field_; }

  private:
    const FieldSpec* field_ = nullptr;
    PlusUnitBasis plus_;
    int r_ = 0, places_ = 0, n_ = 0;
    double tol_log_ = 1e-10;
    // columns u_1..u_r, weight; solve_ = inverse, both double and Mp2
    std::vector<std::vector<double>> solve_;
    std::vector<std::vector<Mp2>> solve_mp2_;
    std::vector<double> cell_max_;  // max over F_+ vertices, per place

    template <typename F>
    std::vector<F> solve_coords(const std::vector<F>& y,
                                const std::vector<std::vector<F>>& inv) const;
};

/// |det| of the (r1+r2) x (r1+r2) matrix with rows psi(delta_j) and the
/// weight vector (1,..,1,2,..,2).
double modified_regulator(const FieldSpec& f, const PlusUnitBasis& plus);

struct RegulatorAudit {
    double modified;      // the determinant above
    double classical_RK;  // from the Y_K generators
    int index_in_YK;
    int degree;
};
RegulatorAudit modified_regulator_audit(const FieldSpec& f);

/// vol(D_+^eps(1)) in closed form:
/// (#signs) * (2 pi)^{r2} * (modified regulator / n) / sqrt|D_K|,
/// #signs = 2^{r1-1} for r1 >= 1, else 1 for eps=+ and 0 for eps=-.
double kappa_closed_form(const FieldSpec& f, int eps);

// ---------------------------------------------------------------------------
// Cones inside D_+.
// ---------------------------------------------------------------------------
struct ConeSpec {
    enum class Kind { FullDomain, DirectionBall };
    Kind kind = Kind::FullDomain;
    int sign_filter = 0;     // 0 none, else +-1 required sign of N(x)
    bool mu_sector = false;  // quotient by mu_K^(+) via a first-place sector
    std::vector<double> center;  // DirectionBall: must lie in D_+
    double radius = 0;

    u64 hash() const;
};

/// The cone-specific part of membership (the D_+ part is separate).
bool cone_member_real(const FieldSpec& f, const ConeSpec& cone,
                      const std::vector<double>& x, double norm_value);
bool cone_member_int(const FieldSpec& f, const ConeSpec& cone,
                     const std::vector<i64>& x, const BigInt& norm_value);

struct KappaEstimate {
    double value = 0;
    double error_estimate = 0;
    std::string method;
    u64 budget = 0;
};

/// vol(D_+^eps(1) cap cone) by midpoint-grid counting ("lattice") or
/// scrambled-Halton sampling ("qmc") over the analytic bounding box.
KappaEstimate kappa_eps(const LogDomain& dom, const ConeSpec& cone, int eps,
                        const std::string& method, u64 budget, u64 seed = 1,
                        std::optional<double> tol = std::nullopt);

/// Continued-fraction fundamental solution of x^2 - d y^2 = +-1 (smallest
/// x + y sqrt(d) > 1); used as an independent oracle for real quadratics.
std::pair<i64, i64> pell_fundamental(i64 d);

}  // namespace nfc
