#pragma once

#include <array>
#include <vector>

#include "nfc/common.hpp"

namespace nfc {

// Scrambled Halton sequence. The per-base digit permutations are drawn from
// a SplitMix64 stream, so a fixed seed reproduces the exact point set.
class HaltonSampler {
  public:
    HaltonSampler(int dim, u64 seed) : dim_(dim), perms_(dim) {
        static const int primes[16] = {2,  3,  5,  7,  11, 13, 17, 19,
                                       23, 29, 31, 37, 41, 43, 47, 53};
        if (dim > 16) throw PreconditionError("HaltonSampler: dim > 16");
        SplitMix64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        for (int d = 0; d < dim; ++d) {
            int p = primes[d];
            bases_.push_back(p);
            std::vector<int> perm(p);
            for (int i = 0; i < p; ++i) perm[i] = i;
            // Fisher-Yates, fixing perm[0]=0 so 0 never maps to a leading
            // nonzero digit (keeps points in [0,1)).
            for (int i = p - 1; i >= 2; --i) {
                int j = 1 + static_cast<int>(rng.below(static_cast<u64>(i)));
                std::swap(perm[i], perm[j]);
            }
            perms_[d] = std::move(perm);
        }
    }

    /// Point #idx (0-based), written into out[0..dim).
    void point(u64 idx, double* out) const {
        for (int d = 0; d < dim_; ++d) {
            u64 n = idx + 1;  // skip the origin
            int b = bases_[d];
            double inv = 1.0 / b, f = inv, x = 0.0;
            const std::vector<int>& perm = perms_[d];
            while (n) {
                x += perm[n % b] * f;
                n /= b;
                f *= inv;
            }
            out[d] = x;
        }
    }

    int dim() const { return dim_; }

  private:
    int dim_;
    std::vector<int> bases_;
    std::vector<std::vector<int>> perms_;
};

}  // namespace nfc
