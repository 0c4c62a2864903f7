#pragma once

#include <cstdint>
#include <vector>

#include "knnscan/neighbor_graph.hpp"

namespace knnscan {

enum class CountKind { R0, R1, R2, Rw, Rdiff };

/// Moments of one R-count under the permutation null.
struct PermMomentEstimate {
    double mean = 0;
    double variance = 0;
    double thirdCentral = 0;
    double gamma = 0;  // thirdCentral / variance^{3/2}, NaN if variance == 0
    bool exact = false;
    long samples = 0;   // L! for exact, B for sampled
    double se = 0;      // standard error of gamma (sampled only)
};

/// Joint permutation moments of (R1, R2) at one split, from full
/// L!-enumeration. Mixed raw sums up to third order are integer-exact, so the
/// derived moments of R0, Rw and Rdiff are exact up to one floating division.
struct ExactSplitMoments {
    int L = 0, k = 0, x = 0;
    double meanR1 = 0, meanR2 = 0;
    double var11 = 0, var22 = 0, cov12 = 0;
    double third111 = 0, third112 = 0, third122 = 0, third222 = 0;  // mixed central
    double meanR0 = 0, varR0 = 0, thirdR0 = 0;
    double meanRw = 0, varRw = 0, thirdRw = 0;
    double meanRdiff = 0, varRdiff = 0, thirdRdiff = 0;

    PermMomentEstimate forKind(CountKind kind) const;
};

/// Enumerates all L! label permutations; requires L <= 9.
ExactSplitMoments exactPermutationMoments(const NeighborTable& table, int x);

/// Same enumeration, all split sizes x = 2..L-2 in one pass.
std::vector<ExactSplitMoments> exactPermutationSweep(const NeighborTable& table);

/// Sampled standardized third moments gamma_w, gamma_diff of Z_w and Z_diff,
/// indexed by scan depth u = n - t in [n0, n1] (so the split size is L - u).
/// Estimates are deterministic given (seed, B) regardless of thread count.
struct GammaTable {
    int n0 = 0, n1 = 0;
    std::vector<double> gammaW, gammaDiff;  // indexed by u - n0
    std::vector<double> seW, seDiff;
    std::vector<std::uint8_t> validW, validDiff;
    long samples = 0;
    std::uint64_t seed = 0;

    int size() const { return n1 - n0 + 1; }
};

/// Requires a full window's table, B >= 100 and 2 <= n0 < n1 <= L-2.
GammaTable sampledThirdMoments(const NeighborTable& table, int n0, int n1, long B,
                               std::uint64_t seed, int threads = 1);

/// Averages gamma tables over windows (entry-wise over valid entries).
GammaTable averageGammaTables(const std::vector<GammaTable>& tables);

}  // namespace knnscan
