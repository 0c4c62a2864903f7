#pragma once

#include <string>
#include <vector>

#include "knnscan/neighbor_graph.hpp"

namespace knnscan {

enum class StatKind { Z, W, Diff, S, M };

std::string statKindName(StatKind k);
StatKind statKindFromName(const std::string& name);

/// A candidate split of the window ending at n: sample 1 holds the x = t-(n-L)
/// oldest entries, sample 2 the n-t newest.
struct SplitContext {
    long n = 0;
    int L = 0;
    long t = 0;

    int x() const { return static_cast<int>(t - (n - L)); }
    int depth() const { return static_cast<int>(n - t); }

    /// Throws unless n-L+1 <= t < n.
    void validate() const;
    /// Moment formulas additionally need both groups >= 2 and L >= 4.
    void validateForMoments() const;
};

/// Edge counts at one split; every directed rank<=k edge contributes 2 to
/// exactly one of r0/r1/r2 (the A+_{ij} + A+_{ji} symmetrization), so
/// r0 + r1 + r2 = 2Lk.
struct EdgeCounts {
    long r0 = 0;
    long r1 = 0;
    long r2 = 0;
    double rw = 0;   // q(t,n) r1 + p(t,n) r2
    long rdiff = 0;  // r1 - r2
};

EdgeCounts edgeCounts(const NeighborTable& table, const SplitContext& ctx);

/// Exact permutation-null moments of the edge counts, conditional on the
/// realized k-NN graph.
struct NullMoments {
    double eR1 = 0, eR2 = 0;
    double sigma11 = 0, sigma22 = 0, sigma12 = 0;
    double eRw = 0, varRw = 0;
    double eRdiff = 0, varRdiff = 0;
    double detSigma = 0;  // closed form; equals sigma11*sigma22 - sigma12^2
};

NullMoments nullMoments(const GraphSummary& summary, const SplitContext& ctx);

/// Weight p(t,n) = (x-1)/(L-2) of the within-sample-2 count in R_w.
inline double splitWeightP(int L, int x) { return static_cast<double>(x - 1) / (L - 2); }

/// S is skipped at t when detSigma < kSingularityFloor * sigma11 * sigma22.
inline constexpr double kSingularityFloor = 1e-12;

/// Statistic values at one split. A statistic with zero variance (or singular
/// covariance for S) is reported invalid and skipped by scans.
struct StatValues {
    double z = 0, zw = 0, zdiff = 0, s = 0, mKappa = 0;
    bool zValid = false, wValid = false, diffValid = false, sValid = false, mValid = false;

    double value(StatKind kind) const;
    bool valid(StatKind kind) const;
};

StatValues statistics(const EdgeCounts& counts, const NullMoments& moments, double kappa);

/// R1(x), R2(x) for every split size x in one O(Lk) pass over the window's
/// arrival order (the identity labeling).
struct SplitSweep {
    int L = 0, k = 0;
    std::vector<long> r1, r2;  // indexed by x = 0..L

    static SplitSweep overArrivalOrder(const NeighborTable& table);
};

/// Per-t statistic values over the scan range t in [n-n1, n-n0] with the
/// per-kind maxima; argmax ties break toward smaller t.
struct StatProfile {
    long n = 0;
    int n0 = 0, n1 = 0;
    double kappa = 1.0;
    std::vector<long> ts;            // ascending
    std::vector<StatValues> values;  // aligned with ts

    struct KindMax {
        double value = 0;
        long argmaxT = 0;
        bool valid = false;  // false when every t was degenerate
    };
    KindMax maxOf(StatKind kind) const;
};

/// Requires 2 <= n0 < n1 <= L-2; throws std::invalid_argument otherwise.
StatProfile computeProfile(const NeighborTable& table, const GraphSummary& summary,
                           long n, int n0, int n1, double kappa);

struct ScanResult {
    double maxValue = 0;
    long argmaxT = 0;
};

/// Throws std::runtime_error when every t in the range is degenerate.
ScanResult scanMax(const NeighborTable& table, const GraphSummary& summary,
                   long n, int n0, int n1, double kappa, StatKind kind);

}  // namespace knnscan
