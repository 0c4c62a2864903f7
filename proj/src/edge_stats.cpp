#include "knnscan/edge_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace knnscan {

std::string statKindName(StatKind k) {
    switch (k) {
        case StatKind::Z: return "Z";
        case StatKind::W: return "W";
        case StatKind::Diff: return "DIFF";
        case StatKind::S: return "S";
        case StatKind::M: return "M";
    }
    return "?";
}

StatKind statKindFromName(const std::string& name) {
    if (name == "Z" || name == "z") return StatKind::Z;
    if (name == "W" || name == "w" || name == "Zw") return StatKind::W;
    if (name == "DIFF" || name == "diff" || name == "Zdiff") return StatKind::Diff;
    if (name == "S" || name == "s") return StatKind::S;
    if (name == "M" || name == "m") return StatKind::M;
    throw std::invalid_argument("unknown statistic kind: " + name);
}

void SplitContext::validate() const {
    if (L < 2) throw std::invalid_argument("split: L must be >= 2");
    if (t < n - L + 1 || t >= n) throw std::invalid_argument("split: t out of range");
}

void SplitContext::validateForMoments() const {
    validate();
    if (L < 4) throw std::invalid_argument("null moments require L >= 4");
    const int xs = x();
    if (xs < 2 || xs > L - 2)
        throw std::invalid_argument("null moments require 2 <= x <= L-2");
}

EdgeCounts edgeCounts(const NeighborTable& table, const SplitContext& ctx) {
    ctx.validate();
    if (table.L != ctx.L) throw std::invalid_argument("table/context L mismatch");
    const int x = ctx.x();
    EdgeCounts c;
    for (int i = 0; i < table.L; ++i) {
        const bool i1 = i < x;
        for (int r = 0; r < table.k; ++r) {
            const int j = table.rank(i, r);
            const bool j1 = j < x;
            if (i1 && j1)
                c.r1 += 2;
            else if (!i1 && !j1)
                c.r2 += 2;
            else
                c.r0 += 2;
        }
    }
    const double p = splitWeightP(ctx.L, x);
    c.rw = (1.0 - p) * c.r1 + p * c.r2;
    c.rdiff = c.r1 - c.r2;
    return c;
}

NullMoments nullMoments(const GraphSummary& summary, const SplitContext& ctx) {
    ctx.validateForMoments();
    if (summary.L != ctx.L) throw std::invalid_argument("summary/context L mismatch");
    const double L = ctx.L;
    const double k = summary.k;
    const double x = ctx.x();
    const double y = L - x;  // sample-2 size n - t
    const double ph = summary.mutualPerNode;
    const double qu = summary.inDegSqPerNode;

    NullMoments m;
    m.eR1 = 2.0 * k * x * (x - 1) / (L - 1);
    m.eR2 = 2.0 * k * y * (y - 1) / (L - 1);

    const double c = 4.0 / ((L - 1) * (L - 2) * (L - 3));
    m.sigma11 = c * x * (x - 1) * y *
                ((y - 1) * (k + ph) + (x - 2) * qu - k * k * x * (L - 3) / (L - 1));
    m.sigma22 = c * x * y * (y - 1) *
                ((x - 1) * (k + ph) + (y - 2) * qu - k * k * y * (L - 3) / (L - 1));
    m.sigma12 = c * x * (x - 1) * y * (y - 1) *
                (k * k * (L - 3) / (L - 1) + k + ph - qu);

    m.eRw = 2.0 * k * L * (x - 1) * (y - 1) / ((L - 1) * (L - 2));
    m.varRw = c * x * (x - 1) * y * (y - 1) *
              (k + ph - (qu + k * k * (L - 3) / (L - 1)) / (L - 2));

    m.eRdiff = 2.0 * k * (x - y);
    m.varRdiff = 4.0 * x * y / (L - 1) * (qu - k * k);

    // Closed-form determinant: the factored form of sigma11*sigma22 - sigma12^2
    // in the graph functionals (second factor carries k + ph).
    m.detSigma = 16.0 * x * x * (x - 1) * y * y * (y - 1) * (qu - k * k) /
                 ((L - 1) * (L - 1) * (L - 1) * (L - 2) * (L - 2) * (L - 3)) *
                 ((L - 1) * (L - 2) * (k + ph) - (L - 1) * qu - k * k * (L - 3));
    return m;
}

double StatValues::value(StatKind kind) const {
    switch (kind) {
        case StatKind::Z: return z;
        case StatKind::W: return zw;
        case StatKind::Diff: return std::fabs(zdiff);
        case StatKind::S: return s;
        case StatKind::M: return mKappa;
    }
    return 0;
}

bool StatValues::valid(StatKind kind) const {
    switch (kind) {
        case StatKind::Z: return zValid;
        case StatKind::W: return wValid;
        case StatKind::Diff: return diffValid;
        case StatKind::S: return sValid;
        case StatKind::M: return mValid;
    }
    return false;
}

StatValues statistics(const EdgeCounts& counts, const NullMoments& m, double kappa) {
    if (kappa < 0) throw std::invalid_argument("kappa must be >= 0");
    StatValues v;

    if (m.varRw > 0) {
        v.zw = (counts.rw - m.eRw) / std::sqrt(m.varRw);
        v.wValid = true;
    }
    if (m.varRdiff > 0) {
        v.zdiff = (counts.rdiff - m.eRdiff) / std::sqrt(m.varRdiff);
        v.diffValid = true;
    }
    // Baseline Z, oriented so that a deficit of between-sample edges is positive.
    const double varR0 = m.sigma11 + m.sigma22 + 2.0 * m.sigma12;
    if (varR0 > 0) {
        // r0 + r1 + r2 = 2Lk, so eR0 = 2Lk - eR1 - eR2.
        const double eR0 =
            static_cast<double>(counts.r0 + counts.r1 + counts.r2) - m.eR1 - m.eR2;
        v.z = (eR0 - counts.r0) / std::sqrt(varR0);
        v.zValid = true;
    }
    const double det = m.sigma11 * m.sigma22 - m.sigma12 * m.sigma12;
    if (det >= kSingularityFloor * m.sigma11 * m.sigma22 && det > 0) {
        const double d1 = counts.r1 - m.eR1;
        const double d2 = counts.r2 - m.eR2;
        v.s = (m.sigma22 * d1 * d1 - 2.0 * m.sigma12 * d1 * d2 + m.sigma11 * d2 * d2) / det;
        v.sValid = true;
    }
    v.mValid = v.diffValid && (kappa == 0.0 || v.wValid);
    if (v.mValid) v.mKappa = std::max(std::fabs(v.zdiff), kappa * v.zw);
    return v;
}

SplitSweep SplitSweep::overArrivalOrder(const NeighborTable& table) {
    const int L = table.L;
    const int k = table.k;
    SplitSweep sw;
    sw.L = L;
    sw.k = k;
    sw.r1.assign(L + 1, 0);
    sw.r2.assign(L + 1, 0);
    long r1 = 0;
    long r2 = 2 * static_cast<long>(L) * k;
    sw.r2[0] = r2;
    // Nodes join sample 1 in arrival order; each adjacent directed edge moves
    // r0 -> r1 when the other endpoint already joined, else r2 -> r0.
    for (int v = 0; v < L; ++v) {
        for (int a = table.adjOffset[v]; a < table.adjOffset[v + 1]; ++a) {
            const int u = table.adj[a];
            if (u < v)
                r1 += 2;
            else
                r2 -= 2;
        }
        sw.r1[v + 1] = r1;
        sw.r2[v + 1] = r2;
    }
    return sw;
}

StatProfile computeProfile(const NeighborTable& table, const GraphSummary& summary,
                           long n, int n0, int n1, double kappa) {
    const int L = table.L;
    if (!(2 <= n0 && n0 < n1 && n1 <= L - 2))
        throw std::invalid_argument("scan range requires 2 <= n0 < n1 <= L-2");

    const SplitSweep sweep = SplitSweep::overArrivalOrder(table);
    StatProfile prof;
    prof.n = n;
    prof.n0 = n0;
    prof.n1 = n1;
    prof.kappa = kappa;
    prof.ts.reserve(n1 - n0 + 1);
    prof.values.reserve(n1 - n0 + 1);
    for (long t = n - n1; t <= n - n0; ++t) {
        SplitContext ctx{n, L, t};
        const int x = ctx.x();
        EdgeCounts c;
        c.r1 = sweep.r1[x];
        c.r2 = sweep.r2[x];
        c.r0 = 2 * static_cast<long>(L) * table.k - c.r1 - c.r2;
        const double p = splitWeightP(L, x);
        c.rw = (1.0 - p) * c.r1 + p * c.r2;
        c.rdiff = c.r1 - c.r2;
        prof.ts.push_back(t);
        prof.values.push_back(statistics(c, nullMoments(summary, ctx), kappa));
    }
    return prof;
}

StatProfile::KindMax StatProfile::maxOf(StatKind kind) const {
    KindMax best;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!values[i].valid(kind)) continue;
        const double v = values[i].value(kind);
        if (!best.valid || v > best.value) {  // strict: ties keep the smaller t
            best.valid = true;
            best.value = v;
            best.argmaxT = ts[i];
        }
    }
    return best;
}

ScanResult scanMax(const NeighborTable& table, const GraphSummary& summary,
                   long n, int n0, int n1, double kappa, StatKind kind) {
    const StatProfile prof = computeProfile(table, summary, n, n0, n1, kappa);
    const auto m = prof.maxOf(kind);
    if (!m.valid)
        throw std::runtime_error("scanMax: all t degenerate for statistic " + statKindName(kind));
    return {m.value, m.argmaxT};
}

}  // namespace knnscan
