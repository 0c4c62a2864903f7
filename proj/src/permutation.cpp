#include "knnscan/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "knnscan/edge_stats.hpp"
#include "knnscan/parallel.hpp"
#include "knnscan/rng.hpp"

namespace knnscan {

namespace {

// R1(x), R2(x) for all x given a join order (order[j] = node with label j).
// joinStep is scratch of size L holding each node's label.
void sweepCounts(const NeighborTable& t, const std::vector<int>& order,
                 std::vector<int>& joinStep, std::vector<long>& r1x, std::vector<long>& r2x) {
    const int L = t.L;
    for (int j = 0; j < L; ++j) joinStep[order[j]] = j;
    long r1 = 0;
    long r2 = 2 * static_cast<long>(L) * t.k;
    r1x[0] = 0;
    r2x[0] = r2;
    for (int j = 0; j < L; ++j) {
        const int v = order[j];
        for (int a = t.adjOffset[v]; a < t.adjOffset[v + 1]; ++a) {
            if (joinStep[t.adj[a]] < j)
                r1 += 2;
            else
                r2 -= 2;
        }
        r1x[j + 1] = r1;
        r2x[j + 1] = r2;
    }
}

struct MixedSums {
    // delta-centred sums per split size x: order 1..3 mixed moments of (R1, R2).
    std::vector<double> s1, s2, s11, s12, s22, s111, s112, s122, s222;
    std::vector<long> anchor1, anchor2;
    int lo = 0, hi = 0;  // inclusive x range

    MixedSums(int L, int k, int lo_, int hi_) : lo(lo_), hi(hi_) {
        const int n = hi - lo + 1;
        for (auto* v : {&s1, &s2, &s11, &s12, &s22, &s111, &s112, &s122, &s222})
            v->assign(n, 0.0);
        anchor1.resize(n);
        anchor2.resize(n);
        for (int x = lo; x <= hi; ++x) {
            // Anchoring near the exact means keeps the integer sums small; any
            // integer anchor leaves the accumulation exact.
            anchor1[x - lo] = std::lround(2.0 * k * x * (x - 1) / (L - 1));
            anchor2[x - lo] = std::lround(2.0 * k * (L - x) * (L - x - 1) / (L - 1));
        }
    }

    void add(int x, long r1, long r2) {
        const int i = x - lo;
        const double d1 = static_cast<double>(r1 - anchor1[i]);
        const double d2 = static_cast<double>(r2 - anchor2[i]);
        s1[i] += d1;
        s2[i] += d2;
        s11[i] += d1 * d1;
        s12[i] += d1 * d2;
        s22[i] += d2 * d2;
        s111[i] += d1 * d1 * d1;
        s112[i] += d1 * d1 * d2;
        s122[i] += d1 * d2 * d2;
        s222[i] += d2 * d2 * d2;
    }
};

struct CentralMoments {
    double m1, m2, c11, c12, c22, t111, t112, t122, t222;
};

CentralMoments centralize(const MixedSums& ms, int x, double n) {
    const int i = x - ms.lo;
    const double e1 = ms.s1[i] / n;
    const double e2 = ms.s2[i] / n;
    const double e11 = ms.s11[i] / n;
    const double e12 = ms.s12[i] / n;
    const double e22 = ms.s22[i] / n;
    const double e111 = ms.s111[i] / n;
    const double e112 = ms.s112[i] / n;
    const double e122 = ms.s122[i] / n;
    const double e222 = ms.s222[i] / n;
    CentralMoments c;
    c.m1 = ms.anchor1[i] + e1;
    c.m2 = ms.anchor2[i] + e2;
    c.c11 = e11 - e1 * e1;
    c.c22 = e22 - e2 * e2;
    c.c12 = e12 - e1 * e2;
    c.t111 = e111 - 3 * e1 * e11 + 2 * e1 * e1 * e1;
    c.t222 = e222 - 3 * e2 * e22 + 2 * e2 * e2 * e2;
    c.t112 = e112 - 2 * e1 * e12 - e2 * e11 + 2 * e1 * e1 * e2;
    c.t122 = e122 - 2 * e2 * e12 - e1 * e22 + 2 * e1 * e2 * e2;
    return c;
}

ExactSplitMoments toSplitMoments(const NeighborTable& t, int x, const CentralMoments& c) {
    ExactSplitMoments m;
    m.L = t.L;
    m.k = t.k;
    m.x = x;
    m.meanR1 = c.m1;
    m.meanR2 = c.m2;
    m.var11 = c.c11;
    m.var22 = c.c22;
    m.cov12 = c.c12;
    m.third111 = c.t111;
    m.third112 = c.t112;
    m.third122 = c.t122;
    m.third222 = c.t222;
    m.meanR0 = 2.0 * t.L * t.k - c.m1 - c.m2;
    m.varR0 = c.c11 + c.c22 + 2 * c.c12;
    m.thirdR0 = -(c.t111 + 3 * c.t112 + 3 * c.t122 + c.t222);
    const double p = splitWeightP(t.L, x);
    const double q = 1.0 - p;
    m.meanRw = q * c.m1 + p * c.m2;
    m.varRw = q * q * c.c11 + 2 * q * p * c.c12 + p * p * c.c22;
    m.thirdRw = q * q * q * c.t111 + 3 * q * q * p * c.t112 + 3 * q * p * p * c.t122 +
                p * p * p * c.t222;
    m.meanRdiff = c.m1 - c.m2;
    m.varRdiff = c.c11 + c.c22 - 2 * c.c12;
    m.thirdRdiff = c.t111 - 3 * c.t112 + 3 * c.t122 - c.t222;
    return m;
}

}  // namespace

PermMomentEstimate ExactSplitMoments::forKind(CountKind kind) const {
    PermMomentEstimate e;
    e.exact = true;
    double third = std::numeric_limits<double>::quiet_NaN();
    switch (kind) {
        case CountKind::R0:
            e.mean = meanR0;
            e.variance = varR0;
            third = thirdR0;
            break;
        case CountKind::R1:
            e.mean = meanR1;
            e.variance = var11;
            third = third111;
            break;
        case CountKind::R2:
            e.mean = meanR2;
            e.variance = var22;
            third = third222;
            break;
        case CountKind::Rw:
            e.mean = meanRw;
            e.variance = varRw;
            third = thirdRw;
            break;
        case CountKind::Rdiff:
            e.mean = meanRdiff;
            e.variance = varRdiff;
            third = thirdRdiff;
            break;
    }
    e.thirdCentral = third;
    e.gamma = e.variance > 0 ? third / std::pow(e.variance, 1.5)
                             : std::numeric_limits<double>::quiet_NaN();
    return e;
}

std::vector<ExactSplitMoments> exactPermutationSweep(const NeighborTable& table) {
    const int L = table.L;
    if (L > 9) throw std::invalid_argument("exact enumeration limited to L <= 9");
    if (L < 4) throw std::invalid_argument("exact enumeration requires L >= 4");

    MixedSums sums(L, table.k, 2, L - 2);
    std::vector<int> order(L);
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> joinStep(L);
    std::vector<long> r1x(L + 1), r2x(L + 1);
    double count = 0;
    do {
        sweepCounts(table, order, joinStep, r1x, r2x);
        for (int x = 2; x <= L - 2; ++x) sums.add(x, r1x[x], r2x[x]);
        count += 1;
    } while (std::next_permutation(order.begin(), order.end()));

    std::vector<ExactSplitMoments> out;
    out.reserve(L - 3);
    for (int x = 2; x <= L - 2; ++x)
        out.push_back(toSplitMoments(table, x, centralize(sums, x, count)));
    return out;
}

ExactSplitMoments exactPermutationMoments(const NeighborTable& table, int x) {
    if (x < 2 || x > table.L - 2)
        throw std::invalid_argument("exact moments need 2 <= x <= L-2");
    return exactPermutationSweep(table)[x - 2];
}

GammaTable sampledThirdMoments(const NeighborTable& table, int n0, int n1, long B,
                               std::uint64_t seed, int threads) {
    const int L = table.L;
    const int k = table.k;
    if (B < 100) throw std::invalid_argument("sampled moments require B >= 100");
    if (!(2 <= n0 && n0 < n1 && n1 <= L - 2))
        throw std::invalid_argument("gamma table requires 2 <= n0 < n1 <= L-2");

    const int nu = n1 - n0 + 1;
    // Accumulators per depth u: centred sums of Rw and Rdiff powers. The
    // analytic permutation means depend only on (L, k, x), so they are exact
    // anchors and the sums estimate central moments directly.
    struct Acc {
        std::vector<double> w1, w2, w3, d1, d2, d3;
        explicit Acc(int n) {
            for (auto* v : {&w1, &w2, &w3, &d1, &d2, &d3}) v->assign(n, 0.0);
        }
        void merge(const Acc& o) {
            for (int i = 0; i < static_cast<int>(w1.size()); ++i) {
                w1[i] += o.w1[i];
                w2[i] += o.w2[i];
                w3[i] += o.w3[i];
                d1[i] += o.d1[i];
                d2[i] += o.d2[i];
                d3[i] += o.d3[i];
            }
        }
    };

    std::vector<double> eRw(nu), eRd(nu), pw(nu);
    for (int u = n0; u <= n1; ++u) {
        const int x = L - u;
        eRw[u - n0] = 2.0 * k * L * (x - 1) * (L - x - 1) /
                      (static_cast<double>(L - 1) * (L - 2));
        eRd[u - n0] = 2.0 * k * (2 * x - L);
        pw[u - n0] = splitWeightP(L, x);
    }

    const int nBatches = static_cast<int>(std::min<long>(20, std::max<long>(1, B / 50)));
    std::vector<long> batchSize(nBatches, B / nBatches);
    for (int i = 0; i < static_cast<int>(B % nBatches); ++i) ++batchSize[i];

    std::vector<Acc> batchAcc(nBatches, Acc(nu));
    Rng master(seed);
    std::vector<std::uint64_t> batchSeed(nBatches);
    for (int i = 0; i < nBatches; ++i) batchSeed[i] = master.derive(1000 + i).seed();

    parallelFor(nBatches, threads, [&](long bi) {
        Rng rng(batchSeed[bi]);
        Acc& acc = batchAcc[bi];
        std::vector<int> order(L);
        std::iota(order.begin(), order.end(), 0);
        std::vector<int> joinStep(L);
        std::vector<long> r1x(L + 1), r2x(L + 1);
        for (long rep = 0; rep < batchSize[bi]; ++rep) {
            rng.shuffle(order);
            sweepCounts(table, order, joinStep, r1x, r2x);
            for (int i = 0; i < nu; ++i) {
                const int x = L - (n0 + i);
                const double p = pw[i];
                const double w = (1.0 - p) * r1x[x] + p * r2x[x] - eRw[i];
                const double d = static_cast<double>(r1x[x] - r2x[x]) - eRd[i];
                acc.w1[i] += w;
                acc.w2[i] += w * w;
                acc.w3[i] += w * w * w;
                acc.d1[i] += d;
                acc.d2[i] += d * d;
                acc.d3[i] += d * d * d;
            }
        }
    });

    Acc total(nu);
    for (const auto& a : batchAcc) total.merge(a);

    auto gammaOf = [](double s1, double s2, double s3, double n) {
        const double m1 = s1 / n;
        const double var = s2 / n - m1 * m1;
        if (var <= 0) return std::numeric_limits<double>::quiet_NaN();
        const double m3 = s3 / n - 3 * m1 * (s2 / n) + 2 * m1 * m1 * m1;
        return m3 / std::pow(var, 1.5);
    };

    GammaTable g;
    g.n0 = n0;
    g.n1 = n1;
    g.samples = B;
    g.seed = seed;
    g.gammaW.assign(nu, 0);
    g.gammaDiff.assign(nu, 0);
    g.seW.assign(nu, 0);
    g.seDiff.assign(nu, 0);
    g.validW.assign(nu, 0);
    g.validDiff.assign(nu, 0);

    for (int i = 0; i < nu; ++i) {
        const double gw = gammaOf(total.w1[i], total.w2[i], total.w3[i], static_cast<double>(B));
        const double gd = gammaOf(total.d1[i], total.d2[i], total.d3[i], static_cast<double>(B));
        g.gammaW[i] = gw;
        g.gammaDiff[i] = gd;
        g.validW[i] = std::isfinite(gw);
        g.validDiff[i] = std::isfinite(gd);
        // standard errors from the spread of per-batch estimates
        if (nBatches >= 2) {
            std::vector<double> gws, gds;
            for (int bi = 0; bi < nBatches; ++bi) {
                const double n = static_cast<double>(batchSize[bi]);
                const auto& a = batchAcc[bi];
                const double bw = gammaOf(a.w1[i], a.w2[i], a.w3[i], n);
                const double bd = gammaOf(a.d1[i], a.d2[i], a.d3[i], n);
                if (std::isfinite(bw)) gws.push_back(bw);
                if (std::isfinite(bd)) gds.push_back(bd);
            }
            auto sem = [](const std::vector<double>& v) {
                if (v.size() < 2) return 0.0;
                double m = 0;
                for (double x : v) m += x;
                m /= static_cast<double>(v.size());
                double s = 0;
                for (double x : v) s += (x - m) * (x - m);
                s /= static_cast<double>(v.size() - 1);
                return std::sqrt(s / static_cast<double>(v.size()));
            };
            g.seW[i] = sem(gws);
            g.seDiff[i] = sem(gds);
        }
    }
    return g;
}

GammaTable averageGammaTables(const std::vector<GammaTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("no gamma tables to average");
    GammaTable out = tables.front();
    const int nu = out.size();
    for (const auto& t : tables)
        if (t.n0 != out.n0 || t.n1 != out.n1)
            throw std::invalid_argument("gamma tables cover different ranges");

    for (int i = 0; i < nu; ++i) {
        double sw = 0, sd = 0, sw2 = 0, sd2 = 0;
        int cw = 0, cd = 0;
        for (const auto& t : tables) {
            if (t.validW[i]) {
                sw += t.gammaW[i];
                sw2 += t.gammaW[i] * t.gammaW[i];
                ++cw;
            }
            if (t.validDiff[i]) {
                sd += t.gammaDiff[i];
                sd2 += t.gammaDiff[i] * t.gammaDiff[i];
                ++cd;
            }
        }
        out.validW[i] = cw > 0;
        out.validDiff[i] = cd > 0;
        out.gammaW[i] = cw > 0 ? sw / cw : std::numeric_limits<double>::quiet_NaN();
        out.gammaDiff[i] = cd > 0 ? sd / cd : std::numeric_limits<double>::quiet_NaN();
        if (cw >= 2) out.seW[i] = std::sqrt(std::max(0.0, sw2 / cw - (sw / cw) * (sw / cw)) / cw);
        if (cd >= 2) out.seDiff[i] = std::sqrt(std::max(0.0, sd2 / cd - (sd / cd) * (sd / cd)) / cd);
    }
    out.samples = tables.front().samples * static_cast<long>(tables.size());
    return out;
}

}  // namespace knnscan
