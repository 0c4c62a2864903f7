#include "knnscan/neighbor_graph.hpp"

#include <stdexcept>

namespace knnscan {

namespace {

// Selects the k+1 nearest candidates from one distance row, keeping a small
// insertion-sorted buffer ordered by (distance, position).
inline void selectNearest(const double* row, const int* slotOfPos, int L, int self,
                          int m, double* bestD, int* bestP) {
    int filled = 0;
    for (int j = 0; j < L; ++j) {
        if (j == self) continue;
        const double d = row[slotOfPos[j]];
        if (filled == m && d > bestD[m - 1]) continue;
        if (filled == m && d == bestD[m - 1] && j > bestP[m - 1]) continue;
        int pos = (filled < m) ? filled : m - 1;
        while (pos > 0 && (bestD[pos - 1] > d || (bestD[pos - 1] == d && bestP[pos - 1] > j))) {
            bestD[pos] = bestD[pos - 1];
            bestP[pos] = bestP[pos - 1];
            --pos;
        }
        bestD[pos] = d;
        bestP[pos] = j;
        if (filled < m) ++filled;
    }
}

}  // namespace

NeighborTable buildNeighborTable(const Window& window, int k) {
    if (!window.full()) throw std::invalid_argument("window not full");
    const int L = window.capacity();
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (L < k + 2) throw std::invalid_argument("L must be >= k+2");

    NeighborTable t;
    t.L = L;
    t.k = k;
    const int m = k + 1;
    t.ranks.resize(static_cast<std::size_t>(L) * m);
    t.inDegreeK.assign(L, 0);
    t.inDegreeExactKplus1.assign(L, 0);

    std::vector<int> slotOfPos(L);
    for (int p = 0; p < L; ++p) slotOfPos[p] = window.slotOf(p);

    std::vector<double> bestD(m);
    for (int i = 0; i < L; ++i) {
        const double* row = window.distRowBySlot(slotOfPos[i]);
        int* out = &t.ranks[static_cast<std::size_t>(i) * m];
        selectNearest(row, slotOfPos.data(), L, i, m, bestD.data(), out);
        for (int r = 0; r < k; ++r) ++t.inDegreeK[out[r]];
        ++t.inDegreeExactKplus1[out[k]];
    }

    // Adjacency over rank <= k edges, both orientations per directed edge.
    t.adjOffset.assign(L + 1, 0);
    for (int v = 0; v < L; ++v) t.adjOffset[v + 1] = k + t.inDegreeK[v];
    for (int v = 0; v < L; ++v) t.adjOffset[v + 1] += t.adjOffset[v];
    t.adj.resize(t.adjOffset[L]);
    std::vector<int> cursor(t.adjOffset.begin(), t.adjOffset.end() - 1);
    for (int i = 0; i < L; ++i) {
        for (int r = 0; r < k; ++r) {
            const int j = t.rank(i, r);
            t.adj[cursor[i]++] = j;
            t.adj[cursor[j]++] = i;
        }
    }
    return t;
}

GraphSummary summarize(const NeighborTable& t) {
    const int L = t.L;
    const int k = t.k;
    GraphSummary s;
    s.L = L;
    s.k = k;

    auto pointsTo = [&](int a, int b) {
        for (int r = 0; r < k; ++r)
            if (t.rank(a, r) == b) return true;
        return false;
    };

    long mutual = 0;
    long crossP = 0;
    long inDegSq = 0;
    long crossQ = 0;
    for (int i = 0; i < L; ++i) {
        for (int r = 0; r < k; ++r) {
            if (pointsTo(t.rank(i, r), i)) ++mutual;  // ordered pair (i, j)
        }
        // a^(r)_{ij} a^(k+1)_{ji}: i at exactly rank k+1 of j, j within first k of i
        const int j = t.rank(i, k);
        if (pointsTo(j, i)) ++crossP;
        const long d = t.inDegreeK[i];
        inDegSq += d * d;
        crossQ += d * t.inDegreeExactKplus1[i];
    }
    s.mutualPerNode = static_cast<double>(mutual) / L;
    s.inDegSqPerNode = static_cast<double>(inDegSq) / L;
    s.crossRankP = static_cast<double>(crossP) / L;
    s.crossRankQ = static_cast<double>(crossQ) / L;
    return s;
}

void NullGraphQuantities::update(const GraphSummary& s) {
    if (windowsSeen == 0) {
        L = s.L;
        k = s.k;
    } else if (L != s.L || k != s.k) {
        throw std::invalid_argument("summary L/k does not match aggregated quantities");
    }
    const double n = static_cast<double>(++windowsSeen);
    pK += (s.mutualPerNode - pK) / n;
    qK += ((s.inDegSqPerNode - s.k) - qK) / n;
    pKplus1 += (s.crossRankP - pKplus1) / n;
    qKplus1 += (s.crossRankQ - qKplus1) / n;
}

}  // namespace knnscan
