#pragma once

#include <vector>

#include "knnscan/window.hpp"

namespace knnscan {

/// Ranked nearest neighbors of every window entry up to rank k+1, with the
/// derived in-degree vectors. Nodes are arrival positions 0..L-1.
///
/// Ties are broken by the smaller arrival position, so rank lists are
/// deterministic and reproducible.
struct NeighborTable {
    int L = 0;
    int k = 0;
    std::vector<int> ranks;                 // L x (k+1), row-major
    std::vector<int> inDegreeK;             // d_i: nodes listing i within their first k
    std::vector<int> inDegreeExactKplus1;   // m_i: nodes listing i at exactly rank k+1

    // Directed edge (i -> j, rank <= k) endpoints; both orientations flattened:
    // adj[adjOffset[v]..adjOffset[v+1]) holds the other endpoint of every
    // directed edge incident to v (a node appears twice for a mutual pair).
    std::vector<int> adj;
    std::vector<int> adjOffset;

    int rank(int i, int r) const { return ranks[static_cast<std::size_t>(i) * (k + 1) + r]; }
};

/// Requires a full window and L >= k+2; throws std::invalid_argument otherwise.
NeighborTable buildNeighborTable(const Window& window, int k);

/// The scalar graph functionals feeding every permutation-null moment.
struct GraphSummary {
    int L = 0;
    int k = 0;
    double mutualPerNode = 0;    // (1/L) sum_{i,j} a+_{ij} a+_{ji}
    double inDegSqPerNode = 0;   // (1/L) sum_i d_i^2  (unrestricted triple sum)
    double crossRankP = 0;       // (1/L) sum_{r<=k} sum_{i,j} a^(r)_{ij} a^(k+1)_{ji}
    double crossRankQ = 0;       // (1/L) sum_i d_i m_i
};

GraphSummary summarize(const NeighborTable& table);

/// Running estimates of the graph quantities p_k, q_k and their rank-(k+1)
/// cross terms, averaged over every summary seen while monitoring is quiet.
struct NullGraphQuantities {
    int L = 0;
    int k = 0;
    double pK = 0;        // mean mutualPerNode
    double qK = 0;        // mean (inDegSqPerNode - k), the j != l correction
    double pKplus1 = 0;   // mean crossRankP
    double qKplus1 = 0;   // mean crossRankQ
    long windowsSeen = 0;

    /// Throws on L/k mismatch.
    void update(const GraphSummary& s);
};

}  // namespace knnscan
