#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace knnscan {

/// One multivariate observation with its global arrival position (1-based).
struct Observation {
    long index = 0;
    std::vector<double> values;
};

using Metric = std::function<double(std::span<const double>, std::span<const double>)>;

double euclideanDistance(std::span<const double> a, std::span<const double> b);
double manhattanDistance(std::span<const double> a, std::span<const double> b);

/// Resolves "euclidean" or "manhattan"; throws std::invalid_argument otherwise.
Metric metricByName(const std::string& name);

/// Sliding window of the L most recent observations with a maintained
/// pairwise distance matrix.
///
/// Pushing into a full window evicts the oldest entry and recomputes exactly
/// one row/column of the matrix (L-1 metric evaluations); all other distances
/// are reused. Entries are addressed by arrival position 0..size()-1
/// (0 = oldest).
class Window {
public:
    Window(int capacity, int dimension, Metric metric = euclideanDistance);

    /// Throws std::invalid_argument on dimension mismatch or non-finite values.
    void push(const Observation& y);

    int capacity() const { return capacity_; }
    int dimension() const { return dimension_; }
    int size() const { return count_; }
    bool full() const { return count_ == capacity_; }

    const Observation& at(int pos) const { return entries_[slotOf(pos)]; }
    long globalIndex(int pos) const { return entries_[slotOf(pos)].index; }
    long newestIndex() const { return count_ == 0 ? 0 : globalIndex(count_ - 1); }

    double distance(int posI, int posJ) const {
        return dist_[static_cast<std::size_t>(slotOf(posI)) * capacity_ + slotOf(posJ)];
    }

    /// Slot of an arrival position; exposes the ring layout so hot loops can
    /// read distance rows without per-element remapping.
    int slotOf(int pos) const { return full() ? (head_ + pos) % capacity_ : pos; }
    const double* distRowBySlot(int slot) const {
        return dist_.data() + static_cast<std::size_t>(slot) * capacity_;
    }

private:
    int capacity_;
    int dimension_;
    Metric metric_;
    std::vector<Observation> entries_;  // slot-indexed
    std::vector<double> dist_;          // capacity x capacity, slot-indexed
    int head_ = 0;                      // slot of the oldest entry once full
    int count_ = 0;
};

}  // namespace knnscan
