#include "knnscan/window.hpp"

#include <cmath>
#include <stdexcept>

namespace knnscan {

double euclideanDistance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double manhattanDistance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

Metric metricByName(const std::string& name) {
    if (name == "euclidean") return euclideanDistance;
    if (name == "manhattan") return manhattanDistance;
    throw std::invalid_argument("unknown metric: " + name);
}

Window::Window(int capacity, int dimension, Metric metric)
    : capacity_(capacity), dimension_(dimension), metric_(std::move(metric)) {
    if (capacity_ < 2) throw std::invalid_argument("window capacity must be >= 2");
    if (dimension_ < 1) throw std::invalid_argument("dimension must be >= 1");
    entries_.resize(capacity_);
    dist_.assign(static_cast<std::size_t>(capacity_) * capacity_, 0.0);
}

void Window::push(const Observation& y) {
    if (static_cast<int>(y.values.size()) != dimension_)
        throw std::invalid_argument("observation dimension mismatch");
    for (double v : y.values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in observation");

    int slot;
    if (count_ < capacity_) {
        slot = count_;
        ++count_;
    } else {
        slot = head_;
        head_ = (head_ + 1) % capacity_;
    }
    entries_[slot] = y;

    const std::span<const double> yv(entries_[slot].values);
    for (int s = 0; s < count_; ++s) {
        if (s == slot) continue;
        const double d = metric_(yv, std::span<const double>(entries_[s].values));
        dist_[static_cast<std::size_t>(slot) * capacity_ + s] = d;
        dist_[static_cast<std::size_t>(s) * capacity_ + slot] = d;
    }
    dist_[static_cast<std::size_t>(slot) * capacity_ + slot] = 0.0;
}

}  // namespace knnscan
