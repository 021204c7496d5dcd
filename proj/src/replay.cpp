#include "pushgrasp/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pg {

size_t ReplayBuffer::add(Transition t) {
    items_.push_back(std::move(t));
    return items_.size() - 1;
}

size_t ReplayBuffer::valid_count() const {
    size_t n = 0;
    for (const auto& t : items_)
        if (!t.bad) ++n;
    return n;
}

size_t ReplayBuffer::sample(Rng& rng, double alpha) const {
    std::vector<size_t> order;
    order.reserve(items_.size());
    for (size_t i = 0; i < items_.size(); ++i)
        if (!items_[i].bad) order.push_back(i);
    if (order.empty()) throw std::runtime_error("replay sample from empty buffer");

    // Rank by |td_error| descending; ties resolve to the older entry.
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double da = std::abs(items_[a].td_error);
        double db = std::abs(items_[b].td_error);
        if (da != db) return da > db;
        return a < b;
    });

    std::vector<double> cum(order.size());
    double total = 0.0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        total += std::pow(static_cast<double>(rank + 1), -alpha);
        cum[rank] = total;
    }
    double u = rng.uniform() * total;
    size_t lo = 0, hi = order.size() - 1;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (cum[mid] > u)
            hi = mid;
        else
            lo = mid + 1;
    }
    return order[lo];
}

}  // namespace pg
