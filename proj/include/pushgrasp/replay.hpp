#pragma once

#include <vector>

#include "pushgrasp/action.hpp"
#include "pushgrasp/rng.hpp"
#include "pushgrasp/sim.hpp"

namespace pg {

/// One experience record. States are stored as scenes; heightmaps are
/// re-rendered deterministically on replay.
struct Transition {
    Scene scene_before;
    Scene scene_after;
    Action action;
    double reward{0.0};
    bool grasp_success{false};
    bool change_detected{false};
    bool terminal{false};  // the action cleared the workspace
    double td_error{0.0};  // priority; recomputed whenever the transition is replayed
    long step_index{0};
    bool bad{false};  // tripped a numeric error; excluded from sampling
};

/// Unbounded buffer with stochastic rank-based prioritization: entries are
/// ranked by |td_error| descending and sampled with probability
/// proportional to rank^(-alpha).
class ReplayBuffer {
public:
    size_t add(Transition t);
    size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    Transition& operator[](size_t i) { return items_[i]; }
    const Transition& operator[](size_t i) const { return items_[i]; }

    void set_priority(size_t i, double abs_delta) { items_[i].td_error = abs_delta; }
    void mark_bad(size_t i) { items_[i].bad = true; }
    size_t valid_count() const;

    /// Throws std::runtime_error when no sampleable entry exists.
    size_t sample(Rng& rng, double alpha) const;

private:
    std::vector<Transition> items_;
};

}  // namespace pg
