#pragma once

#include "pushgrasp/agent.hpp"

namespace pg {

/// Reactive affordance baselines: the same trunk trained with single-pixel
/// binary cross-entropy on immediate outcomes (grasp success, push change)
/// instead of TD targets. Affordances are sigmoid outputs in (0, 1).
class ReactivePolicy final : public Learner {
public:
    enum class Variant { GraspingOnly, PushGrasp };

    ReactivePolicy(Variant variant, const EnvConfig& env, const AgentConfig& cfg, uint64_t seed);

    QMaps predict(const HeightMap& state) override;
    double learn(const Transition& t, double lr) override;
    void observe_state(const HeightMap& state) override;

    std::string kind() const override {
        return variant_ == Variant::GraspingOnly ? "grasping-only" : "pg-reactive";
    }
    int rotations() const override { return cfg_.rotations; }
    const EnvConfig& env() const override { return env_; }
    const AgentConfig& config() const override { return cfg_; }
    const ActionSpace& action_space() const override { return space_; }

    void serialize(std::ostream& os) const override;
    void deserialize(std::istream& is) override;

    Variant variant() const { return variant_; }
    FcnModel& grasp_net() { return grasp_net_; }
    FcnModel& push_net() { return push_net_; }
    long last_output_grad_nonzeros() const { return last_output_grad_nnz_; }

private:
    Tensor network_input(const HeightMap& state, int rotation) const;

    Variant variant_;
    EnvConfig env_;
    AgentConfig cfg_;
    ActionSpace space_;
    FcnModel grasp_net_;
    FcnModel push_net_;  // unused for grasping-only
    OptimizerState grasp_opt_;
    OptimizerState push_opt_;
    DepthStats depth_stats_;
    long last_output_grad_nnz_ = 0;
};

}  // namespace pg
