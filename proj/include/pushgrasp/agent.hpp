#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "pushgrasp/action.hpp"
#include "pushgrasp/net.hpp"
#include "pushgrasp/replay.hpp"

namespace pg {

struct EnvConfig {
    int n_objects = 10;
    double workspace_side = kDefaultWorkspaceSide;
    int resolution = 64;
    PushCommand push_proto;    // start/direction filled per action
    GraspCommand grasp_proto;  // center/angle filled per action
};

struct AgentConfig {
    double gamma = 0.5;
    double epsilon_start = 0.5;
    double epsilon_end = 0.1;
    long epsilon_anneal_steps = 2500;
    int rotations = 16;
    double tau = -1.0;  // < 0 selects default_change_threshold(resolution)
    double learning_rate = 1e-4;
    double test_learning_rate = 1e-5;
    double momentum = 0.9;
    double weight_decay = 0.03125;
    double replay_alpha = 1.0;
    bool push_reward = true;    // off reproduces the no-push-reward variant
    bool include_depth = true;  // off reproduces the color-only variant
    int target_lag = 1;         // gradient steps between target refreshes
    int no_change_limit = 10;   // test episodes stop past this many static actions
    int max_test_actions = 200;
    int workers = 1;

    double change_threshold(int resolution) const {
        return tau >= 0.0 ? tau : default_change_threshold(resolution);
    }
    double epsilon_at(long step) const {
        if (epsilon_anneal_steps <= 0) return epsilon_end;
        double f = std::min(1.0, static_cast<double>(step) / epsilon_anneal_steps);
        return epsilon_start + (epsilon_end - epsilon_start) * f;
    }
};

/// Grasps pay 1 on success; pushes pay 0.5 when they changed the scene (0
/// when push rewards are disabled).
double compute_reward(Primitive primitive, bool grasp_success, bool change_detected,
                      const AgentConfig& cfg);

/// y = R for terminal transitions, else R + gamma * max_q_next.
double td_target(double reward, double gamma, double max_q_next, bool terminal);

/// Common surface for the Q-learning agent and the reactive baselines: dense
/// per-pixel score maps for action selection plus a single-pixel update rule.
class Learner {
public:
    virtual ~Learner() = default;

    virtual QMaps predict(const HeightMap& state) = 0;
    /// One gradient update on this transition; returns the new priority
    /// (|td error| or supervision loss). Throws on numeric failure without
    /// touching the parameters.
    virtual double learn(const Transition& t, double lr) = 0;
    virtual void observe_state(const HeightMap& state) = 0;

    virtual std::string kind() const = 0;
    virtual int rotations() const = 0;
    virtual const EnvConfig& env() const = 0;
    virtual const AgentConfig& config() const = 0;
    virtual const ActionSpace& action_space() const = 0;

    virtual void serialize(std::ostream& os) const = 0;
    virtual void deserialize(std::istream& is) = 0;

    /// Training-loop RNG snapshot, carried inside checkpoints.
    void set_loop_rng_state(std::string state) { loop_rng_state_ = std::move(state); }
    const std::string& loop_rng_state() const { return loop_rng_state_; }

protected:
    std::string loop_rng_state_;
};

/// The joint pushing/grasping Q-learner: one network per primitive, trained
/// with single-pixel Huber updates against a lagged target copy.
class VpgPolicy final : public Learner {
public:
    VpgPolicy(const EnvConfig& env, const AgentConfig& cfg, uint64_t seed);

    QMaps predict(const HeightMap& state) override { return predict_q(state, false); }
    QMaps predict_q(const HeightMap& state, bool use_target);
    double learn(const Transition& t, double lr) override;
    void observe_state(const HeightMap& state) override;

    std::string kind() const override { return "vpg"; }
    int rotations() const override { return cfg_.rotations; }
    const EnvConfig& env() const override { return env_; }
    const AgentConfig& config() const override { return cfg_; }
    const ActionSpace& action_space() const override { return space_; }

    void serialize(std::ostream& os) const override;
    void deserialize(std::istream& is) override;

    FcnModel& push_net() { return push_net_; }
    FcnModel& grasp_net() { return grasp_net_; }
    const DepthStats& depth_stats() const { return depth_stats_; }
    long gradient_steps() const { return gradient_steps_; }

    /// Nonzero count of the output-layer gradient used by the last learn().
    long last_output_grad_nonzeros() const { return last_output_grad_nnz_; }
    Action last_trained_pixel() const { return last_trained_action_; }

    Tensor network_input(const HeightMap& state, int rotation) const;

private:
    EnvConfig env_;
    AgentConfig cfg_;
    ActionSpace space_;
    FcnModel push_net_;
    FcnModel grasp_net_;
    FcnModel target_push_;
    FcnModel target_grasp_;
    OptimizerState push_opt_;
    OptimizerState grasp_opt_;
    DepthStats depth_stats_;
    long gradient_steps_ = 0;
    long last_output_grad_nnz_ = 0;
    Action last_trained_action_;
};

struct StepRecord {
    long step{0};
    Primitive primitive{Primitive::Push};
    int rotation{0};
    int row{0};
    int col{0};
    double reward{0.0};
    double td_error{0.0};
    double epsilon{0.0};
    double grasp_rate_200{0.0};         // success rate over the last <=200 grasps
    double push_then_grasp_rate{0.0};   // pushes whose next action was a successful grasp
};

std::string step_record_csv_header();
std::string step_record_csv_row(const StepRecord& r);

using StepCallback = std::function<void(const StepRecord&, const Learner&)>;

struct TrainResult {
    std::vector<StepRecord> log;
    long episodes = 0;  // respawn cycles completed
};

/// Self-supervised loop: render, select epsilon-greedily, execute, reward,
/// store, one update on the new transition plus one prioritized replay
/// update; respawn when the workspace clears.
TrainResult run_training(Learner& learner, long steps, uint64_t seed,
                         const StepCallback& on_step = nullptr);

struct TraceEntry {
    Action action;
    double reward{0.0};
    bool change{false};
    bool grasp_success{false};
};

struct EpisodeResult {
    bool completed{false};
    int actions{0};
    int grasp_attempts{0};
    int grasp_successes{0};
    int objects_initial{0};
    int objects_expelled{0};
    std::vector<TraceEntry> trace;
};

/// Greedy evaluation episode with small test-time updates; the learner's
/// state is restored bit-exactly afterwards. Stops at completion, after
/// no_change_limit+1 consecutive static actions, or at max_test_actions.
EpisodeResult run_test(Learner& learner, const Scene& scene);

// ---- checkpoints ----

void save_learner(const Learner& learner, const std::string& path);
std::string serialize_learner(const Learner& learner);
std::unique_ptr<Learner> load_learner(const std::string& path);
std::unique_ptr<Learner> deserialize_learner(const std::string& bytes);
uint64_t learner_state_hash(const Learner& learner);

/// kind is "vpg", "grasping-only", or "pg-reactive".
std::unique_ptr<Learner> make_learner(const std::string& kind, const EnvConfig& env,
                                      const AgentConfig& cfg, uint64_t seed);

}  // namespace pg
