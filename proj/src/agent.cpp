#include "pushgrasp/agent.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pushgrasp/parallel.hpp"

namespace pg {

double compute_reward(Primitive primitive, bool grasp_success, bool change_detected,
                      const AgentConfig& cfg) {
    if (primitive == Primitive::Grasp) return grasp_success ? 1.0 : 0.0;
    if (change_detected && cfg.push_reward) return 0.5;
    return 0.0;
}

double td_target(double reward, double gamma, double max_q_next, bool terminal) {
    return terminal ? reward : reward + gamma * max_q_next;
}

// ---- VpgPolicy ----

VpgPolicy::VpgPolicy(const EnvConfig& env, const AgentConfig& cfg, uint64_t seed)
    : env_(env), cfg_(cfg), space_(ActionSpace::make(cfg.rotations, env.resolution)) {
    Rng seeder(seed);
    int channels = cfg.include_depth ? 4 : 3;
    push_net_ = FcnModel::make_default(channels, seeder.next_u64());
    grasp_net_ = FcnModel::make_default(channels, seeder.next_u64());
    target_push_.copy_state_from(push_net_);
    target_grasp_.copy_state_from(grasp_net_);
    push_opt_.match(std::as_const(push_net_).parameters());
    grasp_opt_.match(std::as_const(grasp_net_).parameters());
}

Tensor VpgPolicy::network_input(const HeightMap& state, int rotation) const {
    HeightMap rotated = rotate_heightmap(state, rotation, cfg_.rotations);
    return normalize_for_network(rotated, depth_stats_.mean(), depth_stats_.stddev(),
                                 cfg_.include_depth);
}

QMaps VpgPolicy::predict_q(const HeightMap& state, bool use_target) {
    int k = cfg_.rotations;
    int h = env_.resolution;
    QMaps out;
    out.k = k;
    out.resolution = h;
    out.has_push = true;
    out.push = Tensor({k, h, h});
    out.grasp = Tensor({k, h, h});
    FcnModel& pnet = use_target ? target_push_ : push_net_;
    FcnModel& gnet = use_target ? target_grasp_ : grasp_net_;
    size_t plane = static_cast<size_t>(h) * h;
    parallel_for(k, cfg_.workers, [&](int r) {
        Tensor input = network_input(state, r);
        Tensor pm = pnet.forward(input, NormMode::Infer);
        Tensor gm = gnet.forward(input, NormMode::Infer);
        std::copy(pm.data.begin(), pm.data.end(), out.push.data.begin() + r * plane);
        std::copy(gm.data.begin(), gm.data.end(), out.grasp.data.begin() + r * plane);
    });
    return out;
}

void VpgPolicy::observe_state(const HeightMap& state) { depth_stats_.observe(state); }

double VpgPolicy::learn(const Transition& t, double lr) {
    if (cfg_.target_lag > 0 && gradient_steps_ % cfg_.target_lag == 0) {
        target_push_.copy_state_from(push_net_);
        target_grasp_.copy_state_from(grasp_net_);
    }

    double y;
    if (t.terminal) {
        y = t.reward;
    } else {
        HeightMap after = render_heightmap(t.scene_after, env_.resolution);
        QMaps next = predict_q(after, true);
        y = td_target(t.reward, cfg_.gamma, max_q_value(next, space_), false);
    }

    HeightMap before = render_heightmap(t.scene_before, env_.resolution);
    Tensor input = network_input(before, t.action.rotation);
    bool is_grasp = t.action.primitive == Primitive::Grasp;
    FcnModel& net = is_grasp ? grasp_net_ : push_net_;
    OptimizerState& opt = is_grasp ? grasp_opt_ : push_opt_;

    FcnModel::ForwardCache cache;
    Tensor out = net.forward(input, NormMode::Train, &cache);
    double q = out.at3(0, t.action.row, t.action.col);
    double dq;
    huber(q, y, &dq);
    if (!std::isfinite(dq) || !std::isfinite(y)) throw std::runtime_error("non-finite loss");

    // Gradients flow through the executed pixel only.
    Tensor d_out(out.shape);
    d_out.at3(0, t.action.row, t.action.col) = dq;
    last_output_grad_nnz_ = 0;
    for (double v : d_out.data)
        if (v != 0.0) ++last_output_grad_nnz_;
    last_trained_action_ = t.action;

    std::vector<Tensor> grads = net.backward(cache, d_out);
    std::vector<const Tensor*> grad_ptrs;
    grad_ptrs.reserve(grads.size());
    for (const auto& g : grads) grad_ptrs.push_back(&g);
    SgdConfig sgd{cfg_.learning_rate, cfg_.momentum, cfg_.weight_decay};
    auto params = net.parameters();
    sgd_momentum_step(params, grad_ptrs, opt, sgd, lr);
    ++gradient_steps_;
    return std::abs(q - y);
}

void VpgPolicy::serialize(std::ostream& os) const {
    write_string(os, loop_rng_state_);
    push_net_.serialize(os);
    grasp_net_.serialize(os);
    target_push_.serialize(os);
    target_grasp_.serialize(os);
    push_opt_.serialize(os);
    grasp_opt_.serialize(os);
    depth_stats_.serialize(os);
    write_u64(os, static_cast<uint64_t>(gradient_steps_));
}

void VpgPolicy::deserialize(std::istream& is) {
    loop_rng_state_ = read_string(is);
    push_net_.deserialize(is);
    grasp_net_.deserialize(is);
    target_push_.deserialize(is);
    target_grasp_.deserialize(is);
    push_opt_.deserialize(is);
    grasp_opt_.deserialize(is);
    depth_stats_.deserialize(is);
    gradient_steps_ = static_cast<long>(read_u64(is));
}

// ---- training loop ----

std::string step_record_csv_header() {
    return "step,primitive,rotation,pixel_row,pixel_col,reward,td_error,epsilon,"
           "grasp_rate_200,push_then_grasp_rate";
}

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double window_rate(const std::deque<char>& window) {
    if (window.empty()) return 0.0;
    double s = 0.0;
    for (char v : window) s += v;
    return s / static_cast<double>(window.size());
}

void push_window(std::deque<char>& window, bool value) {
    window.push_back(value ? 1 : 0);
    if (window.size() > 200) window.pop_front();
}

struct Executed {
    StepOutcome outcome;
    bool change = false;
};

Executed execute_action(const Learner& learner, const Scene& scene, const HeightMap& state,
                        const Action& action) {
    const EnvConfig& env = learner.env();
    int k = learner.rotations();
    Executed ex;
    if (action.primitive == Primitive::Push) {
        PushCommand cmd = action_to_push(action, state, k, env.push_proto);
        ex.outcome = step_push(scene, cmd);
    } else {
        GraspCommand cmd = action_to_grasp(action, state, k, env.grasp_proto);
        ex.outcome = step_grasp(scene, cmd);
    }
    return ex;
}

}  // namespace

std::string step_record_csv_row(const StepRecord& r) {
    std::ostringstream os;
    os << r.step << "," << (r.primitive == Primitive::Push ? "push" : "grasp") << ","
       << r.rotation << "," << r.row << "," << r.col << "," << fmt_g(r.reward) << ","
       << fmt_g(r.td_error) << "," << fmt_g(r.epsilon) << "," << fmt_g(r.grasp_rate_200) << ","
       << fmt_g(r.push_then_grasp_rate);
    return os.str();
}

TrainResult run_training(Learner& learner, long steps, uint64_t seed,
                         const StepCallback& on_step) {
    const EnvConfig& env = learner.env();
    const AgentConfig& cfg = learner.config();
    double tau = cfg.change_threshold(env.resolution);

    TrainResult result;
    Rng rng(seed);
    ReplayBuffer buffer;

    Scene scene = spawn_random(env.n_objects, default_palette(), rng.next_u64(),
                               env.workspace_side);
    HeightMap state = render_heightmap(scene, env.resolution);

    std::deque<char> grasp_window;
    std::deque<char> push_follow_window;
    bool last_was_push = false;

    for (long step = 0; step < steps; ++step) {
        learner.observe_state(state);  // each state feeds the depth stats once
        double epsilon = cfg.epsilon_at(step);
        QMaps maps = learner.predict(state);
        Action action = select_action(maps, epsilon, rng, learner.action_space());

        Executed ex = execute_action(learner, scene, state, action);
        HeightMap next_state = render_heightmap(ex.outcome.scene_after, env.resolution);
        ex.change = detect_change(state, next_state, tau);

        double reward = compute_reward(action.primitive, ex.outcome.grasp_success, ex.change, cfg);
        bool terminal = is_cleared(ex.outcome.scene_after);

        Transition t;
        t.scene_before = scene;
        t.scene_after = ex.outcome.scene_after;
        t.action = action;
        t.reward = reward;
        t.grasp_success = ex.outcome.grasp_success;
        t.change_detected = ex.change;
        t.terminal = terminal;
        t.step_index = step;
        size_t idx = buffer.add(std::move(t));

        double delta = 0.0;
        try {
            delta = learner.learn(buffer[idx], cfg.learning_rate);
            buffer.set_priority(idx, delta);
        } catch (const std::runtime_error&) {
            buffer.mark_bad(idx);
        }

        // One prioritized replay iteration per step.
        if (buffer.valid_count() > 0) {
            size_t ridx = buffer.sample(rng, cfg.replay_alpha);
            try {
                buffer.set_priority(ridx, learner.learn(buffer[ridx], cfg.learning_rate));
            } catch (const std::runtime_error&) {
                buffer.mark_bad(ridx);
            }
        }

        if (last_was_push)
            push_window(push_follow_window,
                        action.primitive == Primitive::Grasp && ex.outcome.grasp_success);
        if (action.primitive == Primitive::Grasp)
            push_window(grasp_window, ex.outcome.grasp_success);
        last_was_push = action.primitive == Primitive::Push;

        StepRecord record;
        record.step = step;
        record.primitive = action.primitive;
        record.rotation = action.rotation;
        record.row = action.row;
        record.col = action.col;
        record.reward = reward;
        record.td_error = delta;
        record.epsilon = epsilon;
        record.grasp_rate_200 = window_rate(grasp_window);
        record.push_then_grasp_rate = window_rate(push_follow_window);
        result.log.push_back(record);
        if (on_step) {
            learner.set_loop_rng_state(rng.serialize());
            on_step(record, learner);
        }

        if (terminal) {
            scene = spawn_random(env.n_objects, default_palette(), rng.next_u64(),
                                 env.workspace_side);
            state = render_heightmap(scene, env.resolution);
            ++result.episodes;
        } else {
            scene = ex.outcome.scene_after;
            state = next_state;
        }
    }
    return result;
}

EpisodeResult run_test(Learner& learner, const Scene& scene) {
    const EnvConfig& env = learner.env();
    const AgentConfig& cfg = learner.config();
    double tau = cfg.change_threshold(env.resolution);

    std::ostringstream snapshot_os;
    learner.serialize(snapshot_os);
    std::string snapshot = snapshot_os.str();

    EpisodeResult res;
    res.objects_initial = object_count(scene);

    Scene cur = scene;
    HeightMap state = render_heightmap(cur, env.resolution);
    Rng greedy_rng(0);  // untouched at epsilon = 0
    int streak = 0;

    for (int i = 0; i < cfg.max_test_actions; ++i) {
        if (is_cleared(cur)) break;
        QMaps maps = learner.predict(state);
        Action action = select_action(maps, 0.0, greedy_rng, learner.action_space());
        Executed ex = execute_action(learner, cur, state, action);
        HeightMap next_state = render_heightmap(ex.outcome.scene_after, env.resolution);
        ex.change = detect_change(state, next_state, tau);
        double reward = compute_reward(action.primitive, ex.outcome.grasp_success, ex.change, cfg);

        Transition t;
        t.scene_before = cur;
        t.scene_after = ex.outcome.scene_after;
        t.action = action;
        t.reward = reward;
        t.grasp_success = ex.outcome.grasp_success;
        t.change_detected = ex.change;
        t.terminal = is_cleared(ex.outcome.scene_after);
        t.step_index = i;
        try {
            learner.learn(t, cfg.test_learning_rate);  // keeps greedy loops from freezing
        } catch (const std::runtime_error&) {
        }

        ++res.actions;
        if (action.primitive == Primitive::Grasp) {
            ++res.grasp_attempts;
            if (ex.outcome.grasp_success) ++res.grasp_successes;
        }
        res.objects_expelled += ex.outcome.objects_expelled;
        res.trace.push_back({action, reward, ex.change, ex.outcome.grasp_success});

        streak = ex.change ? 0 : streak + 1;
        cur = ex.outcome.scene_after;
        state = next_state;
        if (streak > cfg.no_change_limit) break;
    }

    res.completed = is_cleared(cur) && res.grasp_successes == res.objects_initial;

    std::istringstream snapshot_is(snapshot);
    learner.deserialize(snapshot_is);
    return res;
}

// ---- checkpoints ----

namespace {

constexpr char kCheckpointMagic[] = "PGCKPT1";

void write_env(std::ostream& os, const EnvConfig& env) {
    write_u64(os, static_cast<uint64_t>(env.n_objects));
    write_f64(os, env.workspace_side);
    write_u64(os, static_cast<uint64_t>(env.resolution));
    write_f64(os, env.push_proto.push_length);
    write_f64(os, env.push_proto.pusher_radius);
    write_f64(os, env.grasp_proto.max_opening);
    write_f64(os, env.grasp_proto.min_closure);
    write_f64(os, env.grasp_proto.jaw_width);
    write_f64(os, env.grasp_proto.jaw_thickness);
    write_f64(os, env.grasp_proto.normal_tolerance);
}

EnvConfig read_env(std::istream& is) {
    EnvConfig env;
    env.n_objects = static_cast<int>(read_u64(is));
    env.workspace_side = read_f64(is);
    env.resolution = static_cast<int>(read_u64(is));
    env.push_proto.push_length = read_f64(is);
    env.push_proto.pusher_radius = read_f64(is);
    env.grasp_proto.max_opening = read_f64(is);
    env.grasp_proto.min_closure = read_f64(is);
    env.grasp_proto.jaw_width = read_f64(is);
    env.grasp_proto.jaw_thickness = read_f64(is);
    env.grasp_proto.normal_tolerance = read_f64(is);
    return env;
}

void write_agent_cfg(std::ostream& os, const AgentConfig& cfg) {
    write_f64(os, cfg.gamma);
    write_f64(os, cfg.epsilon_start);
    write_f64(os, cfg.epsilon_end);
    write_u64(os, static_cast<uint64_t>(cfg.epsilon_anneal_steps));
    write_u64(os, static_cast<uint64_t>(cfg.rotations));
    write_f64(os, cfg.tau);
    write_f64(os, cfg.learning_rate);
    write_f64(os, cfg.test_learning_rate);
    write_f64(os, cfg.momentum);
    write_f64(os, cfg.weight_decay);
    write_f64(os, cfg.replay_alpha);
    write_u64(os, cfg.push_reward ? 1 : 0);
    write_u64(os, cfg.include_depth ? 1 : 0);
    write_u64(os, static_cast<uint64_t>(cfg.target_lag));
    write_u64(os, static_cast<uint64_t>(cfg.no_change_limit));
    write_u64(os, static_cast<uint64_t>(cfg.max_test_actions));
}

AgentConfig read_agent_cfg(std::istream& is) {
    AgentConfig cfg;
    cfg.gamma = read_f64(is);
    cfg.epsilon_start = read_f64(is);
    cfg.epsilon_end = read_f64(is);
    cfg.epsilon_anneal_steps = static_cast<long>(read_u64(is));
    cfg.rotations = static_cast<int>(read_u64(is));
    cfg.tau = read_f64(is);
    cfg.learning_rate = read_f64(is);
    cfg.test_learning_rate = read_f64(is);
    cfg.momentum = read_f64(is);
    cfg.weight_decay = read_f64(is);
    cfg.replay_alpha = read_f64(is);
    cfg.push_reward = read_u64(is) != 0;
    cfg.include_depth = read_u64(is) != 0;
    cfg.target_lag = static_cast<int>(read_u64(is));
    cfg.no_change_limit = static_cast<int>(read_u64(is));
    cfg.max_test_actions = static_cast<int>(read_u64(is));
    return cfg;
}

}  // namespace

std::string serialize_learner(const Learner& learner) {
    std::ostringstream os;
    write_string(os, kCheckpointMagic);
    write_string(os, learner.kind());
    write_env(os, learner.env());
    write_agent_cfg(os, learner.config());
    learner.serialize(os);
    return os.str();
}

void save_learner(const Learner& learner, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    std::string bytes = serialize_learner(learner);
    os.write(bytes.data(), static_cast<long>(bytes.size()));
}

std::unique_ptr<Learner> deserialize_learner(const std::string& bytes) {
    std::istringstream is(bytes);
    if (read_string(is) != kCheckpointMagic)
        throw std::runtime_error("not a pushgrasp checkpoint");
    std::string kind = read_string(is);
    EnvConfig env = read_env(is);
    AgentConfig cfg = read_agent_cfg(is);
    auto learner = make_learner(kind, env, cfg, 0);
    learner->deserialize(is);
    return learner;
}

std::unique_ptr<Learner> load_learner(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read checkpoint: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return deserialize_learner(buf.str());
}

uint64_t learner_state_hash(const Learner& learner) {
    std::string bytes = serialize_learner(learner);
    return fnv1a(bytes.data(), bytes.size());
}

}  // namespace pg
