#include "pushgrasp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pushgrasp/parallel.hpp"

namespace pg {

ReactivePolicy::ReactivePolicy(Variant variant, const EnvConfig& env, const AgentConfig& cfg,
                               uint64_t seed)
    : variant_(variant),
      env_(env),
      cfg_(cfg),
      space_(ActionSpace::make(cfg.rotations, env.resolution)) {
    Rng seeder(seed);
    int channels = cfg.include_depth ? 4 : 3;
    grasp_net_ = FcnModel::make_default(channels, seeder.next_u64());
    grasp_opt_.match(std::as_const(grasp_net_).parameters());
    uint64_t push_seed = seeder.next_u64();
    if (variant_ == Variant::PushGrasp) {
        push_net_ = FcnModel::make_default(channels, push_seed);
        push_opt_.match(std::as_const(push_net_).parameters());
    }
}

Tensor ReactivePolicy::network_input(const HeightMap& state, int rotation) const {
    HeightMap rotated = rotate_heightmap(state, rotation, cfg_.rotations);
    return normalize_for_network(rotated, depth_stats_.mean(), depth_stats_.stddev(),
                                 cfg_.include_depth);
}

QMaps ReactivePolicy::predict(const HeightMap& state) {
    int k = cfg_.rotations;
    int h = env_.resolution;
    QMaps out;
    out.k = k;
    out.resolution = h;
    out.has_push = variant_ == Variant::PushGrasp;
    out.push = Tensor({k, h, h});
    out.grasp = Tensor({k, h, h});
    size_t plane = static_cast<size_t>(h) * h;
    parallel_for(k, cfg_.workers, [&](int r) {
        Tensor input = network_input(state, r);
        Tensor gm = grasp_net_.forward(input, NormMode::Infer);
        for (size_t i = 0; i < plane; ++i)
            out.grasp.data[r * plane + i] = 1.0 / (1.0 + std::exp(-gm.data[i]));
        if (out.has_push) {
            Tensor pm = push_net_.forward(input, NormMode::Infer);
            for (size_t i = 0; i < plane; ++i)
                out.push.data[r * plane + i] = 1.0 / (1.0 + std::exp(-pm.data[i]));
        }
    });
    return out;
}

void ReactivePolicy::observe_state(const HeightMap& state) { depth_stats_.observe(state); }

double ReactivePolicy::learn(const Transition& t, double lr) {
    bool is_grasp = t.action.primitive == Primitive::Grasp;
    if (!is_grasp && variant_ == Variant::GraspingOnly)
        throw std::runtime_error("grasping-only policy cannot train on a push");

    double label = is_grasp ? (t.grasp_success ? 1.0 : 0.0) : (t.change_detected ? 1.0 : 0.0);

    HeightMap before = render_heightmap(t.scene_before, env_.resolution);
    Tensor input = network_input(before, t.action.rotation);
    FcnModel& net = is_grasp ? grasp_net_ : push_net_;
    OptimizerState& opt = is_grasp ? grasp_opt_ : push_opt_;

    FcnModel::ForwardCache cache;
    Tensor out = net.forward(input, NormMode::Train, &cache);
    double z = out.at3(0, t.action.row, t.action.col);
    // Stable binary cross-entropy on the pre-sigmoid score.
    double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
    double p = 1.0 / (1.0 + std::exp(-z));
    double dz = p - label;
    if (!std::isfinite(loss) || !std::isfinite(dz)) throw std::runtime_error("non-finite loss");

    Tensor d_out(out.shape);
    d_out.at3(0, t.action.row, t.action.col) = dz;
    last_output_grad_nnz_ = 0;
    for (double v : d_out.data)
        if (v != 0.0) ++last_output_grad_nnz_;

    std::vector<Tensor> grads = net.backward(cache, d_out);
    std::vector<const Tensor*> grad_ptrs;
    grad_ptrs.reserve(grads.size());
    for (const auto& g : grads) grad_ptrs.push_back(&g);
    SgdConfig sgd{cfg_.learning_rate, cfg_.momentum, cfg_.weight_decay};
    auto params = net.parameters();
    sgd_momentum_step(params, grad_ptrs, opt, sgd, lr);
    return loss;
}

void ReactivePolicy::serialize(std::ostream& os) const {
    write_string(os, loop_rng_state_);
    write_u64(os, variant_ == Variant::GraspingOnly ? 0 : 1);
    grasp_net_.serialize(os);
    grasp_opt_.serialize(os);
    if (variant_ == Variant::PushGrasp) {
        push_net_.serialize(os);
        push_opt_.serialize(os);
    }
    depth_stats_.serialize(os);
}

void ReactivePolicy::deserialize(std::istream& is) {
    loop_rng_state_ = read_string(is);
    variant_ = read_u64(is) == 0 ? Variant::GraspingOnly : Variant::PushGrasp;
    grasp_net_.deserialize(is);
    grasp_opt_.deserialize(is);
    if (variant_ == Variant::PushGrasp) {
        push_net_.deserialize(is);
        push_opt_.deserialize(is);
    }
    depth_stats_.deserialize(is);
}

std::unique_ptr<Learner> make_learner(const std::string& kind, const EnvConfig& env,
                                      const AgentConfig& cfg, uint64_t seed) {
    if (kind == "vpg") return std::make_unique<VpgPolicy>(env, cfg, seed);
    if (kind == "grasping-only")
        return std::make_unique<ReactivePolicy>(ReactivePolicy::Variant::GraspingOnly, env, cfg,
                                                seed);
    if (kind == "pg-reactive")
        return std::make_unique<ReactivePolicy>(ReactivePolicy::Variant::PushGrasp, env, cfg,
                                                seed);
    throw std::invalid_argument("unknown learner kind: " + kind);
}

}  // namespace pg
