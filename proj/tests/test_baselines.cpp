#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pushgrasp/baselines.hpp"
#include "pushgrasp/eval.hpp"

using namespace pg;

namespace {

EnvConfig small_env(int n = 2) {
    EnvConfig env;
    env.n_objects = n;
    env.resolution = 32;
    return env;
}

AgentConfig reactive_cfg() {
    AgentConfig cfg;
    cfg.rotations = 4;
    cfg.epsilon_start = 0.75;
    cfg.epsilon_end = 0.25;
    cfg.epsilon_anneal_steps = 50;
    return cfg;
}

}  // namespace

TEST_CASE("grasping-only policy only ever grasps") {
    EnvConfig env = small_env();
    AgentConfig cfg = reactive_cfg();
    ReactivePolicy policy(ReactivePolicy::Variant::GraspingOnly, env, cfg, 3);

    Scene s = spawn_random(2, default_palette(), 4);
    HeightMap map = render_heightmap(s, env.resolution);
    QMaps maps = policy.predict(map);
    CHECK_FALSE(maps.has_push);

    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Action a = select_action(maps, i % 2 == 0 ? 0.0 : 1.0, rng, policy.action_space());
        CHECK(a.primitive == Primitive::Grasp);
    }

    TrainResult result = run_training(policy, 30, 6);
    for (const auto& rec : result.log) CHECK(rec.primitive == Primitive::Grasp);
}

TEST_CASE("affordances live strictly inside (0,1)") {
    EnvConfig env = small_env();
    AgentConfig cfg = reactive_cfg();
    ReactivePolicy policy(ReactivePolicy::Variant::PushGrasp, env, cfg, 9);
    Scene s = spawn_random(3, default_palette(), 10);
    QMaps maps = policy.predict(render_heightmap(s, env.resolution));
    for (double v : maps.push.data) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    for (double v : maps.grasp.data) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("reactive selection shares the agent tie-break") {
    QMaps maps;
    maps.k = 2;
    maps.resolution = 8;
    maps.has_push = true;
    maps.push = Tensor({2, 8, 8});
    maps.grasp = Tensor({2, 8, 8});
    maps.push.at3(0, 3, 3) = 0.9;
    maps.grasp.at3(0, 3, 3) = 0.9;
    ActionSpace space = ActionSpace::make(2, 8);
    Rng rng(1);
    Action a = select_action(maps, 0.0, rng, space);
    CHECK(a.primitive == Primitive::Push);
}

TEST_CASE("binary cross-entropy at the executed pixel") {
    EnvConfig env = small_env();
    AgentConfig cfg = reactive_cfg();
    ReactivePolicy policy(ReactivePolicy::Variant::PushGrasp, env, cfg, 12);

    Scene before = spawn_random(2, default_palette(), 13);
    Transition t;
    t.scene_before = before;
    t.scene_after = before;
    t.action = {Primitive::Grasp, 1, 5, 6};
    t.grasp_success = true;

    SUBCASE("fresh networks sit near ln 2 loss") {
        // A freshly initialized head scores near zero, so p is near 0.5 and
        // the cross-entropy of either label is near ln 2.
        double loss = policy.learn(t, 0.0);  // zero rate: measure without moving
        CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(0.2));
        CHECK(policy.last_output_grad_nonzeros() == 1);
    }
    SUBCASE("repeated supervision drives the loss toward zero") {
        double first = policy.learn(t, 1e-2);
        double last = first;
        for (int i = 0; i < 60; ++i) last = policy.learn(t, 1e-2);
        CHECK(last < 0.2);
        CHECK(last < first);
    }
    SUBCASE("a grasp update leaves the push net bit-untouched") {
        std::ostringstream before_push;
        policy.push_net().serialize(before_push);
        policy.learn(t, 1e-3);
        std::ostringstream after_push;
        policy.push_net().serialize(after_push);
        CHECK(before_push.str() == after_push.str());
    }
    SUBCASE("grasping-only rejects push transitions") {
        ReactivePolicy go(ReactivePolicy::Variant::GraspingOnly, env, cfg, 1);
        Transition push_t = t;
        push_t.action.primitive = Primitive::Push;
        CHECK_THROWS_AS(go.learn(push_t, 1e-3), std::runtime_error);
    }
}

TEST_CASE("push labels come from change detection") {
    EnvConfig env = small_env();
    AgentConfig cfg = reactive_cfg();
    ReactivePolicy policy(ReactivePolicy::Variant::PushGrasp, env, cfg, 21);

    Scene before = spawn_random(2, default_palette(), 22);
    Transition t;
    t.scene_before = before;
    t.scene_after = before;
    t.action = {Primitive::Push, 0, 9, 9};
    t.change_detected = true;
    // Supervise toward 1 with a large rate, then the same pixel should read
    // a higher affordance than an untouched clone.
    ReactivePolicy clone(ReactivePolicy::Variant::PushGrasp, env, cfg, 21);
    for (int i = 0; i < 30; ++i) policy.learn(t, 1e-2);
    HeightMap map = render_heightmap(before, env.resolution);
    double trained = policy.predict(map).push.at3(0, 9, 9);
    double fresh = clone.predict(map).push.at3(0, 9, 9);
    CHECK(trained > fresh);
}

TEST_CASE("reactive checkpoints round-trip") {
    EnvConfig env = small_env();
    AgentConfig cfg = reactive_cfg();
    ReactivePolicy policy(ReactivePolicy::Variant::PushGrasp, env, cfg, 31);
    run_training(policy, 20, 31);

    std::string bytes = serialize_learner(policy);
    auto loaded = deserialize_learner(bytes);
    CHECK(loaded->kind() == "pg-reactive");
    CHECK(serialize_learner(*loaded) == bytes);

    auto go = make_learner("grasping-only", env, cfg, 1);
    std::string go_bytes = serialize_learner(*go);
    CHECK(deserialize_learner(go_bytes)->kind() == "grasping-only");
}

TEST_CASE("grasping-only grasp success equals action efficiency on every report") {
    EnvConfig env = small_env(1);
    AgentConfig cfg = reactive_cfg();
    ReactivePolicy policy(ReactivePolicy::Variant::GraspingOnly, env, cfg, 41);
    run_training(policy, 60, 41);

    std::vector<Scenario> suite;
    Rng rng(42);
    for (int i = 0; i < 3; ++i)
        suite.push_back({"rand_" + std::to_string(i),
                         spawn_random(1, default_palette(), rng.next_u64())});
    BenchmarkOptions options;
    options.n_runs = 4;
    options.seed = 7;
    BenchmarkReport report = run_benchmark(policy, suite, options);
    for (const auto& row : report.per_scenario) {
        if (std::isnan(row.grasp_success_pct)) {
            CHECK(std::isnan(row.action_efficiency_pct));
        } else {
            CHECK(row.grasp_success_pct == row.action_efficiency_pct);
        }
    }
    if (!std::isnan(report.aggregate.grasp_success_pct))
        CHECK(report.aggregate.grasp_success_pct == report.aggregate.action_efficiency_pct);
}
