#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pushgrasp/config.hpp"
#include "pushgrasp/eval.hpp"

namespace py = pybind11;
using namespace pg;

namespace {

py::array_t<double> height_array(const HeightMap& map) {
    int n = map.resolution;
    py::array_t<double> out({n, n});
    std::copy(map.height.begin(), map.height.end(), out.mutable_data());
    return out;
}

py::array_t<double> color_array(const HeightMap& map) {
    int n = map.resolution;
    py::array_t<double> out({n, n, 3});
    std::copy(map.color.begin(), map.color.end(), out.mutable_data());
    return out;
}

py::array_t<double> qmaps_array(const QMaps& maps) {
    int k = maps.k, h = maps.resolution;
    py::array_t<double> out({2, k, h, h});
    double* p = out.mutable_data();
    std::copy(maps.push.data.begin(), maps.push.data.end(), p);
    std::copy(maps.grasp.data.begin(), maps.grasp.data.end(), p + maps.push.data.size());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tabletop pushing-and-grasping simulator and learner";

    py::enum_<Primitive>(m, "Primitive")
        .value("PUSH", Primitive::Push)
        .value("GRASP", Primitive::Grasp);

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("__repr__", [](const Vec2& v) {
            return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
        });

    py::class_<Pose2>(m, "Pose2")
        .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("theta"))
        .def_readonly("x", &Pose2::x)
        .def_readonly("y", &Pose2::y)
        .def_readonly("theta", &Pose2::theta);

    py::class_<Scene>(m, "Scene")
        .def_readonly("workspace_side", &Scene::workspace_side)
        .def("object_count", [](const Scene& s) { return object_count(s); })
        .def("is_cleared", [](const Scene& s) { return is_cleared(s); })
        .def("object_names",
             [](const Scene& s) {
                 std::vector<std::string> names;
                 for (const auto& obj : s.objects) names.push_back(obj.spec.name);
                 return names;
             })
        .def("save", [](const Scene& s) { return save_scenario(s); })
        .def_static("load", [](const std::string& text) { return load_scenario(text); })
        .def("__repr__", [](const Scene& s) {
            return "Scene(" + std::to_string(s.objects.size()) + " objects)";
        });

    m.def("spawn_random", &spawn_random, py::arg("n"), py::arg("palette"), py::arg("seed"),
          py::arg("workspace_side") = kDefaultWorkspaceSide,
          "Drop n random non-overlapping palette objects.");
    m.def("default_palette", &default_palette, py::return_value_policy::reference);

    py::class_<ObjectSpec>(m, "ObjectSpec")
        .def_readonly("name", &ObjectSpec::name)
        .def_readonly("height", &ObjectSpec::height)
        .def_readonly("color_id", &ObjectSpec::color_id);

    py::class_<PushCommand>(m, "PushCommand")
        .def(py::init([](double x, double y, int direction_index, int num_directions,
                         double push_length, double pusher_radius) {
                 PushCommand cmd;
                 cmd.start = {x, y};
                 cmd.direction_index = direction_index;
                 cmd.num_directions = num_directions;
                 cmd.push_length = push_length;
                 cmd.pusher_radius = pusher_radius;
                 return cmd;
             }),
             py::arg("x"), py::arg("y"), py::arg("direction_index"),
             py::arg("num_directions") = 16, py::arg("push_length") = 0.10,
             py::arg("pusher_radius") = 0.01);

    py::class_<GraspCommand>(m, "GraspCommand")
        .def(py::init([](double x, double y, int angle_index, int num_angles, double max_opening,
                         double min_closure) {
                 GraspCommand cmd;
                 cmd.center = {x, y};
                 cmd.angle_index = angle_index;
                 cmd.num_angles = num_angles;
                 cmd.max_opening = max_opening;
                 cmd.min_closure = min_closure;
                 return cmd;
             }),
             py::arg("x"), py::arg("y"), py::arg("angle_index"), py::arg("num_angles") = 16,
             py::arg("max_opening") = 0.07, py::arg("min_closure") = 0.002);

    py::class_<StepOutcome>(m, "StepOutcome")
        .def_readonly("scene_after", &StepOutcome::scene_after)
        .def_readonly("grasp_success", &StepOutcome::grasp_success)
        .def_readonly("objects_removed", &StepOutcome::objects_removed)
        .def_readonly("objects_expelled", &StepOutcome::objects_expelled)
        .def_readonly("contact_made", &StepOutcome::contact_made);

    m.def("step_push", &step_push, py::arg("scene"), py::arg("command"));
    m.def("step_grasp", &step_grasp, py::arg("scene"), py::arg("command"));

    py::class_<HeightMap>(m, "HeightMap")
        .def_readonly("resolution", &HeightMap::resolution)
        .def_readonly("pixel_size", &HeightMap::pixel_size)
        .def_property_readonly("height", &height_array)
        .def_property_readonly("color", &color_array);

    m.def("render_heightmap", &render_heightmap, py::arg("scene"), py::arg("resolution"));
    m.def(
        "rotate_heightmap",
        [](const HeightMap& map, int angle_index, int k) {
            return rotate_heightmap(map, angle_index, k);
        },
        py::arg("map"), py::arg("angle_index"), py::arg("k"));
    m.def("detect_change", &detect_change, py::arg("before"), py::arg("after"), py::arg("tau"));
    m.def("default_change_threshold", &default_change_threshold, py::arg("resolution"));

    py::class_<EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("n_objects", &EnvConfig::n_objects)
        .def_readwrite("workspace_side", &EnvConfig::workspace_side)
        .def_readwrite("resolution", &EnvConfig::resolution);

    py::class_<AgentConfig>(m, "AgentConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &AgentConfig::gamma)
        .def_readwrite("epsilon_start", &AgentConfig::epsilon_start)
        .def_readwrite("epsilon_end", &AgentConfig::epsilon_end)
        .def_readwrite("epsilon_anneal_steps", &AgentConfig::epsilon_anneal_steps)
        .def_readwrite("rotations", &AgentConfig::rotations)
        .def_readwrite("learning_rate", &AgentConfig::learning_rate)
        .def_readwrite("test_learning_rate", &AgentConfig::test_learning_rate)
        .def_readwrite("replay_alpha", &AgentConfig::replay_alpha)
        .def_readwrite("push_reward", &AgentConfig::push_reward)
        .def_readwrite("include_depth", &AgentConfig::include_depth)
        .def_readwrite("max_test_actions", &AgentConfig::max_test_actions)
        .def_readwrite("workers", &AgentConfig::workers);

    py::class_<Action>(m, "Action")
        .def_readonly("primitive", &Action::primitive)
        .def_readonly("rotation", &Action::rotation)
        .def_readonly("row", &Action::row)
        .def_readonly("col", &Action::col);

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("step", &StepRecord::step)
        .def_readonly("primitive", &StepRecord::primitive)
        .def_readonly("reward", &StepRecord::reward)
        .def_readonly("td_error", &StepRecord::td_error)
        .def_readonly("epsilon", &StepRecord::epsilon)
        .def_readonly("grasp_rate_200", &StepRecord::grasp_rate_200)
        .def_readonly("push_then_grasp_rate", &StepRecord::push_then_grasp_rate);

    py::class_<EpisodeResult>(m, "EpisodeResult")
        .def_readonly("completed", &EpisodeResult::completed)
        .def_readonly("actions", &EpisodeResult::actions)
        .def_readonly("grasp_attempts", &EpisodeResult::grasp_attempts)
        .def_readonly("grasp_successes", &EpisodeResult::grasp_successes)
        .def_readonly("objects_initial", &EpisodeResult::objects_initial)
        .def_readonly("objects_expelled", &EpisodeResult::objects_expelled);

    py::class_<Learner>(m, "Learner")
        .def_property_readonly("kind", &Learner::kind)
        .def(
            "predict",
            [](Learner& learner, const HeightMap& state) {
                return qmaps_array(learner.predict(state));
            },
            py::arg("state"), "Score maps with shape (2, k, H, W): push plane then grasp plane.")
        .def("save", [](const Learner& learner,
                        const std::string& path) { save_learner(learner, path); })
        .def("state_hash", [](const Learner& learner) { return learner_state_hash(learner); });

    m.def("make_learner", &make_learner, py::arg("kind"), py::arg("env"), py::arg("config"),
          py::arg("seed"));
    m.def("load_learner", &load_learner, py::arg("path"));

    m.def(
        "run_training",
        [](Learner& learner, long steps, uint64_t seed) {
            TrainResult result = run_training(learner, steps, seed);
            return result.log;
        },
        py::arg("learner"), py::arg("steps"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>(),
        "Run the self-supervised loop; returns the per-step log records.");

    m.def("run_test", &run_test, py::arg("learner"), py::arg("scene"),
          py::call_guard<py::gil_scoped_release>(),
          "One greedy evaluation episode; learner state is restored afterwards.");

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("scene", &Scenario::scene);

    m.def("adversarial_suite", &adversarial_suite,
          py::arg("workspace_side") = kDefaultWorkspaceSide);

    py::class_<MetricRow>(m, "MetricRow")
        .def_readonly("label", &MetricRow::label)
        .def_readonly("runs", &MetricRow::runs)
        .def_readonly("completion_pct", &MetricRow::completion_pct)
        .def_readonly("grasp_success_pct", &MetricRow::grasp_success_pct)
        .def_readonly("action_efficiency_pct", &MetricRow::action_efficiency_pct);

    py::class_<BenchmarkReport>(m, "BenchmarkReport")
        .def_readonly("per_scenario", &BenchmarkReport::per_scenario)
        .def_readonly("aggregate", &BenchmarkReport::aggregate)
        .def("table", [](const BenchmarkReport& r) { return report_table(r, "policy"); });

    m.def(
        "run_benchmark",
        [](Learner& learner, const std::vector<Scenario>& suite, int n_runs, uint64_t seed,
           int workers) {
            BenchmarkOptions options;
            options.n_runs = n_runs;
            options.seed = seed;
            options.workers = workers;
            return run_benchmark(learner, suite, options);
        },
        py::arg("learner"), py::arg("suite"), py::arg("n_runs") = 10, py::arg("seed") = 0,
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
}
