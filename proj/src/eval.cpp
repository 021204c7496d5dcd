#include "pushgrasp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pushgrasp/parallel.hpp"

namespace pg {

namespace {

MetricRow metrics_over(const std::string& label, const std::vector<const RunResult*>& runs) {
    MetricRow row;
    row.label = label;
    row.runs = static_cast<int>(runs.size());
    int completed = 0;
    double grasp_sum = 0.0;
    int grasp_n = 0;
    double eff_sum = 0.0;
    int eff_n = 0;
    for (const RunResult* r : runs) {
        if (!r->completed) continue;
        ++completed;
        if (r->grasp_attempts > 0) {
            grasp_sum += 100.0 * r->grasp_successes / r->grasp_attempts;
            ++grasp_n;
        }
        if (r->actions > 0) {
            eff_sum += 100.0 * r->objects_initial / r->actions;
            ++eff_n;
        }
    }
    row.completion_pct = 100.0 * completed / static_cast<double>(runs.size());
    row.grasp_success_pct =
        grasp_n > 0 ? grasp_sum / grasp_n : std::numeric_limits<double>::quiet_NaN();
    row.action_efficiency_pct =
        eff_n > 0 ? eff_sum / eff_n : std::numeric_limits<double>::quiet_NaN();
    return row;
}

std::string fmt_pct(double v) {
    if (std::isnan(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace

BenchmarkReport compute_metrics(const std::vector<RunResult>& results) {
    if (results.empty()) throw std::invalid_argument("compute_metrics: no results");
    BenchmarkReport report;
    report.runs = results;

    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunResult*>> by_scenario;
    std::vector<const RunResult*> all;
    for (const auto& r : results) {
        if (by_scenario.find(r.scenario) == by_scenario.end()) order.push_back(r.scenario);
        by_scenario[r.scenario].push_back(&r);
        all.push_back(&r);
    }
    for (const auto& name : order)
        report.per_scenario.push_back(metrics_over(name, by_scenario[name]));
    report.aggregate = metrics_over("all", all);
    return report;
}

std::string report_table(const BenchmarkReport& report, const std::string& method_name) {
    std::ostringstream os;
    size_t w = std::max<size_t>(10, method_name.size());
    for (const auto& row : report.per_scenario) w = std::max(w, row.label.size());
    auto line = [&](const std::string& label, const MetricRow& row) {
        os << label << std::string(w + 2 - label.size(), ' ');
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%10s %14s %18s", fmt_pct(row.completion_pct).c_str(),
                      fmt_pct(row.grasp_success_pct).c_str(),
                      fmt_pct(row.action_efficiency_pct).c_str());
        os << buf << "\n";
    };
    os << "Method: " << method_name << "\n";
    std::string head = "Scenario";
    os << head << std::string(w + 2 - head.size(), ' ');
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%10s %14s %18s", "Completion", "Grasp Success",
                  "Action Efficiency");
    os << buf << "\n";
    for (const auto& row : report.per_scenario) line(row.label, row);
    line("all", report.aggregate);
    os << "\nA run counts as completed only when every object initially present\n"
          "was removed by a successful grasp; objects pushed out of the workspace\n"
          "make completion impossible. Grasp success and action efficiency average\n"
          "over completed runs.\n";
    return os.str();
}

std::string report_csv(const BenchmarkReport& report) {
    std::ostringstream os;
    os << "scenario,runs,completion_pct,grasp_success_pct,action_efficiency_pct\n";
    auto emit = [&](const MetricRow& row) {
        os << row.label << "," << row.runs << "," << fmt_pct(row.completion_pct) << ","
           << fmt_pct(row.grasp_success_pct) << "," << fmt_pct(row.action_efficiency_pct) << "\n";
    };
    for (const auto& row : report.per_scenario) emit(row);
    emit(report.aggregate);
    return os.str();
}

std::string runs_csv(const std::vector<RunResult>& runs) {
    std::ostringstream os;
    os << "scenario,run,completed,actions,grasp_attempts,grasp_successes,objects_initial,"
          "objects_expelled\n";
    for (const auto& r : runs) {
        os << r.scenario << "," << r.run_index << "," << (r.completed ? 1 : 0) << "," << r.actions
           << "," << r.grasp_attempts << "," << r.grasp_successes << "," << r.objects_initial
           << "," << r.objects_expelled << "\n";
    }
    return os.str();
}

namespace {

PlacedObject block(const char* name, double w, double h, double x, double y, double theta,
                   int color, double height) {
    PlacedObject obj;
    obj.spec.shape = make_box(w, h);
    obj.spec.height = height;
    obj.spec.color_id = color;
    obj.spec.name = name;
    obj.pose = Pose2{x, y, theta};
    return obj;
}

// 0.2 mm face gaps: visually packed, far too tight for a 10 mm jaw, but
// cleanly non-overlapping for the collision predicates.
constexpr double kPitch = 0.0402;  // rod short side 0.04 + gap

}  // namespace

std::vector<Scenario> adversarial_suite(double workspace_side) {
    double c = workspace_side / 2.0;
    std::vector<Scenario> suite;

    {
        Scene s;
        s.workspace_side = workspace_side;
        PlacedObject obj;
        obj.spec.shape = make_box(0.040, 0.040);
        obj.spec.height = 0.030;
        obj.spec.color_id = 2;
        obj.spec.name = "lone";
        obj.pose = Pose2{c, c, 0.0};
        s.objects.push_back(obj);
        suite.push_back({"isolated", std::move(s)});
    }
    {
        // Three rods standing long-side-on in a row: every grasp angle either
        // lands a jaw on a neighbor or spans more than the opening.
        Scene s;
        s.workspace_side = workspace_side;
        for (int i = -1; i <= 1; ++i)
            s.objects.push_back(block(("row3_" + std::to_string(i + 1)).c_str(), 0.040, 0.080,
                                      c + i * kPitch, c, 0.0, 4, 0.028));
        suite.push_back({"packed_row_3", std::move(s)});
    }
    {
        // Same wall, four deep, running north-south.
        Scene s;
        s.workspace_side = workspace_side;
        for (int i = 0; i < 4; ++i) {
            double offset = (i - 1.5) * kPitch;
            s.objects.push_back(block(("row4_" + std::to_string(i)).c_str(), 0.080, 0.040, c,
                                      c + offset, 0.0, 5, 0.020));
        }
        suite.push_back({"packed_row_4", std::move(s)});
    }
    {
        // 2x2 square block: every flank of every square is covered.
        Scene s;
        s.workspace_side = workspace_side;
        double pitch = 0.0542;
        int idx = 0;
        for (int iy = 0; iy <= 1; ++iy)
            for (int ix = 0; ix <= 1; ++ix)
                s.objects.push_back(block(("quad_" + std::to_string(idx++)).c_str(), 0.054, 0.054,
                                          c + (ix - 0.5) * pitch, c + (iy - 0.5) * pitch, 0.0, 3,
                                          0.022));
        suite.push_back({"square_2x2", std::move(s)});
    }
    {
        // Two rods flush against each other near the west wall.
        Scene s;
        s.workspace_side = workspace_side;
        s.objects.push_back(block("wall_a", 0.040, 0.080, 0.070, c, 0.0, 0, 0.024));
        s.objects.push_back(block("wall_b", 0.040, 0.080, 0.070 + kPitch, c, 0.0, 1, 0.024));
        suite.push_back({"wall_pair", std::move(s)});
    }
    {
        // L-shaped cluster of three rods.
        Scene s;
        s.workspace_side = workspace_side;
        s.objects.push_back(block("l_a", 0.040, 0.080, c, c, 0.0, 6, 0.026));
        s.objects.push_back(block("l_b", 0.040, 0.080, c + kPitch, c, 0.0, 7, 0.026));
        s.objects.push_back(
            block("l_c", 0.080, 0.040, c + 0.0201, c - 0.0602, 0.0, 8, 0.026));
        suite.push_back({"l_cluster", std::move(s)});
    }

    for (auto& scenario : suite) {
        if (max_pair_penetration(scenario.scene) > 0.0)
            throw std::logic_error("adversarial scenario has overlapping objects");
    }
    return suite;
}

Scene jitter_scene(const Scene& scene, uint64_t seed) {
    if (scene.objects.empty()) return scene;
    Rng rng(seed);
    Vec2 center{0.0, 0.0};
    for (const auto& obj : scene.objects) center += obj.centroid() * (1.0 / scene.objects.size());

    for (int attempt = 0; attempt < 100; ++attempt) {
        double scale = 1.0 - attempt / 100.0;
        double dx = rng.uniform(-0.02, 0.02) * scale;
        double dy = rng.uniform(-0.02, 0.02) * scale;
        double dtheta = rng.uniform(-0.15, 0.15) * scale;
        Scene out = scene;
        bool ok = true;
        for (auto& obj : out.objects) {
            Vec2 rel = obj.pose.translation() - center;
            Vec2 moved = center + rotate(rel, dtheta) + Vec2{dx, dy};
            obj.pose = Pose2{moved.x, moved.y, obj.pose.theta + dtheta};
            if (!out.contains(obj.centroid())) {
                ok = false;
                break;
            }
        }
        if (ok) return out;
    }
    return scene;
}

BenchmarkReport run_benchmark(Learner& learner, const std::vector<Scenario>& suite,
                              const BenchmarkOptions& options) {
    if (suite.empty()) throw std::invalid_argument("run_benchmark: empty scenario suite");
    if (options.n_runs <= 0) throw std::invalid_argument("run_benchmark: n_runs must be > 0");

    int total = static_cast<int>(suite.size()) * options.n_runs;
    std::vector<RunResult> results(static_cast<size_t>(total));
    std::string pristine = serialize_learner(learner);

    auto one_run = [&](Learner& worker_learner, int flat) {
        int s_idx = flat / options.n_runs;
        int run = flat % options.n_runs;
        const Scenario& scenario = suite[static_cast<size_t>(s_idx)];
        Scene scene = scenario.scene;
        if (options.jitter && run > 0) {
            uint64_t jitter_seed =
                fnv1a(&run, sizeof(run), fnv1a(&s_idx, sizeof(s_idx), options.seed));
            scene = jitter_scene(scene, jitter_seed);
        }
        EpisodeResult ep = run_test(worker_learner, scene);
        RunResult& r = results[static_cast<size_t>(flat)];
        r.scenario = scenario.name;
        r.run_index = run;
        r.completed = ep.completed;
        r.actions = ep.actions;
        r.grasp_attempts = ep.grasp_attempts;
        r.grasp_successes = ep.grasp_successes;
        r.objects_initial = ep.objects_initial;
        r.objects_expelled = ep.objects_expelled;
    };

    if (options.workers <= 1) {
        for (int flat = 0; flat < total; ++flat) one_run(learner, flat);
    } else {
        int workers_n = std::min(options.workers, total);
        std::vector<std::unique_ptr<Learner>> clones;
        clones.reserve(static_cast<size_t>(workers_n));
        for (int w = 0; w < workers_n; ++w) clones.push_back(deserialize_learner(pristine));
        parallel_for(total, workers_n, [&](int flat) {
            // parallel_for assigns i % workers_n == t to thread t
            one_run(*clones[static_cast<size_t>(flat % workers_n)], flat);
        });
    }
    return compute_metrics(results);
}

std::vector<std::pair<std::string, AgentConfig>> ablation_matrix(const AgentConfig& base) {
    std::vector<std::pair<std::string, AgentConfig>> out;
    out.emplace_back("vpg", base);
    AgentConfig noreward = base;
    noreward.push_reward = false;
    out.emplace_back("vpg-noreward", noreward);
    AgentConfig myopic = base;
    myopic.gamma = 0.2;
    out.emplace_back("vpg-myopic", myopic);
    AgentConfig nodepth = base;
    nodepth.include_depth = false;
    out.emplace_back("vpg-nodepth", nodepth);
    return out;
}

}  // namespace pg
