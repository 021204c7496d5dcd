#pragma once

#include <string>
#include <vector>

#include "pushgrasp/agent.hpp"

namespace pg {

struct RunResult {
    std::string scenario;
    int run_index{0};
    bool completed{false};
    int actions{0};
    int grasp_attempts{0};
    int grasp_successes{0};
    int objects_initial{0};
    int objects_expelled{0};
};

/// Percentages; grasp success and action efficiency average over completed
/// runs only and are NaN when no run qualifies.
struct MetricRow {
    std::string label;
    int runs{0};
    double completion_pct{0.0};
    double grasp_success_pct{0.0};
    double action_efficiency_pct{0.0};
};

struct BenchmarkReport {
    std::vector<MetricRow> per_scenario;
    MetricRow aggregate;
    std::vector<RunResult> runs;
};

/// Throws std::invalid_argument on empty input.
BenchmarkReport compute_metrics(const std::vector<RunResult>& results);

std::string report_table(const BenchmarkReport& report, const std::string& method_name);
std::string report_csv(const BenchmarkReport& report);
std::string runs_csv(const std::vector<RunResult>& runs);

struct Scenario {
    std::string name;
    Scene scene;
};

/// The six shipped adversarial arrangements: tightly packed rows and blocks
/// that defeat direct grasping, plus an isolated-object sanity case.
std::vector<Scenario> adversarial_suite(double workspace_side = kDefaultWorkspaceSide);

/// Rigid whole-scene jitter (translation + rotation about the arrangement
/// centroid) preserving internal gaps; falls back to the identity when the
/// jittered scene would leave the workspace.
Scene jitter_scene(const Scene& scene, uint64_t seed);

struct BenchmarkOptions {
    int n_runs = 10;
    uint64_t seed = 0;
    int workers = 1;
    bool jitter = true;  // run 0 is always the canonical arrangement
};

/// n_runs test episodes per scenario; deterministic given the seed, for any
/// worker count. The learner is restored to its incoming state.
BenchmarkReport run_benchmark(Learner& learner, const std::vector<Scenario>& suite,
                              const BenchmarkOptions& options);

/// Base config plus the three single-knob ablations: no push reward,
/// myopic discount (gamma 0.2), and color-only input.
std::vector<std::pair<std::string, AgentConfig>> ablation_matrix(const AgentConfig& base);

}  // namespace pg
