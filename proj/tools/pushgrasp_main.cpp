#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pushgrasp/config.hpp"
#include "pushgrasp/eval.hpp"
#include "pushgrasp/image_io.hpp"

namespace fs = std::filesystem;
using namespace pg;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write: " + path.string());
    os << text;
}

void apply_sets(RunConfig& config, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
}

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> sets;

    RunConfig build() const {
        RunConfig config;
        if (!config_file.empty()) config.load_file(config_file);
        apply_sets(config, sets);  // command line wins over the file
        return config;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "key=value config file");
        cmd->add_option("--set", sets, "override a config key (key=value, repeatable)");
    }
};

int cmd_train(const RunConfig& config) {
    fs::path out_dir(config.get("out_dir"));
    fs::create_directories(out_dir);
    write_file(out_dir / "config.echo", config.echo());

    uint64_t seed = static_cast<uint64_t>(config.get_long("seed"));
    long steps = config.get_long("steps");
    long checkpoint_every = config.get_long("checkpoint_every");

    auto learner = make_learner(config.learner_kind(), config.env_config(),
                                config.agent_config(), seed);

    std::ofstream log(out_dir / "log.csv");
    std::ofstream curves(out_dir / "curves.csv");
    log << step_record_csv_header() << "\n";
    curves << "step,grasp_rate_200,push_then_grasp_rate\n";

    auto on_step = [&](const StepRecord& record, const Learner& l) {
        log << step_record_csv_row(record) << "\n";
        log.flush();
        curves << record.step << "," << record.grasp_rate_200 << ","
               << record.push_then_grasp_rate << "\n";
        if (checkpoint_every > 0 && (record.step + 1) % checkpoint_every == 0) {
            char name[48];
            std::snprintf(name, sizeof(name), "ckpt_%06ld.bin", record.step + 1);
            save_learner(l, (out_dir / name).string());
        }
    };

    run_training(*learner, steps, seed, on_step);
    save_learner(*learner, (out_dir / "final.ckpt").string());
    std::cout << "trained " << steps << " steps (" << config.get("variant") << "), outputs in "
              << out_dir << "\n";
    return 0;
}

std::vector<Scenario> load_suite(const std::string& suite, const RunConfig& config, int runs) {
    std::vector<Scenario> scenarios;
    if (suite == "adversarial") {
        return adversarial_suite(config.get_double("workspace_side"));
    }
    if (suite == "random") {
        Rng rng(static_cast<uint64_t>(config.get_long("seed")));
        int n = static_cast<int>(config.get_long("n_objects"));
        for (int i = 0; i < runs; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "random_%02d", i);
            scenarios.push_back({name, spawn_random(n, default_palette(), rng.next_u64(),
                                                    config.get_double("workspace_side"))});
        }
        return scenarios;
    }
    fs::path p(suite);
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(p))
            if (entry.path().extension() == ".scn") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            scenarios.push_back({f.stem().string(), load_scenario(read_file(f.string()))});
    } else if (fs::is_regular_file(p)) {
        scenarios.push_back({p.stem().string(), load_scenario(read_file(p.string()))});
    }
    if (scenarios.empty()) throw std::runtime_error("no scenarios found in suite: " + suite);
    return scenarios;
}

int cmd_bench(const RunConfig& config, const std::string& checkpoint, const std::string& suite) {
    fs::path out_dir(config.get("out_dir"));
    fs::create_directories(out_dir);
    write_file(out_dir / "config.echo", config.echo());

    auto learner = load_learner(checkpoint);
    int runs = static_cast<int>(config.get_long("bench_runs"));
    bool random_suite = suite == "random";
    std::vector<Scenario> scenarios = load_suite(suite, config, runs);

    BenchmarkOptions options;
    options.n_runs = random_suite ? 1 : runs;
    options.seed = static_cast<uint64_t>(config.get_long("seed"));
    options.workers = static_cast<int>(config.get_long("workers"));
    options.jitter = !random_suite;

    BenchmarkReport report = run_benchmark(*learner, scenarios, options);
    std::string table = report_table(report, learner->kind());
    write_file(out_dir / "report.txt", table);
    write_file(out_dir / "report.csv", report_csv(report));
    write_file(out_dir / "runs.csv", runs_csv(report.runs));
    std::cout << table;
    return 0;
}

int cmd_render(const RunConfig& config, const std::string& checkpoint,
               const std::string& scenario_path) {
    fs::path out_dir(config.get("out_dir"));
    fs::create_directories(out_dir);

    auto learner = load_learner(checkpoint);
    Scene scene = load_scenario(read_file(scenario_path));
    HeightMap map = render_heightmap(scene, learner->env().resolution);

    write_color_ppm((out_dir / "state_rgb.ppm").string(), map);
    write_height_pgm((out_dir / "state_height.pgm").string(), map);

    QMaps maps = learner->predict(map);
    int h = maps.resolution;
    size_t plane = static_cast<size_t>(h) * h;
    std::ostringstream sidecar;
    auto dump = [&](const Tensor& t, const char* prefix) {
        for (int r = 0; r < maps.k; ++r) {
            std::vector<double> values(t.data.begin() + r * plane,
                                       t.data.begin() + (r + 1) * plane);
            double lo = *std::min_element(values.begin(), values.end());
            double hi = *std::max_element(values.begin(), values.end());
            char name[48];
            std::snprintf(name, sizeof(name), "%s_r%02d.ppm", prefix, r);
            write_heat_ppm((out_dir / name).string(), values, h, h, lo, hi);
            sidecar << name << " min=" << lo << " max=" << hi << "\n";
        }
    };
    dump(maps.push, "q_push");
    dump(maps.grasp, "q_grasp");

    Rng dummy(0);
    Action best = select_action(maps, 0.0, dummy, learner->action_space());
    sidecar << "argmax primitive=" << (best.primitive == Primitive::Push ? "push" : "grasp")
            << " rotation=" << best.rotation << " pixel_row=" << best.row
            << " pixel_col=" << best.col << "\n";
    write_file(out_dir / "qrange.txt", sidecar.str());
    std::cout << "wrote " << 2 * maps.k + 2 << " images to " << out_dir << "\n";
    return 0;
}

int cmd_play(const RunConfig& config, const std::string& scenario_path,
             const std::string& action_spec, const std::string& save_path) {
    Scene scene = load_scenario(read_file(scenario_path));

    std::istringstream spec(action_spec);
    std::string primitive;
    int rotation, row, col;
    if (!(spec >> primitive >> rotation >> row >> col) ||
        (primitive != "push" && primitive != "grasp"))
        throw std::invalid_argument("action spec must be: push|grasp <rotation> <row> <col>");

    int resolution = static_cast<int>(config.get_long("resolution"));
    int k = static_cast<int>(config.get_long("rotations"));
    if (rotation < 0 || rotation >= k) throw std::invalid_argument("rotation out of range");
    if (row < 0 || row >= resolution || col < 0 || col >= resolution)
        throw std::invalid_argument("pixel out of range");
    ActionSpace space = ActionSpace::make(k, resolution);
    if (!space.is_valid(rotation, row, col))
        throw std::invalid_argument("pixel maps outside the workspace");

    EnvConfig env = config.env_config();
    env.workspace_side = scene.workspace_side;
    HeightMap map = render_heightmap(scene, resolution);
    Action action{primitive == "push" ? Primitive::Push : Primitive::Grasp, rotation, row, col};

    StepOutcome outcome;
    if (action.primitive == Primitive::Push)
        outcome = step_push(scene, action_to_push(action, map, k, env.push_proto));
    else
        outcome = step_grasp(scene, action_to_grasp(action, map, k, env.grasp_proto));

    HeightMap after = render_heightmap(outcome.scene_after, resolution);
    bool change = detect_change(map, after, config.agent_config().change_threshold(resolution));

    std::cout << "primitive: " << primitive << "\n"
              << "contact_made: " << (outcome.contact_made ? "yes" : "no") << "\n"
              << "grasp_success: " << (outcome.grasp_success ? "yes" : "no") << "\n"
              << "objects_removed: " << outcome.objects_removed << "\n"
              << "objects_expelled: " << outcome.objects_expelled << "\n"
              << "change_detected: " << (change ? "yes" : "no") << "\n"
              << "objects_remaining: " << object_count(outcome.scene_after) << "\n";
    if (!save_path.empty()) write_file(save_path, save_scenario(outcome.scene_after));
    return 0;
}

int cmd_gen(const RunConfig& config, int count, bool adversarial) {
    fs::path out_dir(config.get("out_dir"));
    fs::create_directories(out_dir);
    if (adversarial) {
        for (const auto& scenario : adversarial_suite(config.get_double("workspace_side"))) {
            write_file(out_dir / (scenario.name + ".scn"), save_scenario(scenario.scene));
            std::cout << scenario.name << ".scn\n";
        }
        return 0;
    }
    Rng rng(static_cast<uint64_t>(config.get_long("seed")));
    int n = static_cast<int>(config.get_long("n_objects"));
    for (int i = 0; i < count; ++i) {
        Scene scene = spawn_random(n, default_palette(), rng.next_u64(),
                                   config.get_double("workspace_side"));
        char name[32];
        std::snprintf(name, sizeof(name), "scene_%04d.scn", i);
        write_file(out_dir / name, save_scenario(scene));
        std::cout << name << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabletop pushing-and-grasping learner"};
    app.require_subcommand(1);

    CommonOpts train_opts, bench_opts, render_opts, play_opts, gen_opts;
    std::string checkpoint, suite = "adversarial", scenario_path, action_spec, save_path;
    int gen_count = 1;
    bool gen_adversarial = false;
    long steps = -1, bench_runs = -1, gen_objects = -1, seed = -1;
    std::string variant, out_dir;

    auto* train = app.add_subcommand("train", "run a self-supervised training session");
    train_opts.attach(train);
    train->add_option("--steps", steps, "training steps");
    train->add_option("--seed", seed, "random seed");
    train->add_option("--variant", variant, "policy variant");
    train->add_option("--out", out_dir, "output directory");

    auto* bench = app.add_subcommand("bench", "benchmark a trained checkpoint");
    bench_opts.attach(bench);
    bench->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    bench->add_option("--suite", suite, "adversarial | random | scenario file or directory");
    bench->add_option("--runs", bench_runs, "episodes per scenario");
    bench->add_option("--seed", seed, "random seed");
    bench->add_option("--out", out_dir, "output directory");

    auto* render = app.add_subcommand("render", "export heightmaps and score heat maps");
    render_opts.attach(render);
    render->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    render->add_option("--scenario", scenario_path, "scenario file")->required();
    render->add_option("--out", out_dir, "output directory");

    auto* play = app.add_subcommand("play", "apply one primitive to a scenario");
    play_opts.attach(play);
    play->add_option("--scenario", scenario_path, "scenario file")->required();
    play->add_option("--action", action_spec, "push|grasp <rotation> <row> <col>")->required();
    play->add_option("--save", save_path, "write the resulting scenario here");

    auto* gen = app.add_subcommand("gen", "generate scenario files");
    gen_opts.attach(gen);
    gen->add_option("--count", gen_count, "number of random scenarios");
    gen->add_flag("--adversarial", gen_adversarial, "write the shipped adversarial suite");
    gen->add_option("--objects", gen_objects, "objects per scenario");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        CommonOpts* opts = train->parsed() ? &train_opts
                           : bench->parsed() ? &bench_opts
                           : render->parsed() ? &render_opts
                           : play->parsed() ? &play_opts
                                            : &gen_opts;
        RunConfig config = opts->build();
        // Convenience flags override config/file values.
        if (!variant.empty()) config.set("variant", variant);
        if (seed >= 0) config.set("seed", std::to_string(seed));
        if (!out_dir.empty()) config.set("out_dir", out_dir);
        if (steps >= 0) config.set("steps", std::to_string(steps));
        if (bench_runs >= 0) config.set("bench_runs", std::to_string(bench_runs));
        if (gen_objects >= 0) config.set("n_objects", std::to_string(gen_objects));
        if (train->parsed()) return cmd_train(config);
        if (bench->parsed()) return cmd_bench(config, checkpoint, suite);
        if (render->parsed()) return cmd_render(config, checkpoint, scenario_path);
        if (play->parsed()) return cmd_play(config, scenario_path, action_spec, save_path);
        if (gen->parsed()) return cmd_gen(config, gen_count, gen_adversarial);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
