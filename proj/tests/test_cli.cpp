// End-to-end checks of the command-line tool: determinism of generated
// artifacts, config echo round-trips, and the render/play surfaces.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

#ifndef PUSHGRASP_CLI
#error "PUSHGRASP_CLI must point at the built binary"
#endif

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pushgrasp_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(PUSHGRASP_CLI) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int count_files(const fs::path& dir, const std::string& ext) {
    int n = 0;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ext) ++n;
    return n;
}

}  // namespace

TEST_CASE("gen is deterministic and emits loadable scenarios") {
    TempDir a, b;
    REQUIRE(run_cli("gen --count 2 --objects 4 --seed 11 --out " + a.path.string()) == 0);
    REQUIRE(run_cli("gen --count 2 --objects 4 --seed 11 --out " + b.path.string()) == 0);
    CHECK(count_files(a.path, ".scn") == 2);
    CHECK(slurp(a.path / "scene_0000.scn") == slurp(b.path / "scene_0000.scn"));
    CHECK(slurp(a.path / "scene_0001.scn") == slurp(b.path / "scene_0001.scn"));

    TempDir c;
    REQUIRE(run_cli("gen --count 0 --out " + c.path.string()) == 0);
    CHECK(count_files(c.path, ".scn") == 0);

    TempDir d;
    REQUIRE(run_cli("gen --adversarial --out " + d.path.string()) == 0);
    CHECK(count_files(d.path, ".scn") == 6);
}

TEST_CASE("train --steps 0 writes an empty log with header plus config echo") {
    TempDir dir;
    REQUIRE(run_cli("train --steps 0 --out " + dir.path.string()) == 0);
    std::string log = slurp(dir.path / "log.csv");
    CHECK(log ==
          "step,primitive,rotation,pixel_row,pixel_col,reward,td_error,epsilon,"
          "grasp_rate_200,push_then_grasp_rate\n");
    std::string echo = slurp(dir.path / "config.echo");
    CHECK(echo.find("variant=vpg") != std::string::npos);
    CHECK(echo.find("gamma=0.5") != std::string::npos);
}

TEST_CASE("variant presets show up in the config echo") {
    TempDir dir;
    REQUIRE(run_cli("train --steps 0 --variant vpg-myopic --out " + dir.path.string()) == 0);
    std::string echo = slurp(dir.path / "config.echo");
    CHECK(echo.find("gamma=0.2") != std::string::npos);
    CHECK(echo.find("variant=vpg-myopic") != std::string::npos);
}

TEST_CASE("training runs are reproducible byte for byte") {
    TempDir a, b;
    std::string flags =
        " --steps 6 --seed 5 --set resolution=32 --set rotations=4 --set n_objects=2"
        " --set checkpoint_every=0 --out ";
    REQUIRE(run_cli("train" + flags + a.path.string()) == 0);
    REQUIRE(run_cli("train" + flags + b.path.string()) == 0);
    CHECK(slurp(a.path / "log.csv") == slurp(b.path / "log.csv"));
    CHECK(slurp(a.path / "final.ckpt") == slurp(b.path / "final.ckpt"));

    // Re-running from the echoed config reproduces the run.
    TempDir c;
    REQUIRE(run_cli("train --config " + (a.path / "config.echo").string() + " --out " +
                    c.path.string()) == 0);
    CHECK(slurp(c.path / "log.csv") == slurp(a.path / "log.csv"));
}

TEST_CASE("play reports outcomes and rejects bad specs") {
    TempDir dir;
    REQUIRE(run_cli("gen --adversarial --out " + dir.path.string()) == 0);
    std::string scenario = (dir.path / "isolated.scn").string();

    CHECK(run_cli("play --scenario " + scenario + " --action \"grasp 0 32 32\"") == 0);
    CHECK(run_cli("play --scenario " + scenario + " --action \"push 0 99 1\"") != 0);
    CHECK(run_cli("play --scenario " + scenario + " --action \"poke 0 1 1\"") != 0);
    CHECK(run_cli("play --scenario missing.scn --action \"push 0 1 1\"") != 0);

    std::string save = (dir.path / "after.scn").string();
    REQUIRE(run_cli("play --scenario " + scenario + " --action \"grasp 0 32 32\" --save " +
                    save) == 0);
    CHECK(slurp(save).find("pushgrasp-scenario") == 0);
}

TEST_CASE("bench and render run against a tiny checkpoint") {
    TempDir dir;
    std::string flags =
        " --steps 4 --seed 2 --set resolution=32 --set rotations=4 --set n_objects=1"
        " --set checkpoint_every=0 --out ";
    REQUIRE(run_cli("train" + flags + dir.path.string()) == 0);
    std::string ckpt = (dir.path / "final.ckpt").string();

    TempDir scn;
    REQUIRE(run_cli("gen --count 1 --objects 1 --seed 3 --out " + scn.path.string()) == 0);

    TempDir bench_a, bench_b;
    std::string bench_flags = "bench --checkpoint " + ckpt + " --suite " +
                              (scn.path / "scene_0000.scn").string() + " --runs 2 --seed 1";
    REQUIRE(run_cli(bench_flags + " --out " + bench_a.path.string()) == 0);
    REQUIRE(run_cli(bench_flags + " --out " + bench_b.path.string()) == 0);
    CHECK(slurp(bench_a.path / "runs.csv") == slurp(bench_b.path / "runs.csv"));
    CHECK(slurp(bench_a.path / "report.csv").find("scenario") == 0);
    CHECK(slurp(bench_a.path / "report.txt").find("Action Efficiency") != std::string::npos);

    CHECK(run_cli("bench --checkpoint missing.ckpt --suite adversarial") != 0);

    TempDir render;
    REQUIRE(run_cli("render --checkpoint " + ckpt + " --scenario " +
                    (scn.path / "scene_0000.scn").string() + " --out " +
                    render.path.string()) == 0);
    // k push maps + k grasp maps + RGB + height = 2k + 2 images.
    CHECK(count_files(render.path, ".ppm") + count_files(render.path, ".pgm") == 2 * 4 + 2);
    CHECK(slurp(render.path / "qrange.txt").find("argmax") != std::string::npos);

    TempDir render2;
    REQUIRE(run_cli("render --checkpoint " + ckpt + " --scenario " +
                    (scn.path / "scene_0000.scn").string() + " --out " +
                    render2.path.string()) == 0);
    CHECK(slurp(render.path / "q_push_r00.ppm") == slurp(render2.path / "q_push_r00.ppm"));
}

TEST_CASE("unknown config keys are rejected") {
    CHECK(run_cli("train --steps 0 --set no_such_key=1") != 0);
    CHECK(run_cli("train --steps 0 --set gamma=banana") != 0);
}
