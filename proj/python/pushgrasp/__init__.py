"""Tabletop pushing-and-grasping simulator and learner."""

from ._core import (  # noqa: F401
    Action,
    AgentConfig,
    BenchmarkReport,
    EnvConfig,
    EpisodeResult,
    GraspCommand,
    HeightMap,
    Learner,
    MetricRow,
    ObjectSpec,
    Pose2,
    Primitive,
    PushCommand,
    Scenario,
    Scene,
    StepOutcome,
    StepRecord,
    Vec2,
    adversarial_suite,
    default_change_threshold,
    default_palette,
    detect_change,
    load_learner,
    make_learner,
    render_heightmap,
    rotate_heightmap,
    run_benchmark,
    run_test,
    run_training,
    spawn_random,
    step_grasp,
    step_push,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
