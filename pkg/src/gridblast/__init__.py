"""gridblast: exact-arithmetic simulator for a grid billiard with exploding walls."""

from .analysis import (
    ColumnProfile,
    DetectorConfig,
    TunnelDetector,
    TunnelReport,
    column_profile,
    estimate_band,
    predict_wedge_period,
    predicted_reorg_slope,
    s_sequence,
)
from .bomb import (
    BombPattern,
    overlay,
    parse_bomb,
    parse_bomb_token,
    serialize_bomb,
    single_wall,
    wedge,
)
from .driver import (
    CornerLineError,
    EncounterWord,
    LaunchSpec,
    SlopeSpec,
    cutting_word,
    launch,
    region_count,
    region_of,
)
from .engine import (
    Event,
    RunConfig,
    RunOutcome,
    read_events_jsonl,
    run,
    run_geometric,
    write_events_jsonl,
)
from .exactnum import QuadraticValue
from .fastrun import FastConfig, FastResult, fast_run
from .grid import H, V, WallId, WallState, load_walls, parse_walls, save_walls, serialize_walls
from .render import (
    RenderError,
    Scene,
    auto_viewport,
    crossing_points,
    render_scene,
    replay_erased,
    solid_walls_in,
)
from .sweep import (
    SweepError,
    SweepRecord,
    SweepSpec,
    parse_slope_list,
    parse_slope_token,
    region_representative,
    run_sweep,
    sweep_to_csv,
)
from .tables import fixture_digest, verify_all, verify_trace

__version__ = "0.1.0"

__all__ = [
    "BombPattern",
    "ColumnProfile",
    "CornerLineError",
    "DetectorConfig",
    "EncounterWord",
    "Event",
    "FastConfig",
    "FastResult",
    "H",
    "LaunchSpec",
    "QuadraticValue",
    "RenderError",
    "RunConfig",
    "RunOutcome",
    "Scene",
    "SlopeSpec",
    "SweepError",
    "SweepRecord",
    "SweepSpec",
    "TunnelDetector",
    "TunnelReport",
    "V",
    "WallId",
    "WallState",
    "auto_viewport",
    "column_profile",
    "crossing_points",
    "cutting_word",
    "estimate_band",
    "fast_run",
    "fixture_digest",
    "launch",
    "load_walls",
    "overlay",
    "parse_bomb",
    "parse_bomb_token",
    "parse_slope_list",
    "parse_slope_token",
    "parse_walls",
    "predict_wedge_period",
    "predicted_reorg_slope",
    "read_events_jsonl",
    "region_count",
    "region_of",
    "region_representative",
    "render_scene",
    "replay_erased",
    "run",
    "run_geometric",
    "run_sweep",
    "s_sequence",
    "save_walls",
    "serialize_bomb",
    "serialize_walls",
    "single_wall",
    "solid_walls_in",
    "sweep_to_csv",
    "verify_all",
    "verify_trace",
    "write_events_jsonl",
]
