"""Command-line entry point: runs, sweeps, figures, and exact predictions.

All numeric input and output is exact — fractions in, fractions out.
Exit status: 0 on success (a corner start is data, not a failure), 1 on
domain errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from itertools import islice
from typing import Optional, Tuple

from .analysis import (
    DetectorConfig,
    TunnelDetector,
    predict_wedge_period,
    predicted_reorg_slope,
)
from .bomb import parse_bomb_token
from .driver import EncounterWord, SlopeSpec, cutting_word, launch, region_count
from .engine import RunConfig, read_events_jsonl, run, run_geometric, write_events_jsonl
from .grid import load_walls, save_walls
from .render import Scene, auto_viewport, crossing_points, render_scene, replay_erased
from .sweep import (
    SweepError,
    SweepSpec,
    parse_slope_list,
    parse_slope_token,
    region_representative,
    sweep_to_csv,
)
from .tables import fixture_digest, verify_all

JOBS_ENV_VAR = "GRIDBLAST_JOBS"


# ---------------------------------------------------------------------------
# flag converters (argparse turns ArgumentTypeError into a usage error)
# ---------------------------------------------------------------------------

def _slope_arg(text: str):
    try:
        return parse_slope_token(text)
    except SweepError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _point_arg(text: str) -> Tuple[Fraction, Fraction]:
    try:
        xs, _, ys = text.partition(",")
        return Fraction(xs), Fraction(ys)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            f"expected X,Y with exact coordinates, got {text!r}"
        ) from None


def _bomb_arg(text: str):
    try:
        return parse_bomb_token(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _viewport_arg(text: str) -> Tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"expected x0,y0,x1,y1 integers, got {text!r}"
        )
    try:
        x0, y0, x1, y1 = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected x0,y0,x1,y1 integers, got {text!r}"
        ) from None
    return x0, y0, x1, y1


def _word_arg(text: str) -> str:
    if not text or set(text) - {"H", "V"}:
        raise argparse.ArgumentTypeError(
            f"a word is a nonempty string of H and V symbols, got {text!r}"
        )
    return text


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _detector_for(slope_value) -> TunnelDetector:
    wp = (slope_value.numerator + slope_value.denominator
          if isinstance(slope_value, Fraction) else None)
    return TunnelDetector(DetectorConfig(word_period=wp))


def _band_str(band: Tuple[int, int]) -> str:
    num, den = band
    return f"{num}/0" if den == 0 else str(Fraction(num, den))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    bomb = args.bomb
    erased = tuple(load_walls(args.erased)) if args.erased else ()
    keep = args.events is not None or args.dump_erased is not None
    if args.word is not None:
        if args.slope is not None or args.start is not None:
            args.parser.error("--word replaces --slope/--start")
        if args.geometric:
            args.parser.error("--geometric needs a launch, not --word")
        config = RunConfig(
            word=EncounterWord(kind="finite", text=args.word),
            bomb=bomb, initially_erased=erased,
            max_collisions=args.max_collisions,
            detector=TunnelDetector(DetectorConfig()),
            keep_events=keep,
        )
        events, outcome = run(config)
        detector = config.detector
    else:
        if args.slope is None or args.start is None:
            args.parser.error("run needs --slope and --start (or --word)")
        lnch = launch(args.slope, *args.start)
        detector = _detector_for(args.slope)
        config = RunConfig(
            launch=lnch, bomb=bomb, initially_erased=erased,
            max_collisions=args.max_collisions, detector=detector,
            keep_events=keep,
        )
        events, outcome = (run_geometric if args.geometric else run)(config)
    if args.events is not None:
        write_events_jsonl(events, args.events)
    if args.dump_erased is not None:
        save_walls(args.dump_erased,
                   sorted(replay_erased(events, bomb, initially_erased=erased)))

    report = outcome.tunnel if outcome.status == "tunnel" else detector.finalize()
    stats = outcome.stats
    print(f"status: {'tunnel' if report is not None else outcome.status}")
    print(f"encounters: {stats.encounters}")
    print(f"collisions: {stats.collisions}")
    print(f"walls erased: {stats.walls_erased}")
    if stats.bounding_box is not None:
        print("erased bounding box: {} {} {} {}".format(*stats.bounding_box))
    if report is not None:
        disp = " ".join(f"({dx},{dy})" for dx, dy in report.displacements)
        print(f"tunnel period: {report.period}")
        print(f"tunnel displacement: {disp}")
        print(f"tunnel onset collisions: {report.onset_collisions}")
        print(f"tunnel band slope: {_band_str(report.band_slope)}")
        if report.encounter_period is not None:
            print(f"tunnel encounter period: {report.encounter_period}")
    elif outcome.status == "corner":
        print(f"corner encounter: {outcome.corner_encounter}")
    return 0


def _cmd_sweep(args) -> int:
    parse_bomb_token(args.bomb)  # fail fast on a bad token
    spec = SweepSpec(
        slopes=parse_slope_list(args.slopes),
        regions=args.regions,
        bombs=(args.bomb,),
        cap=args.cap,
    )
    out = sweep_to_csv(spec, args.out, jobs=args.jobs, resume=args.resume)
    with open(out, encoding="utf-8") as fh:
        rows = sum(1 for _ in fh) - 1  # header
    print(f"wrote {rows} rows to {out}")
    return 0


def _cmd_render(args) -> int:
    events = read_events_jsonl(args.events)
    erased = replay_erased(
        events, args.bomb,
        tuple(load_walls(args.erased)) if args.erased else (),
    )
    path: Tuple[Tuple[Fraction, Fraction], ...] = ()
    if args.path:
        if args.slope is None or args.start is None:
            args.parser.error("--path needs --slope and --start to place the trail")
        path = tuple(crossing_points(args.start, args.slope, events))
    velocity: Optional[Tuple[float, float]] = None
    if args.start is not None and args.slope is not None:
        velocity = (1.0, float(args.slope))
    extra = path if path else ((args.start,) if args.start else ())
    viewport = args.viewport or auto_viewport(erased, margin=2, extra=extra)
    scene = Scene(erased=erased, viewport=viewport, start=args.start,
                  velocity=velocity, path=path)
    svg = render_scene(scene)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return 0


def _cmd_verify_tables(args) -> int:
    results = verify_all()
    failed = 0
    for res in results:
        if res.passed:
            print(f"ok   {res.scenario_id} ({res.steps_checked} steps)")
        else:
            failed += 1
            idx, expected, actual = res.first_divergence
            print(f"FAIL {res.scenario_id} at step {idx}: "
                  f"expected {expected}, got {actual}")
    print(f"digest: {fixture_digest()}")
    return 1 if failed else 0


def _cmd_predict(args) -> int:
    print(predicted_reorg_slope(args.slope))
    return 0


def _cmd_predict_wedge(args) -> int:
    period = predict_wedge_period(args.n, winged=not args.unwinged)
    print("none" if period is None else period)
    return 0


def _cmd_regions(args) -> int:
    if not isinstance(args.slope, Fraction):
        raise ValueError("region structure is defined for rational slopes only")
    n = region_count(SlopeSpec(args.slope))
    print(f"regions: {n}")
    for i in range(n):
        x, y = region_representative(args.slope, i)
        print(f"{i}: {x},{y}")
    return 0


def _cmd_word(args) -> int:
    lnch = launch(args.slope, *args.start)
    word = cutting_word(lnch)
    print("".join(islice(word.symbols(), args.count)))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridblast",
        description="Exact grid billiards with wall-erasing bombs.",
    )
    parser.add_argument("--version", action="version", version=fixture_digest())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one trajectory and summarize it")
    p.add_argument("--slope", type=_slope_arg)
    p.add_argument("--start", type=_point_arg, metavar="X,Y")
    p.add_argument("--bomb", type=_bomb_arg, default="single")
    p.add_argument("--max-collisions", type=int, default=10 ** 6)
    p.add_argument("--events", metavar="PATH",
                   help="write the event log as JSONL")
    p.add_argument("--geometric", action="store_true",
                   help="track exact positions instead of the symbolic word")
    p.add_argument("--erased", metavar="FILE",
                   help="wall list to erase before launch")
    p.add_argument("--dump-erased", metavar="PATH",
                   help="write the final erased walls as an H/V wall list")
    p.add_argument("--word", type=_word_arg, metavar="W",
                   help="inject a finite H/V word instead of a launch")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="classify many launches into a CSV")
    p.add_argument("--slopes", required=True,
                   help="comma list; ranges even:A..B and A..B:S expand")
    p.add_argument("--regions", default="all",
                   help='"all", index list, or points:X,Y;...')
    p.add_argument("--bomb", default="single")
    p.add_argument("--cap", type=int, default=10 ** 6)
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--resume", action="store_true",
                   help="continue from PATH.checkpoint")
    p.add_argument("--jobs", type=int, default=_default_jobs(),
                   help=f"worker processes (default ${JOBS_ENV_VAR} or 1)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("render", help="draw an event log as an SVG figure")
    p.add_argument("--events", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="FIG.svg")
    p.add_argument("--viewport", type=_viewport_arg, metavar="x0,y0,x1,y1")
    p.add_argument("--path", action="store_true",
                   help="trace the trajectory polyline")
    p.add_argument("--slope", type=_slope_arg)
    p.add_argument("--start", type=_point_arg, metavar="X,Y")
    p.add_argument("--bomb", type=_bomb_arg, default="single")
    p.add_argument("--erased", metavar="FILE")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("verify-tables",
                       help="replay every built-in trace fixture")
    p.set_defaults(func=_cmd_verify_tables)

    p = sub.add_parser("predict",
                       help="tunnel slope after the single-bomb reorganization")
    p.add_argument("--slope", type=_slope_arg, required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("predict-wedge",
                       help="predicted tunnel period for a wedge bomb")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--unwinged", action="store_true")
    p.set_defaults(func=_cmd_predict_wedge)

    p = sub.add_parser("regions",
                       help="list start regions with representative points")
    p.add_argument("--slope", type=_slope_arg, required=True)
    p.set_defaults(func=_cmd_regions)

    p = sub.add_parser("word", help="print the first N encounter symbols")
    p.add_argument("--slope", type=_slope_arg, required=True)
    p.add_argument("--start", type=_point_arg, required=True, metavar="X,Y")
    p.add_argument("--count", type=int, required=True)
    p.set_defaults(func=_cmd_word)

    for action in sub.choices.values():
        action.set_defaults(parser=action)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0 if code is None else 2
    except (SweepError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
