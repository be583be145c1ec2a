"""The step loop: encounters in, reflections and erasures out.

Two interchangeable modes.  The symbolic mode consumes the launch's encounter
word and needs integer arithmetic only; it is the reference implementation
the rest of the package is checked against.  The geometric mode advances the
exact rational position crossing by crossing and detects corners as exact
ties, serving as an independent oracle and as the only mode that can follow
a path all the way into a corner that the word alone cannot see (it can:
corners are word-level events too — both modes agree).

Conventions: an encounter is the particle reaching a grid line within its
current cell; it either collides (wall solid: reflect, fire the bomb) or
passes (wall erased: move to the neighbouring cell).  Events record the cell
*before* the event and the signs and stage *after* it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, NamedTuple, Optional, Tuple

from .bomb import BombPattern, overlay, single_wall
from .driver import (
    CornerLineError,
    EncounterWord,
    LaunchSpec,
    cutting_word,
    launch_cell,
    stage_of,
)
from .grid import WallId, WallState


class Event(NamedTuple):
    i: int  # encounter ordinal, 1-based
    kind: str  # "collision" | "pass"
    wall: WallId
    cell: Tuple[int, int]  # before the event
    dir: Tuple[int, int]  # after the event
    stage: int  # after the event
    collision_index: int  # 1-based among collisions, 0 for passes


@dataclass
class ParticleState:
    cx: int
    cy: int
    sx: int
    sy: int
    stage: int


@dataclass(frozen=True)
class RunStats:
    encounters: int
    collisions: int
    walls_erased: int
    bounding_box: Optional[tuple]


@dataclass(frozen=True)
class RunOutcome:
    status: str  # "tunnel" | "corner" | "cap" | "word-exhausted"
    stats: RunStats
    tunnel: Optional[object] = None  # TunnelReport when status == "tunnel"
    corner_encounter: Optional[int] = None
    final_state: Optional[Tuple[int, int, int, int, int]] = None  # cx, cy, sx, sy, stage


@dataclass
class RunConfig:
    """One run: either a launch, or an injected word plus explicit state."""

    launch: Optional[LaunchSpec] = None
    word: Optional[EncounterWord] = None
    start_cell: Tuple[int, int] = (0, 0)
    start_signs: Tuple[int, int] = (1, 1)
    start_stage: Optional[int] = None
    bomb: BombPattern = field(default_factory=single_wall)
    initially_erased: Tuple[WallId, ...] = ()
    max_collisions: Optional[int] = None
    max_encounters: Optional[int] = None
    detector: Optional[object] = None  # duck-typed: on_collision(Event) -> report
    keep_events: bool = True
    on_event: Optional[Callable[[Event], None]] = None

    def resolved(self) -> tuple:
        """(word, initial ParticleState, WallState)."""
        if (self.launch is None) == (self.word is None):
            raise ValueError("config needs exactly one of launch or word")
        if self.launch is not None:
            word = cutting_word(self.launch)
            stage = initial_stage(self.launch)
            state = ParticleState(*launch_cell(self.launch),
                                  self.launch.sx, self.launch.sy, stage)
        else:
            word = self.word
            cx, cy = self.start_cell
            sx, sy = self.start_signs
            state = ParticleState(cx, cy, sx, sy, self.start_stage or 0)
        return word, state, WallState(self.initially_erased)


def initial_stage(lnch: LaunchSpec) -> int:
    """Stage at launch; on a corner line, counts crossings up to the corner."""
    try:
        return stage_of(lnch)
    except CornerLineError:
        # The back-ray dies in a corner; count the H crossings this side of it.
        s = lnch.slope.value
        a_back = lnch.x if lnch.sx > 0 else (1 - lnch.x if lnch.x > 0 else Fraction(0))
        drop = s * a_back
        y_prev = lnch.y - drop if lnch.sy > 0 else lnch.y + drop
        lo, hi = (y_prev, lnch.y) if y_prev < lnch.y else (lnch.y, y_prev)
        count = math.ceil(hi) - math.floor(lo) - 1
        if lnch.y == 0:
            count += 1
        return count


def step_symbolic(
    state: ParticleState,
    walls: WallState,
    bomb: BombPattern,
    symbol: str,
    encounter_index: int = 0,
    collision_index: int = 0,
) -> Event:
    """Process one encounter symbol in place and return its event record."""
    cell_before = (state.cx, state.cy)
    if symbol == "H":
        w = WallId("H", state.cx, state.cy + 1 if state.sy > 0 else state.cy)
        state.stage += 1
        if walls.is_solid(w):
            walls.erase_all(overlay(bomb, w, "below" if state.sy > 0 else "above"))
            state.sy = -state.sy
            kind = "collision"
        else:
            state.cy += state.sy
            kind = "pass"
    elif symbol == "V":
        w = WallId("V", state.cx + 1 if state.sx > 0 else state.cx, state.cy)
        state.stage = 0
        if walls.is_solid(w):
            walls.erase_all(overlay(bomb, w, "left" if state.sx > 0 else "right"))
            state.sx = -state.sx
            kind = "collision"
        else:
            state.cx += state.sx
            kind = "pass"
    else:
        raise ValueError(f"encounter symbol must be H or V, got {symbol!r}")
    return Event(
        encounter_index,
        kind,
        w,
        cell_before,
        (state.sx, state.sy),
        state.stage,
        collision_index if kind == "collision" else 0,
    )


def run(config: RunConfig):
    """Iterate the symbolic engine; returns (event list or None, RunOutcome)."""
    word, state, walls = config.resolved()
    initial_count = len(walls)
    events: Optional[List[Event]] = [] if config.keep_events else None
    enc = col = 0
    status = None
    tunnel = None
    corner_idx = None
    it = word.symbols()
    while True:
        if config.max_encounters is not None and enc >= config.max_encounters:
            status = "cap"
            break
        if config.max_collisions is not None and col >= config.max_collisions:
            status = "cap"
            break
        sym = next(it, None)
        if sym is None:
            if word.corner_encounter is not None:
                status = "corner"
                corner_idx = word.corner_encounter
            else:
                status = "word-exhausted"
            break
        enc += 1
        ev = step_symbolic(state, walls, config.bomb, sym, enc, col + 1)
        if events is not None:
            events.append(ev)
        if config.on_event is not None:
            config.on_event(ev)
        if ev.kind == "collision":
            col += 1
            if config.detector is not None:
                report = config.detector.on_collision(ev)
                if report is not None:
                    status = "tunnel"
                    tunnel = report
                    break
    stats = RunStats(enc, col, len(walls) - initial_count, walls.erased_bounding_box())
    final = (state.cx, state.cy, state.sx, state.sy, state.stage)
    return events, RunOutcome(status, stats, tunnel, corner_idx, final)


def run_geometric(config: RunConfig):
    """Exact-position mode: identical logs on corner-free launches.

    The next encounter is chosen by exact comparison of the distances to the
    next vertical and horizontal grid lines; an exact tie is a corner and
    terminates the run.
    """
    if config.launch is None:
        raise ValueError("geometric mode needs a launch, not an injected word")
    lnch = config.launch
    s = lnch.slope.value
    state = ParticleState(*launch_cell(lnch), lnch.sx, lnch.sy,
                          initial_stage(lnch))
    walls = WallState(config.initially_erased)
    initial_count = len(walls)
    x, y = lnch.x, lnch.y
    events: Optional[List[Event]] = [] if config.keep_events else None
    enc = col = 0
    status = None
    tunnel = None
    corner_idx = None
    if x.denominator == 1 and y.denominator == 1:
        # Launched from a lattice point: the run is over before it starts.
        stats = RunStats(0, 0, 0, walls.erased_bounding_box())
        final = (state.cx, state.cy, state.sx, state.sy, state.stage)
        return events, RunOutcome("corner", stats, None, 0, final)
    while True:
        if config.max_encounters is not None and enc >= config.max_encounters:
            status = "cap"
            break
        if config.max_collisions is not None and col >= config.max_collisions:
            status = "cap"
            break
        dx = (state.cx + 1 - x) if state.sx > 0 else (x - state.cx)
        dy = (state.cy + 1 - y) if state.sy > 0 else (y - state.cy)
        # Compare dx against dy/s without division: the V line comes first
        # when dx * s < dy.
        lhs = dx * s
        if lhs == dy:
            status = "corner"
            corner_idx = enc + 1
            break
        if lhs < dy:
            sym = "V"
            x = Fraction(state.cx + 1 if state.sx > 0 else state.cx)
            y = y + dx * s if state.sy > 0 else y - dx * s
        else:
            sym = "H"
            y = Fraction(state.cy + 1 if state.sy > 0 else state.cy)
            x = x + dy / s if state.sx > 0 else x - dy / s
        enc += 1
        ev = step_symbolic(state, walls, config.bomb, sym, enc, col + 1)
        if events is not None:
            events.append(ev)
        if config.on_event is not None:
            config.on_event(ev)
        if ev.kind == "collision":
            col += 1
            if config.detector is not None:
                report = config.detector.on_collision(ev)
                if report is not None:
                    status = "tunnel"
                    tunnel = report
                    break
    stats = RunStats(enc, col, len(walls) - initial_count, walls.erased_bounding_box())
    final = (state.cx, state.cy, state.sx, state.sy, state.stage)
    return events, RunOutcome(status, stats, tunnel, corner_idx, final)


# ---------------------------------------------------------------------------
# event log serialization (JSONL)
# ---------------------------------------------------------------------------

def event_to_json(e: Event) -> str:
    return json.dumps(
        {
            "i": e.i,
            "kind": e.kind,
            "wall": {"o": e.wall.orient, "x": e.wall.x, "y": e.wall.y},
            "cell": list(e.cell),
            "dir": list(e.dir),
            "stage": e.stage,
        },
        separators=(",", ":"),
    )


def write_events_jsonl(events: Iterable[Event], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(event_to_json(e) + "\n")


def read_events_jsonl(path) -> List[Event]:
    out: List[Event] = []
    col = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            if d["kind"] == "collision":
                col += 1
            out.append(
                Event(
                    d["i"],
                    d["kind"],
                    WallId(d["wall"]["o"], d["wall"]["x"], d["wall"]["y"]),
                    tuple(d["cell"]),
                    tuple(d["dir"]),
                    d["stage"],
                    col if d["kind"] == "collision" else 0,
                )
            )
    return out
