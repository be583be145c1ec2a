"""Golden reference traces: short runs with hand-checked expected outcomes.

Each scenario pins down an engine behavior at the level of individual
encounters or collisions:

* ``table1``-``table3`` - a particle entering a fresh column (previous column
  cleared in the slope-3 style) with a single-wall bomb, driven by an injected
  word whose long HHHHV chunk sits in the first, second, or third slot.  All
  thirteen encounters (collide/pass, wall, direction) are pinned.
* ``table4`` - eleven HHHV chunks chained from the state the three cases
  converge to; 44 encounters ending with a pass into a fresh column, net
  displacement (2,3) from the fresh-column entry.
* ``table6:k=N`` - slope 3 from the left wall with a wedge of size 3k; the
  16 collisions covering one horizontal period (8k+2, 0) plus the repeat.
* ``table7:k=N`` - winged wedge of size 6k+1; 8 collisions covering the
  vertical period (0, 12k+4).
* ``table8:k=K,p=P`` - winged wedge of size 3(2k+1)2^p - 2; the 2p+8
  collisions of one period plus the stage-2 pass that closes it.

The traces double as the arbiter for the wedge wing placement: the winged
and unwinged variants must diverge exactly where the far-corner top edges
sit, and these fixtures were used to pin that geometry down.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .bomb import BombPattern, serialize_bomb, single_wall, wedge
from .driver import EncounterWord, LaunchSpec, launch, word_from_chunks
from .engine import RunConfig, run
from .grid import H, V, WallId, serialize_walls

UR, DR, UL, DL = (1, 1), (1, -1), (-1, 1), (-1, -1)


@dataclass(frozen=True)
class TraceStep:
    """One expected event; ``dir_after``/``stage_after`` of None mean unchecked."""

    kind: str  # "collision" | "pass"
    wall: WallId
    dir_after: Optional[Tuple[int, int]] = None
    stage_after: Optional[int] = None


@dataclass(frozen=True)
class TraceScenario:
    scenario_id: str
    description: str
    bomb: BombPattern
    match: str  # "encounters" | "collisions"
    expected: Tuple[TraceStep, ...]
    word: Optional[EncounterWord] = None
    launch: Optional[LaunchSpec] = None
    start_cell: Tuple[int, int] = (0, 0)
    start_signs: Tuple[int, int] = (1, 1)
    start_stage: int = 0
    initially_erased: Tuple[WallId, ...] = ()
    final_cell: Optional[Tuple[int, int]] = None
    followed_by_pass: Optional[TraceStep] = None


@dataclass(frozen=True)
class TraceResult:
    scenario_id: str
    passed: bool
    steps_checked: int
    first_divergence: Optional[tuple] = None  # (index, expected, actual-or-reason)


# ---------------------------------------------------------------------------
# fresh-column chunk cases (single-wall bomb, injected words)
# ---------------------------------------------------------------------------

# Entry through V(0,0); the column to the left was already cleared.
_FRESH_COLUMN_ERASED = (
    V(0, 0), V(-1, -2), V(-1, -1),
    H(-1, -2), H(-1, -1), H(-1, 0), H(-1, 1),
)


def _steps(rows) -> Tuple[TraceStep, ...]:
    return tuple(TraceStep(kind, wall, d) for kind, wall, d in rows)


_TABLE1_ROWS = [
    ("collision", H(0, 1), DR),
    ("collision", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("collision", H(0, 2), DR),
    ("collision", V(1, 1), DL),
    ("pass", H(0, 1), DL),
    ("pass", H(0, 0), DL),
    ("collision", H(0, -1), UL),
    ("collision", V(0, -1), UR),
    ("pass", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("pass", H(0, 2), UR),
    ("collision", V(1, 2), UL),
]

_TABLE2_ROWS = [
    ("collision", H(0, 1), DR),
    ("collision", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("collision", V(1, 1), UL),
    ("collision", H(0, 2), DL),
    ("pass", H(0, 1), DL),
    ("pass", H(0, 0), DL),
    ("collision", H(0, -1), UL),
    ("collision", V(0, -1), UR),
    ("pass", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("pass", H(0, 2), UR),
    ("collision", V(1, 2), UL),
]

_TABLE3_ROWS = [
    ("collision", H(0, 1), DR),
    ("collision", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("collision", V(1, 1), UL),
    ("collision", H(0, 2), DL),
    ("pass", H(0, 1), DL),
    ("pass", H(0, 0), DL),
    ("collision", V(0, -1), DR),
    ("collision", H(0, -1), UR),
    ("pass", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("pass", H(0, 2), UR),
    ("collision", V(1, 2), UL),
]

# State the three cases converge to: walls cleared by any of them plus the
# fresh-column setup, particle at cell (0,2) heading UL at stage 0.
_CONVERGED_ERASED = _FRESH_COLUMN_ERASED + (
    V(0, -1), V(1, 1), V(1, 2),
    H(0, -1), H(0, 0), H(0, 1), H(0, 2),
)

_TABLE4_ROWS = [
    ("collision", H(0, 3), DL),
    ("pass", H(0, 2), DL),
    ("pass", H(0, 1), DL),
    ("pass", V(0, 0), DL),
    ("pass", H(-1, 0), DL),
    ("pass", H(-1, -1), DL),
    ("pass", H(-1, -2), DL),
    ("collision", V(-1, -3), DR),
    ("collision", H(-1, -3), UR),
    ("pass", H(-1, -2), UR),
    ("pass", H(-1, -1), UR),
    ("pass", V(0, -1), UR),
    ("pass", H(0, 0), UR),
    ("pass", H(0, 1), UR),
    ("pass", H(0, 2), UR),
    ("pass", V(1, 2), UR),
    ("collision", H(1, 3), DR),
    ("collision", H(1, 2), UR),
    ("pass", H(1, 3), UR),
    ("collision", V(2, 3), UL),
    ("collision", H(1, 4), DL),
    ("pass", H(1, 3), DL),
    ("pass", H(1, 2), DL),
    ("pass", V(1, 1), DL),
    ("pass", H(0, 1), DL),
    ("pass", H(0, 0), DL),
    ("pass", H(0, -1), DL),
    ("collision", V(0, -2), DR),
    ("collision", H(0, -2), UR),
    ("pass", H(0, -1), UR),
    ("pass", H(0, 0), UR),
    ("collision", V(1, 0), UL),
    ("pass", H(0, 1), UL),
    ("pass", H(0, 2), UL),
    ("pass", H(0, 3), UL),
    ("collision", V(0, 3), UR),
    ("collision", H(0, 4), DR),
    ("pass", H(0, 3), DR),
    ("pass", H(0, 2), DR),
    ("pass", V(1, 1), DR),
    ("collision", H(1, 1), UR),
    ("pass", H(1, 2), UR),
    ("pass", H(1, 3), UR),
    ("pass", V(2, 3), UR),
]


# ---------------------------------------------------------------------------
# wedge period traces (slope-3 left-wall launches)
# ---------------------------------------------------------------------------

def _wedge_launch() -> LaunchSpec:
    return launch(3, Fraction(0), Fraction(1, 2))


def _csteps(rows) -> Tuple[TraceStep, ...]:
    return tuple(TraceStep("collision", wall, d, st) for wall, st, d in rows)


def _table6_expected(k: int) -> Tuple[TraceStep, ...]:
    return _csteps([
        (H(0, 1), 1, DR),
        (H(0, 0), 2, UR),
        (V(k + 1, 3 * k + 1), 0, UL),
        (H(k, 3 * k + 2), 1, DL),
        (V(-k, -3 * k - 1), 0, DR),
        (H(-k, -3 * k - 1), 1, UR),
        (H(2 * k + 1, 6 * k + 3), 2, DR),
        (H(4 * k + 1, 4), 1, UR),
        (H(4 * k + 1, 5), 2, DR),
        (V(5 * k + 2, -3 * k + 3), 0, DL),
        (H(5 * k + 1, -3 * k + 3), 1, UL),
        (V(2 * k + 2, 6 * k + 2), 0, UR),
        (H(2 * k + 2, 6 * k + 3), 1, DR),
        (H(6 * k + 2, -6 * k + 2), 2, UR),
        # one full horizontal period later the opening pair repeats
        (H(8 * k + 2, 1), 1, DR),
        (H(8 * k + 2, 0), 2, UR),
    ])


def _table7_expected(k: int) -> Tuple[TraceStep, ...]:
    return _csteps([
        (H(0, 1), 1, DR),
        (H(0, 0), 2, UR),
        (H(2 * k + 1, 6 * k + 3), 2, DR),
        (V(3 * k + 2, 3 * k + 1), 0, DL),
        (H(3 * k + 1, 3 * k + 1), 1, UL),
        (H(0, 12 * k + 5), 2, DL),
        (V(-k, 9 * k + 3), 0, DR),
        (H(-k, 9 * k + 3), 1, UR),
    ])


def _table8_expected(k: int, p: int) -> Tuple[Tuple[TraceStep, ...], TraceStep]:
    q = (2 * k + 1) * 2 ** p
    rows = [
        (H(0, 1), 1, DR),
        (H(0, 0), 2, UR),
    ]
    # Bounce ladder out to the right: ceilings at height 3q interleaved with
    # floor bounces produced by the half-size sub-pattern.
    base_x = base_y = 0
    qq = q
    for _ in range(p):
        rows.append((H(base_x + qq, base_y + 3 * qq), 2, DR))
        base_x += 3 * qq // 2
        base_y += 3 * qq // 2
        rows.append((H(base_x, base_y), 2, UR))
        qq //= 2
    rows.append((H((2 * k + 1) * (3 * 2 ** p - 2), 3 * q), 2, DR))
    rows += [
        (V(3 * q - 3 * k - 1, 3 * q - 3 * k - 2), 0, DL),
        (H(3 * q - 3 * k - 2, 3 * q - 3 * k - 2), 1, UL),
        (H(2 * q - 4 * k - 2, 6 * q - 1), 2, DL),
        (V(q - 3 * k - 1, 3 * q + 3 * k), 0, DR),
        (H(q - 3 * k - 1, 3 * q + 3 * k), 1, UR),
    ]
    closing_pass = TraceStep("pass", H(2 * q - 4 * k - 2, 6 * q - 2), UR, 2)
    return _csteps(rows), closing_pass


def _build_registry() -> Dict[str, TraceScenario]:
    reg: Dict[str, TraceScenario] = {}

    def fresh(sid, desc, chunks, rows):
        reg[sid] = TraceScenario(
            scenario_id=sid,
            description=desc,
            bomb=single_wall(),
            match="encounters",
            expected=_steps(rows),
            word=word_from_chunks(chunks),
            start_cell=(0, 0),
            start_signs=UR,
            start_stage=0,
            initially_erased=_FRESH_COLUMN_ERASED,
            final_cell=(0, 2),
        )

    fresh("table1", "fresh column, long chunk first", ["HHHHV", "HHHV", "HHHV"], _TABLE1_ROWS)
    fresh("table2", "fresh column, long chunk second", ["HHHV", "HHHHV", "HHHV"], _TABLE2_ROWS)
    fresh("table3", "fresh column, long chunk third", ["HHHV", "HHHV", "HHHHV"], _TABLE3_ROWS)

    reg["table4"] = TraceScenario(
        scenario_id="table4",
        description="eleven short chunks from the converged state",
        bomb=single_wall(),
        match="encounters",
        expected=_steps(_TABLE4_ROWS),
        word=word_from_chunks(["HHHV"] * 11),
        start_cell=(0, 2),
        start_signs=UL,
        start_stage=0,
        initially_erased=_CONVERGED_ERASED,
        final_cell=(2, 3),
    )

    for k in (1, 2):
        for winged, tag in ((True, ""), (False, ":unwinged")):
            sid = f"table6:k={k}{tag}"
            reg[sid] = TraceScenario(
                scenario_id=sid,
                description=f"wedge size {3 * k}, one horizontal period",
                bomb=wedge(3 * k, winged=winged),
                match="collisions",
                expected=_table6_expected(k),
                launch=_wedge_launch(),
            )

    for k in (1, 2):
        sid = f"table7:k={k}"
        reg[sid] = TraceScenario(
            scenario_id=sid,
            description=f"winged wedge size {6 * k + 1}, one vertical period",
            bomb=wedge(6 * k + 1, winged=True),
            match="collisions",
            expected=_table7_expected(k),
            launch=_wedge_launch(),
        )

    for k, p in ((0, 1), (0, 2), (1, 1)):
        sid = f"table8:k={k},p={p}"
        n = 3 * (2 * k + 1) * 2 ** p - 2
        expected, closing = _table8_expected(k, p)
        reg[sid] = TraceScenario(
            scenario_id=sid,
            description=f"winged wedge size {n}, one diagonal period",
            bomb=wedge(n, winged=True),
            match="collisions",
            expected=expected,
            launch=_wedge_launch(),
            followed_by_pass=closing,
        )

    return reg


_REGISTRY = _build_registry()
_ALIASES = {"table6": "table6:k=1", "table7": "table7:k=1", "table8": "table8:k=0,p=1"}


def scenario_ids() -> Tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def scenario(scenario_id: str) -> TraceScenario:
    sid = _ALIASES.get(scenario_id, scenario_id)
    if sid not in _REGISTRY:
        raise ValueError(f"unknown trace scenario {scenario_id!r}")
    return _REGISTRY[sid]


def _step_of_event(ev, with_stage: bool) -> TraceStep:
    return TraceStep(ev.kind, ev.wall, ev.dir, ev.stage if with_stage else None)


def verify_trace(scenario_id: str) -> TraceResult:
    sc = scenario(scenario_id)
    need = len(sc.expected)
    cfg = RunConfig(
        launch=sc.launch,
        word=sc.word,
        start_cell=sc.start_cell,
        start_signs=sc.start_signs,
        start_stage=sc.start_stage,
        bomb=sc.bomb,
        initially_erased=sc.initially_erased,
        max_collisions=(need + 1) if sc.match == "collisions" else None,
        max_encounters=100_000 if sc.match == "collisions" else need,
    )
    events, outcome = run(cfg)
    if sc.match == "collisions":
        stream = [e for e in events if e.kind == "collision"]
    else:
        stream = events
    checked = 0
    for idx, exp in enumerate(sc.expected):
        if idx >= len(stream):
            return TraceResult(sc.scenario_id, False, checked, (idx + 1, exp, "run ended early"))
        ev = stream[idx]
        mismatch = (
            ev.kind != exp.kind
            or ev.wall != exp.wall
            or (exp.dir_after is not None and ev.dir != exp.dir_after)
            or (exp.stage_after is not None and ev.stage != exp.stage_after)
        )
        if mismatch:
            actual = _step_of_event(ev, exp.stage_after is not None)
            return TraceResult(sc.scenario_id, False, checked, (idx + 1, exp, actual))
        checked += 1
    if sc.final_cell is not None:
        got = outcome.final_state[:2]
        if got != sc.final_cell:
            return TraceResult(sc.scenario_id, False, checked,
                               (len(sc.expected), f"final cell {sc.final_cell}", f"final cell {got}"))
    if sc.followed_by_pass is not None:
        exp = sc.followed_by_pass
        last_idx = next(
            i for i, ev in enumerate(events)
            if ev.kind == "collision" and ev.collision_index == len(sc.expected)
        )
        tail = events[last_idx + 1:]
        ok = False
        for ev in tail:
            if ev.kind == "collision":
                break
            if (
                ev.wall == exp.wall
                and ev.dir == exp.dir_after
                and ev.stage == exp.stage_after
            ):
                ok = True
                break
        if not ok:
            return TraceResult(sc.scenario_id, False, checked,
                               (len(sc.expected) + 1, exp, "closing pass not found"))
        checked += 1
    return TraceResult(sc.scenario_id, True, checked)


def verify_all() -> Tuple[TraceResult, ...]:
    return tuple(verify_trace(sid) for sid in scenario_ids())


def fixture_digest() -> str:
    """Stable hash over every scenario's full definition and expectations."""
    h = hashlib.sha256()
    for sid in scenario_ids():
        sc = _REGISTRY[sid]
        h.update(sid.encode())
        h.update(serialize_bomb(sc.bomb).encode())
        h.update(sc.match.encode())
        if sc.word is not None:
            h.update(sc.word.text.encode())
        if sc.launch is not None:
            h.update(repr((str(sc.launch.slope.value), str(sc.launch.x),
                           str(sc.launch.y), sc.launch.sx, sc.launch.sy)).encode())
        h.update(repr((sc.start_cell, sc.start_signs, sc.start_stage)).encode())
        h.update(serialize_walls(sc.initially_erased).encode())
        for step in sc.expected + ((sc.followed_by_pass,) if sc.followed_by_pass else ()):
            h.update(repr((step.kind, tuple(step.wall), step.dir_after, step.stage_after)).encode())
        h.update(repr(sc.final_cell).encode())
    return h.hexdigest()
