"""Batch tunnel surveys over slope/region grids with resumable CSV output.

A sweep runs one bounded simulation per (slope, region, bomb) combination,
classifies the outcome, and writes one CSV row per combination.  Results are
deterministic functions of the combination alone, so a sweep may be executed
in any order, on any number of worker processes, or interrupted and resumed
from its checkpoint — the finished CSV is byte-identical in every case.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import get_context
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .analysis import DetectorConfig, TunnelDetector
from .bomb import parse_bomb_token
from .driver import SlopeSpec, launch, region_of
from .exactnum import QuadraticValue
from .fastrun import FastConfig, fast_run

CSV_HEADER = (
    "slope,region,bomb,outcome,period,disp1_dx,disp1_dy,disp2_dx,disp2_dy,"
    "onset_collisions,tunnel_slope_num,tunnel_slope_den,total_collisions,"
    "walls_erased,bbox_xmin,bbox_ymin,bbox_xmax,bbox_ymax"
)

CHECKPOINT_VERSION = 1


class SweepError(Exception):
    """A sweep could not be planned, resumed, or executed."""


# ---------------------------------------------------------------------------
# slope and region selectors
# ---------------------------------------------------------------------------

def parse_slope_token(token: str):
    """One exact slope: ``146``, ``5/3``, ``3.01``, ``3+1/17``, ``quad:a:b:d[:c]``.

    The quadratic form also accepts commas between components.
    """
    token = token.strip()
    if not token:
        raise SweepError("empty slope token")
    try:
        if token.startswith("quad:"):
            body = token[len("quad:"):].replace(",", ":")
            parts = [int(p) for p in body.split(":")]
            if len(parts) == 3:
                parts.append(1)
            if len(parts) != 4:
                raise ValueError("quad slope needs quad:a:b:d[:c]")
            return QuadraticValue(*parts)
        if "+" in token:
            whole, frac = token.split("+", 1)
            return Fraction(whole) + Fraction(frac)
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise SweepError(f"bad slope token {token!r}: {exc}") from None


def format_slope(value) -> str:
    """Canonical token for an exact slope value (round-trips parse_slope_token)."""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else str(value)
    return f"quad:{value.a}:{value.b}:{value.d}:{value.c}"


def parse_slope_list(text: str) -> Tuple[str, ...]:
    """Comma-separated slope atoms, canonicalized, order preserved, deduped.

    Besides single tokens, two range forms expand: ``even:A..B`` (even
    integers, inclusive) and ``A..B:S`` (arithmetic progression with exact
    step ``S``, default 1, endpoint included when hit exactly).
    """
    out: Dict[str, None] = {}
    for atom in text.split(","):
        atom = atom.strip()
        if not atom:
            continue
        if atom.startswith("even:") and ".." in atom:
            lo_s, hi_s = atom[len("even:"):].split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            lo += lo % 2
            for n in range(lo, hi + 1, 2):
                out[format_slope(Fraction(n))] = None
        elif ".." in atom:
            head, _, step_s = atom.partition("..")[2].partition(":")
            lo = parse_slope_token(atom.partition("..")[0])
            hi = parse_slope_token(head)
            step = parse_slope_token(step_s) if step_s else Fraction(1)
            if not isinstance(lo, Fraction) or not isinstance(hi, Fraction) \
                    or not isinstance(step, Fraction) or step <= 0:
                raise SweepError(f"range atom {atom!r} needs rational bounds and step")
            v = lo
            while v <= hi:
                out[format_slope(v)] = None
                v += step
        else:
            out[format_slope(parse_slope_token(atom))] = None
    if not out:
        raise SweepError(f"no slopes in {text!r}")
    return tuple(out)


def region_representative(slope, index: int) -> Tuple[Fraction, Fraction]:
    """A start point interior to region ``index``: the line whose intercept
    sits mid-window, taken at the midpoint of its crossing of the unit square.
    """
    spec = slope if isinstance(slope, SlopeSpec) else SlopeSpec(slope)
    n = spec.p + spec.q
    if not 0 <= index < n:
        raise SweepError(f"region {index} out of range for slope {spec.value} (0..{n - 1})")
    s = spec.value
    c = 1 - Fraction(2 * index + 1, 2 * spec.q)
    x_lo = max(Fraction(0), -c / s)
    x_hi = min(Fraction(1), (1 - c) / s)
    x = (x_lo + x_hi) / 2
    y = s * x + c
    assert region_of(spec, x, y) == index
    return x, y


def _parse_point(text: str) -> Tuple[Fraction, Fraction]:
    try:
        xs, ys = text.split(",")
        return Fraction(xs), Fraction(ys)
    except (ValueError, ZeroDivisionError):
        raise SweepError(f"bad point {text!r}; expected x,y with exact fractions") from None


def region_labels(spec: "SweepSpec", slope_token: str) -> Tuple[str, ...]:
    """The region column values this sweep produces for one slope."""
    sel = spec.regions
    if sel == "all":
        value = parse_slope_token(slope_token)
        if not isinstance(value, Fraction):
            raise SweepError("regions='all' needs rational slopes; give explicit points")
        n = value.numerator + value.denominator
        return tuple(str(i) for i in range(n))
    if sel.startswith("points:"):
        pts = [p for p in sel[len("points:"):].split(";") if p]
        for p in pts:
            _parse_point(p)  # validate early
        return tuple(pts)
    labels = tuple(t.strip() for t in sel.split(",") if t.strip())
    if not labels or not all(t.isdigit() for t in labels):
        raise SweepError(f"bad region selector {sel!r}")
    return labels


def _resolve_start(slope_value, label: str) -> Tuple[Fraction, Fraction]:
    if label.isdigit():
        return region_representative(slope_value, int(label))
    return _parse_point(label)


# ---------------------------------------------------------------------------
# sweep plan and records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """What to sweep: slope tokens, a region selector, bombs, one cap.

    ``regions`` is ``"all"``, a comma list of region indices, or
    ``"points:x,y;x,y"`` for explicit starts.  ``checkpoint_every`` sets how
    many finished combinations may accumulate between checkpoint writes; it
    does not affect the results, only durability, so it stays out of the
    digest.
    """

    slopes: Tuple[str, ...]
    regions: str = "all"
    bombs: Tuple[str, ...] = ("single",)
    cap: int = 10 ** 6
    checkpoint_every: int = 1

    def __post_init__(self):
        if self.cap < 1:
            raise SweepError("cap must be a positive collision count")
        if self.checkpoint_every < 1:
            raise SweepError("checkpoint_every must be >= 1")
        object.__setattr__(self, "slopes", tuple(self.slopes))
        object.__setattr__(self, "bombs", tuple(self.bombs))
        for tok in self.bombs:
            parse_bomb_token(tok)
        for tok in self.slopes:
            parse_slope_token(tok)

    def digest(self) -> str:
        blob = json.dumps(
            {"slopes": list(self.slopes), "regions": self.regions,
             "bombs": list(self.bombs), "cap": self.cap},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SweepRecord:
    """One finished combination; fields past ``outcome`` are outcome-dependent."""

    slope: str
    region: str
    bomb: str
    outcome: str
    period: Optional[int] = None
    displacements: Tuple[Tuple[int, int], ...] = ()
    onset_collisions: Optional[int] = None
    band_slope: Optional[Tuple[int, int]] = None
    total_collisions: int = 0
    walls_erased: int = 0
    bounding_box: Optional[Tuple[int, int, int, int]] = None

    def key(self) -> str:
        return f"{self.slope}|{self.region}|{self.bomb}"

    def to_row(self) -> List[str]:
        d1 = self.displacements[0] if self.displacements else ("", "")
        d2 = self.displacements[1] if len(self.displacements) > 1 else ("", "")
        band = self.band_slope if self.band_slope else ("", "")
        bbox = self.bounding_box if self.bounding_box else ("", "", "", "")
        cells = [
            self.slope, self.region, self.bomb, self.outcome,
            self.period, d1[0], d1[1], d2[0], d2[1],
            self.onset_collisions, band[0], band[1],
            self.total_collisions, self.walls_erased,
            bbox[0], bbox[1], bbox[2], bbox[3],
        ]
        return ["" if v is None else str(v) for v in cells]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "SweepRecord":
        if len(row) != 18:
            raise SweepError(f"malformed sweep row of {len(row)} cells")
        num = lambda s: int(s) if s else None  # noqa: E731
        disp = []
        if row[5]:
            disp.append((int(row[5]), int(row[6])))
        if row[7]:
            disp.append((int(row[7]), int(row[8])))
        return cls(
            slope=row[0], region=row[1], bomb=row[2], outcome=row[3],
            period=num(row[4]), displacements=tuple(disp),
            onset_collisions=num(row[9]),
            band_slope=(int(row[10]), int(row[11])) if row[10] else None,
            total_collisions=int(row[12]), walls_erased=int(row[13]),
            bounding_box=tuple(int(c) for c in row[14:18]) if row[14] else None,
        )


def record_sort_key(rec: SweepRecord):
    value = parse_slope_token(rec.slope)
    approx = float(value.numerator) / value.denominator if isinstance(value, Fraction) \
        else float(value)
    region = (0, int(rec.region), "") if rec.region.isdigit() else (1, 0, rec.region)
    return (approx, rec.slope, region, rec.bomb)


def plan_tasks(spec: SweepSpec) -> List[Tuple[str, str, str]]:
    """All (slope, region, bomb) combinations in canonical order."""
    tasks: Dict[Tuple[str, str, str], None] = {}
    for slope_tok in spec.slopes:
        for label in region_labels(spec, slope_tok):
            for bomb_tok in spec.bombs:
                tasks[(slope_tok, label, bomb_tok)] = None
    return sorted(tasks, key=lambda t: record_sort_key(
        SweepRecord(slope=t[0], region=t[1], bomb=t[2], outcome="")))


# ---------------------------------------------------------------------------
# one combination
# ---------------------------------------------------------------------------

def run_combination(slope_token: str, region_label: str, bomb_token: str,
                    cap: int) -> SweepRecord:
    """Run one bounded simulation and classify its outcome.

    ``tunnel`` and ``corner`` come straight from the engine.  A capped run is
    ``blob`` when the erased region's bounding box was still growing on every
    side through the second half of the run, else plain ``cap``.
    """
    slope_value = parse_slope_token(slope_token)
    x, y = _resolve_start(slope_value, region_label)
    lnch = launch(slope_value, x, y)
    wp = slope_value.numerator + slope_value.denominator \
        if isinstance(slope_value, Fraction) else None
    detector = TunnelDetector(DetectorConfig(word_period=wp))
    mid = max(1, cap // 2)
    result = fast_run(FastConfig(
        launch=lnch,
        bomb=parse_bomb_token(bomb_token),
        max_collisions=cap,
        detector=detector,
        snapshots_at=(mid,),
    ))
    base = dict(slope=slope_token, region=region_label, bomb=bomb_token,
                total_collisions=result.collisions,
                walls_erased=result.walls_erased,
                bounding_box=result.bounding_box)
    report = result.tunnel if result.status == "tunnel" else detector.finalize()
    if report is not None:
        return SweepRecord(
            outcome="tunnel", period=report.period,
            displacements=report.displacements,
            onset_collisions=report.onset_collisions,
            band_slope=report.band_slope, **base,
        )
    if result.status == "corner":
        return SweepRecord(outcome="corner", **base)
    snap = result.snapshots.get(mid)
    grew = (
        snap is not None and result.bounding_box is not None
        and result.bounding_box[0] < snap[0] and result.bounding_box[1] < snap[1]
        and result.bounding_box[2] > snap[2] and result.bounding_box[3] > snap[3]
    )
    return SweepRecord(outcome="blob" if grew else "cap", **base)


def _execute(args: Tuple[str, str, str, int]) -> SweepRecord:
    return run_combination(*args)


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------

def _load_checkpoint(path: str, digest: str) -> Dict[str, SweepRecord]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("version") != CHECKPOINT_VERSION:
            raise SweepError(f"checkpoint {path} has an unknown version")
        if data.get("digest") != digest:
            raise SweepError(
                f"checkpoint {path} belongs to a different sweep; "
                "delete it or rerun without --resume"
            )
        if data.get("count") != len(data["rows"]):
            raise SweepError(f"checkpoint {path} is truncated")
        records = [SweepRecord.from_row(row) for row in data["rows"]]
    except SweepError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise SweepError(f"corrupt checkpoint {path}: {exc}") from None
    return {rec.key(): rec for rec in records}


def _save_checkpoint(path: str, digest: str, done: Dict[str, SweepRecord]) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "digest": digest,
        "count": len(done),
        "rows": [done[k].to_row() for k in sorted(done)],
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

def iter_sweep(spec: SweepSpec, jobs: int = 1, checkpoint: Optional[str] = None,
               on_record: Optional[Callable[[SweepRecord], None]] = None,
               ) -> Iterator[SweepRecord]:
    """Yield one record per combination, checkpointed records first.

    With ``jobs > 1`` combinations run on forked worker processes; yield order
    then follows completion, but record contents never depend on it.
    ``on_record`` fires after each new record is durably checkpointed, so a
    callback that raises simulates an interruption with no lost work.
    """
    digest = spec.digest()
    done: Dict[str, SweepRecord] = {}
    if checkpoint and os.path.exists(checkpoint):
        done = _load_checkpoint(checkpoint, digest)
    tasks = plan_tasks(spec)
    keys = {t: "|".join(t) for t in tasks}
    for t in tasks:
        if keys[t] in done:
            yield done[keys[t]]
    pending = [t for t in tasks if keys[t] not in done]
    fresh = 0

    def finish(rec: SweepRecord) -> SweepRecord:
        nonlocal fresh
        done[rec.key()] = rec
        fresh += 1
        if checkpoint and (fresh % spec.checkpoint_every == 0
                           or fresh == len(pending)):
            _save_checkpoint(checkpoint, digest, done)
        if on_record is not None:
            on_record(rec)
        return rec

    if jobs <= 1:
        for slope_tok, label, bomb_tok in pending:
            yield finish(run_combination(slope_tok, label, bomb_tok, spec.cap))
        return
    ctx = get_context("fork")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
        futures = [pool.submit(_execute, (s, r, b, spec.cap))
                   for s, r, b in pending]
        try:
            for fut in as_completed(futures):
                yield finish(fut.result())
        finally:
            for fut in futures:
                fut.cancel()


def run_sweep(spec: SweepSpec, jobs: int = 1, checkpoint: Optional[str] = None,
              on_record: Optional[Callable[[SweepRecord], None]] = None,
              ) -> List[SweepRecord]:
    """All records for the sweep, in canonical CSV order."""
    records = list(iter_sweep(spec, jobs=jobs, checkpoint=checkpoint,
                              on_record=on_record))
    return sorted(records, key=record_sort_key)


def write_csv(records: Sequence[SweepRecord], path: str) -> None:
    """Atomically write records (already in canonical order) as CSV."""
    lines = [CSV_HEADER]
    lines.extend(",".join(rec.to_row()) for rec in records)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def sweep_to_csv(spec: SweepSpec, out: str, jobs: int = 1, resume: bool = False,
                 checkpoint: Optional[str] = None,
                 on_record: Optional[Callable[[SweepRecord], None]] = None) -> str:
    """Run (or resume) a sweep and write its CSV; returns the CSV path."""
    checkpoint = checkpoint or f"{out}.checkpoint"
    if not resume and os.path.exists(checkpoint):
        os.remove(checkpoint)
    records = run_sweep(spec, jobs=jobs, checkpoint=checkpoint,
                        on_record=on_record)
    write_csv(records, out)
    return out
