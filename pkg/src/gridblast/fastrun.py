"""High-throughput run engine for long simulations.

Same semantics as the symbolic engine, traded up for speed three ways:

* erased walls live in per-column sorted interval sets, so a flight through
  an already-cleared stretch costs one bisect instead of one step per wall;
* the encounter word is consumed block-wise (a run of H encounters followed
  by one V encounter), with explicit budgets for caps and corner truncation;
* at block boundaries a vectorized scan tests whole windows of upcoming
  blocks against per-column cleared-interval summaries and skips every block
  that provably cannot collide, falling back to exact scalar stepping at the
  first block it cannot clear.

The summaries are sound but incomplete: each records one genuinely-cleared
interval per column, so a "clean" verdict is always safe and a "dirty" one
merely costs a scalar re-check.  Equivalence with the symbolic engine is
enforced test-side on full collision logs.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bomb import BombPattern, overlay_bbox, overlay_spans, single_wall
from .driver import LaunchSpec, cutting_word, launch_cell
from .engine import initial_stage
from .grid import WallId


class IntervalSet:
    """Sorted, disjoint, inclusive integer intervals; adjacent runs coalesce."""

    __slots__ = ("los", "his")

    def __init__(self):
        self.los: List[int] = []
        self.his: List[int] = []

    def covers(self, v: int) -> bool:
        i = bisect_right(self.los, v) - 1
        return i >= 0 and self.his[i] >= v

    def covering_interval(self, v: int) -> Optional[Tuple[int, int]]:
        i = bisect_right(self.los, v) - 1
        if i >= 0 and self.his[i] >= v:
            return self.los[i], self.his[i]
        return None

    def first_uncovered_ge(self, v: int) -> int:
        i = bisect_right(self.los, v) - 1
        if i >= 0 and self.his[i] >= v:
            return self.his[i] + 1
        return v

    def first_uncovered_le(self, v: int) -> int:
        i = bisect_right(self.los, v) - 1
        if i >= 0 and self.his[i] >= v:
            return self.los[i] - 1
        return v

    def add_span(self, lo: int, hi: int) -> Tuple[int, int, int]:
        """Cover [lo, hi]; returns (newly covered count, merged lo, merged hi)."""
        los, his = self.los, self.his
        left = bisect_left(his, lo - 1)
        right = bisect_right(los, hi + 1)
        if left == right:
            los.insert(left, lo)
            his.insert(left, hi)
            return hi - lo + 1, lo, hi
        covered = 0
        for t in range(left, right):
            a = los[t] if los[t] > lo else lo
            b = his[t] if his[t] < hi else hi
            if b >= a:
                covered += b - a + 1
        mlo = min(lo, los[left])
        mhi = max(hi, his[right - 1])
        los[left:right] = [mlo]
        his[left:right] = [mhi]
        return (hi - lo + 1) - covered, mlo, mhi

    def total(self) -> int:
        return sum(h - l + 1 for l, h in zip(self.los, self.his))


@dataclass
class FastConfig:
    launch: LaunchSpec
    bomb: BombPattern = field(default_factory=single_wall)
    initially_erased: Tuple[WallId, ...] = ()
    max_collisions: Optional[int] = None
    max_encounters: Optional[int] = None
    detector: Optional[object] = None  # duck-typed: record(...) -> report or None
    snapshots_at: Tuple[int, ...] = ()  # collision counts at which to save the bbox
    sample_every: int = 0  # keep every Nth collision anchor


@dataclass
class FastResult:
    status: str  # "tunnel" | "corner" | "cap"
    encounters: int
    collisions: int
    walls_erased: int
    bounding_box: Optional[Tuple[int, int, int, int]]
    final_state: Tuple[int, int, int, int, int]
    tunnel: Optional[object] = None
    corner_encounter: Optional[int] = None
    snapshots: Dict[int, Tuple[int, int, int, int]] = field(default_factory=dict)
    samples: Optional[List[Tuple[int, int]]] = None


_EMPTY_LO, _EMPTY_HI = 0, -1  # summary sentinel: empty interval


class _FastEngine:
    def __init__(self, cfg: FastConfig):
        self.cfg = cfg
        lnch = cfg.launch
        self.word = cutting_word(lnch)
        corner = self.word.corner_encounter
        self.corner = corner
        cut = math.inf
        if corner is not None:
            cut = max(corner - 1, 0)
        if cfg.max_encounters is not None:
            cut = min(cut, cfg.max_encounters)
        self.enc_cut = cut
        self.max_col = cfg.max_collisions if cfg.max_collisions is not None else math.inf

        self.cx, self.cy = launch_cell(lnch)
        self.sx = lnch.sx
        self.sy = lnch.sy
        self.stage = initial_stage(lnch)
        self.enc = 0
        self.col = 0
        self.walls_new = 0
        self.status: Optional[str] = None
        self.tunnel = None

        self.h: Dict[int, IntervalSet] = {}
        self.v: Dict[int, IntervalSet] = {}
        self.have_bbox = False
        self.bx0 = self.by0 = self.bx1 = self.by1 = 0

        self.spans = {s: overlay_spans(cfg.bomb, s) for s in ("below", "above", "left", "right")}
        self.obbox = {s: overlay_bbox(cfg.bomb, s) for s in ("below", "above", "left", "right")}

        # per-column summaries backing the vectorized clean-flight test
        self.col_base = -512
        n = 1024
        self.h_lo = np.full(n, _EMPTY_LO, dtype=np.int64)
        self.h_hi = np.full(n, _EMPTY_HI, dtype=np.int64)
        self.v_lo = np.full(n, _EMPTY_LO, dtype=np.int64)
        self.v_hi = np.full(n, _EMPTY_HI, dtype=np.int64)

        for w in cfg.initially_erased:
            store = self.h if w.orient == "H" else self.v
            iv = store.get(w.x)
            if iv is None:
                iv = store[w.x] = IntervalSet()
            iv.add_span(w.y, w.y)
            self._bbox_add(w.x, w.y, w.x, w.y)
        for x, iv in self.h.items():
            self._set_summary(True, x, iv.los[-1], iv.his[-1])
        for x, iv in self.v.items():
            self._set_summary(False, x, iv.los[-1], iv.his[-1])

        # word blocks: sizes of consecutive H runs, one V after each
        if self.word.kind == "periodic":
            self.runs = np.asarray(self.word.runs, dtype=np.int64)
            self.runs_list = [int(r) for r in self.word.runs]
            self.initial_run = self.word.initial_run
            self._stream = None
        else:
            self.runs = None
            self.runs_list = None
            self.initial_run = None
            self._stream = self.word.symbols()
            self._stream_blocks: List[int] = []
            self._stream_done = False
        self.block_idx = 0
        self.clean_streak = 0  # collision-free blocks since the last hit

        self.snap_left = sorted(cfg.snapshots_at)
        self.snapshots: Dict[int, Tuple[int, int, int, int]] = {}
        self.samples: Optional[List[Tuple[int, int]]] = [] if cfg.sample_every else None

        self.chunk = 16  # adaptive vector window

    # -- bookkeeping --------------------------------------------------------

    def _bbox_add(self, x0, y0, x1, y1):
        if not self.have_bbox:
            self.bx0, self.by0, self.bx1, self.by1 = x0, y0, x1, y1
            self.have_bbox = True
            return
        if x0 < self.bx0:
            self.bx0 = x0
        if y0 < self.by0:
            self.by0 = y0
        if x1 > self.bx1:
            self.bx1 = x1
        if y1 > self.by1:
            self.by1 = y1

    def _ensure_cols(self, lo: int, hi: int):
        base, size = self.col_base, len(self.h_lo)
        if lo >= base and hi < base + size:
            return
        new_base = min(base, lo - 512)
        new_end = max(base + size, hi + 512)
        n = new_end - new_base
        off = base - new_base

        def grow(arr, fill):
            out = np.full(n, fill, dtype=np.int64)
            out[off:off + size] = arr
            return out

        self.h_lo = grow(self.h_lo, _EMPTY_LO)
        self.h_hi = grow(self.h_hi, _EMPTY_HI)
        self.v_lo = grow(self.v_lo, _EMPTY_LO)
        self.v_hi = grow(self.v_hi, _EMPTY_HI)
        self.col_base = new_base

    def _set_summary(self, is_h: bool, x: int, lo: int, hi: int):
        i = x - self.col_base
        if 0 <= i < len(self.h_lo):
            if is_h:
                self.h_lo[i] = lo
                self.h_hi[i] = hi
            else:
                self.v_lo[i] = lo
                self.v_hi[i] = hi

    def _erase(self, ax: int, ay: int, side: str):
        h, v = self.h, self.v
        new = 0
        for orient, dx, dlo, dhi in self.spans[side]:
            x = ax + dx
            store = h if orient == "H" else v
            iv = store.get(x)
            if iv is None:
                iv = store[x] = IntervalSet()
            added, mlo, mhi = iv.add_span(ay + dlo, ay + dhi)
            new += added
            self._set_summary(orient == "H", x, mlo, mhi)
        self.walls_new += new
        ox0, oy0, ox1, oy1 = self.obbox[side]
        self._bbox_add(ax + ox0, ay + oy0, ax + ox1, ay + oy1)

    def _block_size(self, b: int) -> int:
        if self.runs_list is not None:
            if b == 0:
                return self.initial_run
            return self.runs_list[(b - 1) % len(self.runs_list)]
        blocks = self._stream_blocks
        while len(blocks) <= b and not self._stream_done:
            m = 0
            got_v = False
            for sym in self._stream:
                if sym == "H":
                    m += 1
                else:
                    got_v = True
                    break
            blocks.append(m)
            if not got_v:
                # trailing partial run; the encounter budget stops before overrun
                self._stream_done = True
        if b < len(blocks):
            return blocks[b]
        return -1

    # -- collision plumbing ---------------------------------------------------

    def _collide(self, orient_bit: int, ax: int, ay: int, side: str) -> bool:
        """Erase, count, notify; returns True if the run must stop here."""
        self._erase(ax, ay, side)
        self.col += 1
        if self.samples is not None and self.col % self.cfg.sample_every == 0:
            self.samples.append((ax, ay))
        while self.snap_left and self.col == self.snap_left[0]:
            self.snap_left.pop(0)
            self.snapshots[self.col] = (self.bx0, self.by0, self.bx1, self.by1)
        det = self.cfg.detector
        if det is not None:
            report = det.record(orient_bit, ax, ay, self.sx, self.sy, self.stage, self.enc, self.col)
            if report is not None:
                self.status = "tunnel"
                self.tunnel = report
                return True
        if self.col >= self.max_col:
            self.status = "cap"
            return True
        return False

    def _stopped_on_budget(self) -> str:
        if self.cfg.max_encounters is not None and self.enc >= self.cfg.max_encounters:
            return "cap"
        return "corner"

    # -- scalar stepping --------------------------------------------------------

    def _run_block_scalar(self, m: int) -> bool:
        """Process one block (m H encounters then one V); True means stop."""
        col_before = self.col
        left = m
        while left > 0:
            budget = self.enc_cut - self.enc
            if budget <= 0:
                self.status = self._stopped_on_budget()
                return True
            iv = self.h.get(self.cx)
            if self.sy > 0:
                target = self.cy + 1
                solid = iv.first_uncovered_ge(target) if iv is not None else target
                gap = solid - target
            else:
                target = self.cy
                solid = iv.first_uncovered_le(target) if iv is not None else target
                gap = target - solid
            if gap >= left:
                # the rest of the run passes through already-cleared walls
                take = left if left <= budget else int(budget)
                self.cy += self.sy * take
                self.stage += take
                self.enc += take
                if take < left:
                    self.status = self._stopped_on_budget()
                    return True
                if gap > 0:
                    got = iv.covering_interval(target)
                    self._set_summary(True, self.cx, got[0], got[1])
                left = 0
                break
            if gap + 1 > budget:
                # budget admits only (some of) the leading passes
                take = int(budget)
                self.cy += self.sy * take
                self.stage += take
                self.enc += take
                self.status = self._stopped_on_budget()
                return True
            self.cy += self.sy * gap
            self.stage += gap + 1
            self.enc += gap + 1
            left -= gap + 1
            if self.sy > 0:
                wy = self.cy + 1
                side = "below"
            else:
                wy = self.cy
                side = "above"
            self.sy = -self.sy
            if self._collide(0, self.cx, wy, side):
                return True
        # the block's vertical encounter
        if self.enc_cut - self.enc < 1:
            self.status = self._stopped_on_budget()
            return True
        vx = self.cx + 1 if self.sx > 0 else self.cx
        iv = self.v.get(vx)
        self.enc += 1
        self.stage = 0
        if iv is not None and iv.covers(self.cy):
            got = iv.covering_interval(self.cy)
            self._set_summary(False, vx, got[0], got[1])
            self.cx += self.sx
        else:
            side = "left" if self.sx > 0 else "right"
            self.sx = -self.sx
            if self._collide(1, vx, self.cy, side):
                return True
        self.block_idx += 1
        self.clean_streak = self.clean_streak + 1 if self.col == col_before else 0
        return False

    # -- vectorized clean-flight traversal ----------------------------------------

    def _try_vector(self) -> bool:
        """Skip whole provably-clean blocks; returns True if progress was made."""
        b0 = self.block_idx
        w = self.chunk
        budget = self.enc_cut - self.enc
        if budget <= 1:
            return False
        L = len(self.runs)
        # Scalar precheck of the first block: when it is dirty (the common case
        # while a blob is still growing) skip the array setup entirely.
        m0 = self.runs_list[(b0 - 1) % L]
        if m0 + 1 > budget:
            return False
        x0 = self.cx
        vx0 = x0 + 1 if self.sx > 0 else x0
        self._ensure_cols(min(x0, vx0), max(x0, vx0))
        y_end0 = self.cy + self.sy * m0
        a0, b0y = (self.cy + 1, y_end0) if self.sy > 0 else (y_end0 + 1, self.cy)
        xi0 = x0 - self.col_base
        vi0 = vx0 - self.col_base
        if not (
            (m0 == 0 or (self.h_lo[xi0] <= a0 and b0y <= self.h_hi[xi0]))
            and self.v_lo[vi0] <= y_end0 <= self.v_hi[vi0]
        ):
            self.chunk = 16
            self.clean_streak = 0
            return False
        m = self.runs[(b0 - 1 + np.arange(w)) % L]
        costs = np.cumsum(m + 1)  # block i costs m_i H encounters plus one V
        w_fit = int(np.searchsorted(costs, budget, side="right"))
        if w_fit == 0:
            return False
        if w_fit < w:
            w = w_fit
            m = m[:w]
            costs = costs[:w]
        ends = np.cumsum(m)
        y_start = self.cy + self.sy * (ends - m)
        y_end = self.cy + self.sy * ends
        xs = self.cx + self.sx * np.arange(w)
        vxs = xs + 1 if self.sx > 0 else xs
        lo_x = int(min(xs[0], xs[-1], vxs[0], vxs[-1]))
        hi_x = int(max(xs[0], xs[-1], vxs[0], vxs[-1]))
        self._ensure_cols(lo_x, hi_x)
        xi = xs - self.col_base
        vi = vxs - self.col_base
        if self.sy > 0:
            h_a, h_b = y_start + 1, y_end
        else:
            h_a, h_b = y_end + 1, y_start
        clean_h = (m == 0) | ((self.h_lo[xi] <= h_a) & (h_b <= self.h_hi[xi]))
        clean_v = (self.v_lo[vi] <= y_end) & (y_end <= self.v_hi[vi])
        clean = clean_h & clean_v
        if clean.all():
            n = w
        else:
            n = int(np.argmin(clean))
        if n == 0:
            self.chunk = 16
            self.clean_streak = 0
            return False
        self.cx += self.sx * n
        self.cy = int(y_end[n - 1])
        self.enc += int(costs[n - 1])
        self.stage = 0
        self.block_idx += n
        if n == w:
            if self.chunk < 4096:
                self.chunk *= 2
        else:
            # size the next window to the observed flight length; the block
            # after the skipped stretch is presumed dirty, so go scalar first
            self.chunk = max(16, min(4096, 1 << (2 * n - 1).bit_length()))
            self.clean_streak = 0
        return True

    # -- main loop -------------------------------------------------------------------

    def run(self) -> FastResult:
        if (self.corner is None and self.cfg.max_collisions is None
                and self.cfg.max_encounters is None and self.cfg.detector is None):
            raise ValueError("unbounded run: set max_collisions, max_encounters, or a detector")
        if self.max_col <= 0:
            self.status = "cap"
        while self.status is None:
            if self.enc_cut - self.enc <= 0:
                self.status = self._stopped_on_budget()
                break
            if (self.clean_streak >= 4 and self.block_idx > 0
                    and self.runs is not None and self._try_vector()):
                continue
            m = self._block_size(self.block_idx)
            if m < 0:
                self.status = "word-exhausted"
                break
            if self._run_block_scalar(m):
                break
        bbox = (self.bx0, self.by0, self.bx1, self.by1) if self.have_bbox else None
        return FastResult(
            status=self.status,
            encounters=self.enc,
            collisions=self.col,
            walls_erased=self.walls_new,
            bounding_box=bbox,
            final_state=(self.cx, self.cy, self.sx, self.sy, self.stage),
            tunnel=self.tunnel,
            corner_encounter=self.corner if self.status == "corner" else None,
            snapshots=self.snapshots,
            samples=self.samples,
        )


def fast_run(cfg: FastConfig) -> FastResult:
    """Run a launch to its corner, a cap, or a detector report, quickly."""
    return _FastEngine(cfg).run()
