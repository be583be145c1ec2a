"""Tunnel detection, band estimation, and closed-form predictors.

A run "tunnels" when, from some collision onward, every collision repeats the
one a fixed count earlier: same wall orientation, same signs after, same
stage, and a fixed anchor displacement (or two antiparallel displacements for
back-and-forth tunnels).  :class:`TunnelDetector` confirms such a period over
several repeats inside a bounded history window and reports the earliest
in-window collision from which the matching holds uninterrupted — an
empirical onset, not a proof of persistence.

Also here: a least-squares band estimator for runs that align along a ray
without exact periodicity, the closed forms predicting reorganized-tunnel
slopes and wedge periods, the fresh-column bounce-model profiler, and
re-exports of the recorded-trace verifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .tables import TraceResult, scenario_ids, verify_all, verify_trace  # noqa: F401


# ---------------------------------------------------------------------------
# tunnel detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectorConfig:
    """Tuning for periodic-tunnel confirmation and band estimation.

    ``window`` defaults to ``(confirmations + 1) * max_period`` so that any
    candidate period can be fully confirmed from ring history.

    ``word_period`` guards against slopes that shadow a nearby tunnel for a
    stretch and then slip: on a rational slope p/q the encounter sequence
    repeats every p + q encounters, so a persistent tunnel must advance by a
    multiple of that per period.  When set, candidates violating it are
    rejected.
    """

    max_period: int = 4096
    confirmations: int = 3
    window: Optional[int] = None
    min_collisions: int = 0
    check_every: int = 1024
    band_tolerance: float = 1.0
    exclusion_radius: float = 0.0
    word_period: Optional[int] = None

    def resolved_window(self) -> int:
        need = (self.confirmations + 1) * self.max_period
        m = self.window if self.window is not None else need
        if m < need:
            raise ValueError(
                f"history window {m} cannot confirm periods up to "
                f"{self.max_period} ({self.confirmations} times); need >= {need}"
            )
        return m


@dataclass(frozen=True)
class TunnelReport:
    """A confirmed periodic tunnel.

    ``band_slope`` is |dy/dx| of a displacement class in lowest terms, as a
    (numerator, denominator) pair; a vertical band is encoded as (1, 0).
    """

    period: int
    displacements: Tuple[Tuple[int, int], ...]
    onset_collisions: int
    confirmations: int
    band_slope: Tuple[int, int]
    encounter_period: Optional[int] = None
    periodic: bool = True

    def __post_init__(self):
        ds = self.displacements
        if not 1 <= len(ds) <= 2:
            raise ValueError("a tunnel has one or two displacement classes")
        if any(d == (0, 0) for d in ds):
            raise ValueError("displacement classes must be nonzero")
        if len(ds) == 2:
            (a, b), (c, d) = ds
            if a * d - b * c != 0 or a * c + b * d >= 0:
                raise ValueError("two displacement classes must be antiparallel")


def _band_slope(v: Tuple[int, int]) -> Tuple[int, int]:
    dx, dy = abs(v[0]), abs(v[1])
    g = math.gcd(dx, dy)
    return dy // g, dx // g


class TunnelDetector:
    """Online periodic-tunnel detector over a bounded collision history.

    Feed collisions either through :meth:`record` (scalar fields) or
    :meth:`on_collision` (symbolic-engine events); both return a
    :class:`TunnelReport` as soon as one is confirmed, else ``None``.
    """

    def __init__(self, cfg: Optional[DetectorConfig] = None):
        self.cfg = cfg or DetectorConfig()
        self.M = self.cfg.resolved_window()
        self.typ = np.zeros(self.M, dtype=np.int64)
        self.xs = np.zeros(self.M, dtype=np.int64)
        self.ys = np.zeros(self.M, dtype=np.int64)
        self.encs = np.zeros(self.M, dtype=np.int64)
        self.count = 0
        self.report: Optional[TunnelReport] = None
        # Incoming collisions buffer here and flush into the ring in batches;
        # scans only ever fire on a flush boundary, so reports are unaffected.
        self._buf: List[Tuple[int, int, int, int]] = []
        self._flush_at = min(self.cfg.check_every, self.M)

    def record(self, orient_bit: int, x: int, y: int, sx: int, sy: int,
               stage: int, enc: int, col: int) -> Optional[TunnelReport]:
        if self.report is not None:
            return self.report
        self._buf.append(
            (stage << 3 | orient_bit << 2 | (sx > 0) << 1 | (sy > 0), x, y, enc)
        )
        self.count += 1
        if len(self._buf) >= self._flush_at:
            self._flush()
            if self.count % self.cfg.check_every == 0 and self.count >= self.cfg.min_collisions:
                self.report = self._scan()
                return self.report
        return None

    def on_collision(self, ev) -> Optional[TunnelReport]:
        o = 0 if ev.wall.orient == "H" else 1
        return self.record(o, ev.wall.x, ev.wall.y, ev.dir[0], ev.dir[1],
                           ev.stage, ev.i, ev.collision_index)

    def finalize(self) -> Optional[TunnelReport]:
        """Scan whatever history exists; for short logs ending between checks."""
        if self.report is None and self.count >= self.cfg.min_collisions:
            self._flush()
            self.report = self._scan()
        return self.report

    def _flush(self) -> None:
        buf = self._buf
        if not buf:
            return
        vals = np.asarray(buf, dtype=np.int64)
        idx = np.arange(self.count - len(buf), self.count) % self.M
        self.typ[idx] = vals[:, 0]
        self.xs[idx] = vals[:, 1]
        self.ys[idx] = vals[:, 2]
        self.encs[idx] = vals[:, 3]
        buf.clear()

    # -- internals --

    def _gather(self, arr: np.ndarray, g0: int, g1: int) -> np.ndarray:
        """Values for the inclusive global collision-index range [g0, g1]."""
        return arr[np.arange(g0, g1 + 1) % self.M]

    def _scan(self) -> Optional[TunnelReport]:
        cnt = self.count
        t = cnt - 1
        hist = min(cnt, self.M)
        C = self.cfg.confirmations
        k_cap = min(self.cfg.max_period, hist // (C + 1), hist - 3)
        if k_cap < 1:
            return None
        # rev[j] holds the type of collision t - j
        rev = self.typ[(t - np.arange(k_cap + 3)) % self.M]
        cand = np.nonzero(
            (rev[1:k_cap + 1] == rev[0])
            & (rev[2:k_cap + 2] == rev[1])
            & (rev[3:k_cap + 3] == rev[2])
        )[0] + 1
        for k in cand:
            k = int(k)
            win = C * k
            now_t = self._gather(self.typ, t - win + 1, t)
            then_t = self._gather(self.typ, t - win + 1 - k, t - k)
            if not np.array_equal(now_t, then_t):
                continue
            dx = self._gather(self.xs, t - win + 1, t) - self._gather(self.xs, t - win + 1 - k, t - k)
            dy = self._gather(self.ys, t - win + 1, t) - self._gather(self.ys, t - win + 1 - k, t - k)
            pairs = np.unique(np.stack([dx, dy], axis=1), axis=0)
            if len(pairs) == 1:
                v = (int(pairs[0, 0]), int(pairs[0, 1]))
                if v == (0, 0):
                    continue
                classes = (v,)
            elif len(pairs) == 2:
                v = (int(pairs[0, 0]), int(pairs[0, 1]))
                w = (int(pairs[1, 0]), int(pairs[1, 1]))
                if v[0] * w[1] - v[1] * w[0] != 0 or v[0] * w[0] + v[1] * w[1] >= 0:
                    continue
                classes = (v, w)
            else:
                continue
            enc_period = self._encounter_period(k, t, hist, len(classes) == 2)
            if enc_period is False:
                continue
            return self._build_report(k, classes, t, hist, enc_period)
        return None

    def _encounter_period(self, k: int, t: int, hist: int, bidirectional: bool):
        """Per-period encounter advance, or False to reject the candidate.

        A one-way tunnel advances a constant encounter count per period, and
        that count must be a multiple of ``word_period`` when the guard is
        configured.  A back-and-forth tunnel shuttles along a band that may
        lengthen sweep by sweep, so its advance need not be constant; when it
        happens to be (over the double period), the guard still applies.
        """
        C = self.cfg.confirmations
        wp = self.cfg.word_period
        if not bidirectional:
            d = (self._gather(self.encs, t - C * k + 1, t)
                 - self._gather(self.encs, t - C * k + 1 - k, t - k))
            if not bool((d == d[0]).all()):
                return False
            advance = int(d[0])
            if wp and advance % wp:
                return False
            return advance
        if C * k + 2 * k <= hist:
            d = (self._gather(self.encs, t - C * k + 1, t)
                 - self._gather(self.encs, t - C * k + 1 - 2 * k, t - 2 * k))
            if bool((d == d[0]).all()) and wp and int(d[0]) % wp:
                return False
        return None

    def _build_report(self, k: int, classes: tuple, t: int, hist: int,
                      enc_period: Optional[int]) -> TunnelReport:
        lo = t - (hist - k) + 1  # earliest collision whose k-back partner is in history
        ti = self._gather(self.typ, lo, t)
        tk = self._gather(self.typ, lo - k, t - k)
        dxs = self._gather(self.xs, lo, t) - self._gather(self.xs, lo - k, t - k)
        dys = self._gather(self.ys, lo, t) - self._gather(self.ys, lo - k, t - k)
        ok = ti == tk
        in_class = np.zeros(len(ok), dtype=bool)
        for a, b in classes:
            in_class |= (dxs == a) & (dys == b)
        ok &= in_class
        bad = np.nonzero(~ok)[0]
        t0 = lo + int(bad[-1]) + 1 if len(bad) else lo
        onset = t0 - k + 1  # 1-based: first collision of the first matched period
        return TunnelReport(
            period=k,
            displacements=tuple(sorted(classes)),
            onset_collisions=onset,
            confirmations=self.cfg.confirmations,
            band_slope=_band_slope(classes[0]),
            encounter_period=enc_period,
        )


def detect_tunnel(events: Iterable, cfg: Optional[DetectorConfig] = None) -> Optional[TunnelReport]:
    """Run the detector over a recorded event stream (passes are ignored)."""
    det = TunnelDetector(cfg)
    for ev in events:
        if ev.kind != "collision":
            continue
        report = det.on_collision(ev)
        if report is not None:
            return report
    return det.finalize()


# ---------------------------------------------------------------------------
# band estimation for aperiodic alignments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BandEstimate:
    """Least-squares ray through collision anchors, with spread around it."""

    origin: Tuple[float, float]
    direction: Tuple[float, float]
    deviation: float
    count: int

    @property
    def slope(self) -> float:
        ux, uy = self.direction
        if ux == 0:
            return math.inf
        return abs(uy / ux)


def estimate_band(points: Sequence[Tuple[int, int]],
                  cfg: Optional[DetectorConfig] = None) -> Optional[BandEstimate]:
    """Principal-axis ray through anchors outside the exclusion radius.

    Returns ``None`` when too few points remain.  The deviation is the largest
    perpendicular distance to the ray; callers compare it against extent (or
    ``cfg.band_tolerance``) to separate band-shaped runs from blobs.
    """

    cfg = cfg or DetectorConfig()
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        return None
    r = cfg.exclusion_radius
    if r > 0:
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > r]
    if len(pts) < max(2, cfg.min_collisions):
        return None
    center = pts.mean(axis=0)
    d = pts - center
    cov = d.T @ d
    eigvals, eigvecs = np.linalg.eigh(cov)
    u = eigvecs[:, int(np.argmax(eigvals))]
    if u[0] < 0 or (u[0] == 0 and u[1] < 0):
        u = -u
    perp = d @ np.array([-u[1], u[0]])
    return BandEstimate(
        origin=(float(center[0]), float(center[1])),
        direction=(float(u[0]), float(u[1])),
        deviation=float(np.abs(perp).max()),
        count=int(len(pts)),
    )


# ---------------------------------------------------------------------------
# closed-form predictors
# ---------------------------------------------------------------------------

_REORG_TOP = Fraction(3) + Fraction(1, 17)


def predicted_reorg_slope(s) -> Fraction:
    """Slope of the reorganized tunnel for fresh-grid slopes just above 3.

    Defined on 3 <= s <= 3 + 1/17 (the closed form; the endpoint 3 gives 1).
    """

    s = Fraction(s)
    if not Fraction(3) <= s <= _REORG_TOP:
        raise ValueError(f"slope {s} outside [3, 3 + 1/17]")
    return 1 + (3 * s - 9) / (25 - 8 * s)


def s_sequence(count: int) -> List[Tuple[int, int, int]]:
    """First ``count`` terms of the integer-slope cascade (s, x, y).

    s_1 = 3 and s_{n+1} = 6 s_n^2 - 8 s_n + 3, with witnesses x, y advancing
    by x' = 2xy, y' = 6x^2 + 1.  Each term satisfies s = 2x^2 + 1,
    3s = 2y^2 + 1, and s ends in the digit 3.
    """

    if count < 1:
        raise ValueError("count must be >= 1")
    out: List[Tuple[int, int, int]] = []
    s, x, y = 3, 1, 2
    for _ in range(count):
        assert s == 2 * x * x + 1
        assert 3 * s == 2 * y * y + 1
        assert s % 10 == 3
        out.append((s, x, y))
        s, x, y = 6 * s * s - 8 * s + 3, 2 * x * y, 6 * x * x + 1
    return out


def predict_wedge_period(n: int, winged: bool) -> Optional[int]:
    """Predicted collision period for a size-``n`` wedge at slope 3, left wall.

    ``None`` means no covering closed form (not a claim that nothing happens):
    sizes with n % 3 == 2 are only conjecturally understood, and the unwinged
    n + 2 = 3 * 2^p family is observed not to settle into a tunnel.
    """

    if n < 1:
        raise ValueError("wedge size must be >= 1")
    if n % 3 == 0:
        return 14
    if n % 3 == 2:
        return None
    m = (n + 2) // 3  # n % 3 == 1 makes n + 2 divisible by 3
    p = (m & -m).bit_length() - 1
    k = ((m >> p) - 1) // 2
    if winged:
        return 6 + 2 * p
    if k > 0:
        return 6 + 2 * p
    return None


# ---------------------------------------------------------------------------
# fresh-column bounce model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnProfile:
    """Entry times of the single-column bounce model, with quadratic fits.

    ``downs[s]`` / ``ups[s]`` hold the encounter indices at which the particle
    is in square ``s`` heading down / up for the 1st..k_max-th time.  Each
    sequence fits 2k^2 + b k + c exactly; ``fits[(s, dir)]`` stores (b, c).
    """

    k_max: int
    downs: Dict[int, Tuple[int, ...]]
    ups: Dict[int, Tuple[int, ...]]
    fits: Dict[Tuple[int, str], Tuple[int, int]]

    def second_differences(self, square: int, direction: str) -> Tuple[int, ...]:
        seq = (self.downs if direction == "down" else self.ups)[square]
        return tuple(seq[i + 2] - 2 * seq[i + 1] + seq[i] for i in range(len(seq) - 2))


def column_profile(squares: Iterable[int], k_max: int) -> ColumnProfile:
    """Simulate the pure vertical bounce model and profile its entry times.

    One fresh column: a particle between solid floors and ceilings at every
    integer height enters square 0 heading up; each hit clears the wall and
    reflects, each cleared wall is passed.  After encounter ``e`` the particle
    occupies some square with some heading — that is its e-th entry event.
    """

    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    squares = sorted(set(squares))
    downs: Dict[int, List[int]] = {s: [] for s in squares}
    ups: Dict[int, List[int]] = {s: [] for s in squares}
    erased = set()
    sq, up, enc = 0, True, 0
    pending = 2 * len(squares)
    cap = 16 * (k_max + max(abs(s) for s in squares) + 2) ** 2 + 64
    while pending and enc < cap:
        enc += 1
        wall_y = sq + 1 if up else sq
        if wall_y in erased:
            sq += 1 if up else -1
        else:
            erased.add(wall_y)
            up = not up
        if sq in downs:
            lst = ups[sq] if up else downs[sq]
            if len(lst) < k_max:
                lst.append(enc)
                if len(lst) == k_max:
                    pending -= 1
    if pending:
        raise RuntimeError("bounce model failed to fill the requested profile")

    fits: Dict[Tuple[int, str], Tuple[int, int]] = {}
    for s in squares:
        for direction, seq in (("down", downs[s]), ("up", ups[s])):
            b = seq[1] - seq[0] - 6
            c = seq[0] - 2 - b
            for k, val in enumerate(seq, start=1):
                assert val == 2 * k * k + b * k + c, (s, direction, k)
            fits[(s, direction)] = (b, c)
    return ColumnProfile(
        k_max=k_max,
        downs={s: tuple(v) for s, v in downs.items()},
        ups={s: tuple(v) for s, v in ups.items()},
        fits=fits,
    )
