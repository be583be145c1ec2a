"""Encounter-word generation and starting-state classification.

Unfolding the reflections turns the particle's path into a straight line, so
the H/V sequence of grid-line encounters is the line's cutting word.  For a
rational slope p/q the word is periodic with exactly p H's and q V's per
period; for quadratic-irrational slopes it is streamed one symbol at a time
from exact Beatty floors.  Corners (simultaneous H and V crossings) are
detected exactly and surface as :class:`CornerLineError` or as a recorded
corner index on the word, never as an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .exactnum import ExactNumber, QuadraticValue, floor_exact


class DegenerateSlopeError(ValueError):
    """Horizontal or vertical motion: no two-family cutting word exists."""


class CornerLineError(ValueError):
    """The launch sits on a line through a lattice point.

    ``encounter`` is the 1-based encounter index at which the corner is
    reached (0 when the start itself is a lattice point), when known.
    """

    def __init__(self, message: str, encounter: Optional[int] = None):
        super().__init__(message)
        self.encounter = encounter


@dataclass(frozen=True)
class SlopeSpec:
    """Validated slope magnitude: positive, exact, rational or quadratic."""

    value: ExactNumber

    def __post_init__(self):
        v = self.value
        if isinstance(v, int):
            v = Fraction(v)
        elif isinstance(v, QuadraticValue) and v.is_rational:
            v = v.as_fraction()
        if not isinstance(v, (Fraction, QuadraticValue)):
            raise TypeError(f"slope must be exact, got {type(self.value)!r}")
        if v <= 0:
            raise DegenerateSlopeError(
                "slope must be a positive finite magnitude; horizontal and "
                "vertical motion have no H/V cutting word"
            )
        object.__setattr__(self, "value", v)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.value, Fraction)

    @property
    def p(self) -> int:
        """Numerator in lowest terms (H symbols per word period)."""
        if not self.is_rational:
            raise ValueError("irrational slope has no p/q form")
        return self.value.numerator

    @property
    def q(self) -> int:
        """Denominator in lowest terms (V symbols per word period)."""
        if not self.is_rational:
            raise ValueError("irrational slope has no p/q form")
        return self.value.denominator

    @property
    def is_integer(self) -> bool:
        return self.is_rational and self.q == 1

    @property
    def is_diagonal(self) -> bool:
        return self.is_rational and self.value == 1

    @property
    def is_steep(self) -> bool:
        """True when the slope exceeds 1 (the usual normalized setting)."""
        return self.value > 1


@dataclass(frozen=True)
class LaunchSpec:
    """Starting point in [0,1) x [0,1), direction signs, and slope."""

    x: Fraction
    y: Fraction
    sx: int
    sy: int
    slope: SlopeSpec

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))
        if not (0 <= self.x < 1 and 0 <= self.y < 1):
            raise ValueError(f"start must lie in [0,1)^2, got ({self.x}, {self.y})")
        if self.sx not in (-1, 1) or self.sy not in (-1, 1):
            raise ValueError("direction signs must be +1 or -1")


def launch(slope, x, y, sx: int = 1, sy: int = 1) -> LaunchSpec:
    """Convenience constructor accepting raw exact numbers."""
    spec = slope if isinstance(slope, SlopeSpec) else SlopeSpec(
        Fraction(slope) if isinstance(slope, int) else slope
    )
    return LaunchSpec(Fraction(x), Fraction(y), sx, sy, spec)


@dataclass(frozen=True)
class EncounterWord:
    """A finite, periodic, or streamed H/V symbol source.

    Periodic words record ``initial_run`` H symbols, then a V, then cyclic
    ``runs`` of H's each followed by a V.  ``corner_encounter`` is the 1-based
    encounter at which the path reaches a lattice point (the word ends just
    before it); 0 means the start itself is a lattice point.
    """

    kind: str  # "periodic" | "finite" | "stream"
    initial_run: Optional[int] = None
    runs: Optional[tuple] = None
    corner_encounter: Optional[int] = None
    phase: Optional[int] = None
    text: Optional[str] = None
    stream_factory: Optional[Callable[[], Iterator[str]]] = None

    def symbols(self) -> Iterator[str]:
        """Yield H/V symbols; stops at the corner or at the end of a finite word."""
        if self.kind == "finite":
            yield from self.text
            return
        if self.kind == "stream":
            yield from self.stream_factory()
            return
        stop = self.corner_encounter
        emitted = 0
        run = self.initial_run
        idx = 0
        nruns = len(self.runs)
        while True:
            for _ in range(run):
                if stop is not None and emitted + 1 >= stop:
                    return
                yield "H"
                emitted += 1
            if stop is not None and emitted + 1 >= stop:
                return
            yield "V"
            emitted += 1
            run = self.runs[idx]
            idx = (idx + 1) % nruns

    def prefix(self, n: int) -> str:
        out = []
        for sym in self.symbols():
            if len(out) >= n:
                break
            out.append(sym)
        return "".join(out)


def word_from_chunks(chunks) -> EncounterWord:
    """Concatenate raw H/V strings (e.g. chunk lists) into a finite word."""
    text = "".join(chunks)
    bad = set(text) - {"H", "V"}
    if bad:
        raise ValueError(f"invalid word characters: {sorted(bad)!r}")
    return EncounterWord(kind="finite", text=text)


# ---------------------------------------------------------------------------
# forward/backward crossing distances
# ---------------------------------------------------------------------------

def _forward_distances(lnch: LaunchSpec) -> tuple:
    """(a, b): distances (in |dx| and |dy|) to the first V and H crossings."""
    if lnch.sx > 0:
        a = 1 - lnch.x
    else:
        a = lnch.x if lnch.x > 0 else Fraction(1)
    if lnch.sy > 0:
        b = 1 - lnch.y
    else:
        b = lnch.y if lnch.y > 0 else Fraction(1)
    return a, b


def _backward_distances(lnch: LaunchSpec) -> tuple:
    """(a, b): distances back to the previous V and H crossings (0 = at start)."""
    if lnch.sx > 0:
        a = lnch.x
    else:
        a = 1 - lnch.x if lnch.x > 0 else Fraction(0)
    if lnch.sy > 0:
        b = lnch.y
    else:
        b = 1 - lnch.y if lnch.y > 0 else Fraction(0)
    return a, b


def launch_cell(lnch: LaunchSpec) -> tuple:
    """Start cell of a launch.

    A start on a grid line moving into it belongs to the cell ahead — the
    same just-crossed convention the word distances and stage use.
    """
    cx = -1 if lnch.x == 0 and lnch.sx < 0 else 0
    cy = -1 if lnch.y == 0 and lnch.sy < 0 else 0
    return cx, cy


def stage_of(lnch: LaunchSpec) -> int:
    """Horizontal encounters since the last vertical one, along the back-ray.

    A start on the left/right wall (previous V crossing at distance zero)
    has stage 0; a start on a horizontal grid line counts that crossing as
    just-happened.  Starts whose back-ray passes through a lattice point sit
    on a corner line and raise :class:`CornerLineError`.
    """
    s = lnch.slope.value
    a_back, _ = _backward_distances(lnch)
    if a_back == 0:
        return 0
    drop = s * a_back
    y_prev = lnch.y - drop if lnch.sy > 0 else lnch.y + drop
    if isinstance(y_prev, Fraction) and y_prev.denominator == 1:
        raise CornerLineError(
            f"launch ({lnch.x}, {lnch.y}) lies on a corner line "
            f"(previous vertical crossing at y = {y_prev})"
        )
    lo, hi = (y_prev, lnch.y) if y_prev < lnch.y else (lnch.y, y_prev)
    count = _ceil(hi) - _floor(lo) - 1
    if lnch.y == 0:
        count += 1  # the horizontal crossing at the start itself
    return count


def _floor(v) -> int:
    return v.numerator // v.denominator if isinstance(v, Fraction) else floor_exact(v)


def _ceil(v) -> int:
    return -_floor(-v)


# ---------------------------------------------------------------------------
# cutting words
# ---------------------------------------------------------------------------

def _first_corner(X1: Fraction, p: int, q: int) -> Optional[tuple]:
    """Smallest n >= 1 with X_n = X1 + (n-1)p/q a non-negative integer.

    Returns (n, X_n) or None.  X_n integral and >= 0 means the n-th vertical
    crossing coincides with a horizontal one.
    """
    v = X1.denominator
    L = v * q // math.gcd(v, q)
    U = int(X1 * L)
    P = p * L // q
    g = math.gcd(P, L)
    if U % g:
        return None
    Lg, Pg, Ug = L // g, P // g, U // g
    k0 = (-Ug * pow(Pg, -1, Lg)) % Lg if Lg > 1 else 0
    # X must also be non-negative; X increases with k, step p/q per k.
    x_at = lambda k: X1 + Fraction(p, q) * k
    k = k0
    if x_at(k) < 0:
        # advance k by Lg until X >= 0
        deficit = -x_at(k)
        steps = math.ceil(deficit / (Fraction(p, q) * Lg))
        k += steps * Lg
    Xn = x_at(k)
    assert Xn.denominator == 1 and Xn >= 0
    return k + 1, int(Xn)


def cutting_word(lnch: LaunchSpec) -> EncounterWord:
    """The launch's H/V encounter word, generated exactly.

    The n-th vertical crossing is preceded by ``h_n = max(0, floor(X_n)+1)``
    horizontal crossings, where ``X_n = s*(a + n - 1) - b`` and (a, b) are the
    forward distances to the first vertical/horizontal grid lines.  ``X_n``
    integral (and non-negative) is exactly the corner condition.
    """
    s = lnch.slope.value
    a, b = _forward_distances(lnch)
    if lnch.x == 0 and lnch.y == 0:
        # The start itself is a lattice point.
        if lnch.slope.is_rational:
            word = _periodic_word(lnch, s, a, b)
            return EncounterWord(
                kind="periodic",
                initial_run=word.initial_run,
                runs=word.runs,
                corner_encounter=0,
                phase=None,
            )
        return EncounterWord(kind="finite", text="", corner_encounter=0)
    if lnch.slope.is_rational:
        return _periodic_word(lnch, s, a, b)

    X1 = s * (a) - b  # QuadraticValue

    def stream() -> Iterator[str]:
        X = X1
        h_prev = 0
        while True:
            h = max(0, floor_exact(X) + 1)
            for _ in range(h - h_prev):
                yield "H"
            yield "V"
            h_prev = h
            X = X + s

    return EncounterWord(kind="stream", stream_factory=stream)


def _periodic_word(lnch: LaunchSpec, s: Fraction, a: Fraction, b: Fraction) -> EncounterWord:
    p, q = s.numerator, s.denominator
    X1 = s * a - b

    def h(n: int) -> int:
        Xn = X1 + s * (n - 1)
        return max(0, Xn.numerator // Xn.denominator + 1)

    hs = [h(n) for n in range(1, q + 2)]
    runs = tuple(hs[k + 1] - hs[k] for k in range(q))
    corner = _first_corner(X1, p, q)
    phase = None
    if corner is None and lnch.sx > 0 and lnch.sy > 0 and lnch.slope.is_steep:
        try:
            phase = region_of(lnch.slope, lnch.x, lnch.y)
        except CornerLineError:  # pragma: no cover - corner is None guards this
            phase = None
    return EncounterWord(
        kind="periodic",
        initial_run=hs[0],
        runs=runs,
        corner_encounter=None if corner is None else corner[0] + corner[1],
        phase=phase,
    )


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

def region_count(slope) -> int:
    """Number of distinct word phases a unit-square start can have: p + q."""
    spec = slope if isinstance(slope, SlopeSpec) else SlopeSpec(Fraction(slope))
    if not spec.is_rational:
        raise ValueError("region structure is defined for rational slopes only")
    return spec.p + spec.q


def region_of(slope, x, y) -> int:
    """Region index of an up-right launch at (x, y): 0 at the top-left.

    Two starts share a region exactly when their lines agree modulo the
    lattice, i.e. when the intercept c = y - s*x falls in the same open
    window of width 1/q.  Window boundaries are the corner lines.
    """
    spec = slope if isinstance(slope, SlopeSpec) else SlopeSpec(Fraction(slope))
    if not spec.is_rational:
        raise ValueError("region structure is defined for rational slopes only")
    c = Fraction(y) - spec.value * Fraction(x)
    t = (1 - c) * spec.q
    if t.denominator == 1:
        raise CornerLineError(f"({x}, {y}) lies on a corner line for slope {spec.value}")
    k = t.numerator // t.denominator
    if not 0 <= k < spec.p + spec.q:
        raise ValueError(f"({x}, {y}) is outside the unit square's region range")
    return k


def _clip_halfplane(poly, f):
    """Keep the part of convex polygon ``poly`` where linear ``f(pt) >= 0``."""
    out = []
    n = len(poly)
    for i in range(n):
        cur, nxt = poly[i], poly[(i + 1) % n]
        fc, fn = f(cur), f(nxt)
        if fc >= 0:
            out.append(cur)
        if (fc > 0 and fn < 0) or (fc < 0 and fn > 0):
            t = fc / (fc - fn)
            out.append(
                (cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1]))
            )
    return out


def _centroid(poly) -> tuple:
    twice_area = Fraction(0)
    cx = Fraction(0)
    cy = Fraction(0)
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        cross = x0 * y1 - x1 * y0
        twice_area += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if twice_area == 0:
        raise ValueError("degenerate region polygon")
    return cx / (3 * twice_area), cy / (3 * twice_area)


def representative_point(slope, region: int) -> LaunchSpec:
    """Exact interior witness for a region: the centroid of its polygon.

    The polygon is the unit square clipped to the region's intercept window;
    its interior avoids every corner line, so the returned launch never hits
    a corner.
    """
    spec = slope if isinstance(slope, SlopeSpec) else SlopeSpec(Fraction(slope))
    n = region_count(spec)
    if not 0 <= region < n:
        raise ValueError(f"region must be in [0, {n}), got {region}")
    q = spec.q
    c_lo = 1 - Fraction(region + 1, q)
    c_hi = 1 - Fraction(region, q)
    s = spec.value
    square = [
        (Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(0)),
        (Fraction(1), Fraction(1)),
        (Fraction(0), Fraction(1)),
    ]
    poly = _clip_halfplane(square, lambda pt: (pt[1] - s * pt[0]) - c_lo)
    poly = _clip_halfplane(poly, lambda pt: c_hi - (pt[1] - s * pt[0]))
    x, y = _centroid(poly)
    return LaunchSpec(x, y, 1, 1, spec)
