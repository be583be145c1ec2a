"""Bomb patterns and the rotation overlay applied at each collision.

A bomb is a finite set of wall offsets in a canonical frame whose marked edge
is the horizontal wall anchored at ``(0, 0)``, struck from below.  At every
collision the bomb is rotated — never reflected — so that the marked edge
lands on the wall just hit, approached from the particle's side, and every
wall under the rotated pattern is erased.

The four placements are pure lattice maps of the offset ``(a, b)`` onto a hit
wall anchored at ``(i, j)``:

============  =======================  =========================
hit / side    H offsets                V offsets
============  =======================  =========================
H from below  ``H(i+a, j+b)``          ``V(i+a, j+b)``
H from above  ``H(i-a, j-b)``          ``V(i+1-a, j-b-1)``
V from left   ``V(i+b, j-a)``          ``H(i+b, j+1-a)``
V from right  ``V(i-b, j+a)``          ``H(i-b-1, j+a)``
============  =======================  =========================

(Derived by rotating segment endpoints and re-anchoring; the tests check the
formulas against exactly that construction.)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .grid import H, V, WallId, parse_walls, serialize_walls

APPROACH_SIDES = ("below", "above", "left", "right")
SIDES_FOR_ORIENT = {"H": ("below", "above"), "V": ("left", "right")}

MARKED_EDGE = H(0, 0)

WING_STYLES = ("corner", "flank_low", "flank_high", "top_extend")


@dataclass(frozen=True)
class BombPattern:
    """Canonical-frame wall offsets, always containing the marked edge."""

    walls: frozenset

    def __post_init__(self):
        walls = frozenset(WallId(*w) for w in self.walls)
        if MARKED_EDGE not in walls:
            raise ValueError("bomb must contain its marked edge H(0, 0)")
        object.__setattr__(self, "walls", walls)

    def __len__(self) -> int:
        return len(self.walls)

    def __iter__(self):
        return iter(self.walls)


def single_wall() -> BombPattern:
    """The simplest bomb: the particle erases only the wall it hits."""
    return BombPattern(frozenset([MARKED_EDGE]))


def _wedge_base(n: int) -> set:
    """Full triangle: rows of 1, 3, ..., 2n+1 horizontal walls above the
    marked edge, plus every vertical wall flanked by horizontals above and
    below at both endpoints."""
    walls = set()
    for j in range(0, n + 1):
        for i in range(-j, j + 1):
            walls.add(H(i, j))
    for j in range(0, n):
        for i in range(-j, j + 2):
            walls.add(V(i, j))
    return walls


def wedge(n: int, winged: bool, wing_style: str = "corner") -> BombPattern:
    """Triangular bomb of size n, with or without its two wing edges.

    ``wing_style`` selects where the wings sit.  The shipped default
    ``"corner"`` treats the two end walls of the top horizontal row as the
    wings: the winged wedge is the full triangle and the unwinged one drops
    ``H(-n, n)`` and ``H(n, n)``.  The alternative styles keep the full
    triangle as the unwinged shape and add two extra edges when winged:
    ``flank_low`` adds ``V(-n, n-1)``/``V(n+1, n-1)``, ``flank_high`` adds
    ``V(-n, n)``/``V(n+1, n)``, ``top_extend`` adds ``H(-n-1, n)``/``H(n+1,
    n)``.  Only ``"corner"`` reproduces the measured tunnel behaviour of
    winged versus unwinged wedges; the others survive as controls.
    """
    if n < 1:
        raise ValueError("wedge size must be >= 1")
    if wing_style not in WING_STYLES:
        raise ValueError(f"unknown wing style {wing_style!r}")
    walls = _wedge_base(n)
    if wing_style == "corner":
        if not winged:
            walls -= {H(-n, n), H(n, n)}
    elif winged:
        extra = {
            "flank_low": {V(-n, n - 1), V(n + 1, n - 1)},
            "flank_high": {V(-n, n), V(n + 1, n)},
            "top_extend": {H(-n - 1, n), H(n + 1, n)},
        }[wing_style]
        walls |= extra
    return BombPattern(frozenset(walls))


def overlay(bomb: BombPattern, hit: WallId, side: str) -> list:
    """Map the bomb onto the hit wall approached from ``side``.

    Returns the walls to erase, sorted for determinism.  The marked edge
    always maps onto ``hit``.
    """
    if side not in APPROACH_SIDES:
        raise ValueError(f"unknown approach side {side!r}")
    if side not in SIDES_FOR_ORIENT[hit.orient]:
        raise ValueError(f"side {side!r} is incompatible with a {hit.orient} wall")
    i, j = hit.x, hit.y
    out = []
    if side == "below":
        for o, a, b in bomb.walls:
            out.append(WallId(o, i + a, j + b))
    elif side == "above":
        for o, a, b in bomb.walls:
            if o == "H":
                out.append(WallId("H", i - a, j - b))
            else:
                out.append(WallId("V", i + 1 - a, j - b - 1))
    elif side == "left":
        for o, a, b in bomb.walls:
            if o == "H":
                out.append(WallId("V", i + b, j - a))
            else:
                out.append(WallId("H", i + b, j + 1 - a))
    else:  # right
        for o, a, b in bomb.walls:
            if o == "H":
                out.append(WallId("V", i - b, j + a))
            else:
                out.append(WallId("H", i - b - 1, j + a))
    out.sort()
    return out


@lru_cache(maxsize=None)
def overlay_spans(bomb: BombPattern, side: str) -> tuple:
    """Overlay compiled to column spans for bulk erasure.

    Returns a tuple of ``(orient, dx, dy_lo, dy_hi)`` entries: hitting a wall
    anchored at ``(i, j)`` erases, for each entry, the walls of ``orient``
    with x = i + dx and y running over ``j + dy_lo .. j + dy_hi`` inclusive.
    Span count is O(bomb width), not O(bomb size), which is what makes big
    bombs affordable in the hot loop.
    """
    placed = overlay(bomb, H(0, 0) if side in ("below", "above") else V(0, 0), side)
    by_column: dict = {}
    for o, x, y in placed:
        by_column.setdefault((o, x), []).append(y)
    entries = []
    for (o, x), ys in sorted(by_column.items()):
        ys.sort()
        lo = prev = ys[0]
        for y in ys[1:]:
            if y == prev + 1:
                prev = y
                continue
            entries.append((o, x, lo, prev))
            lo = prev = y
        entries.append((o, x, lo, prev))
    return tuple(entries)


@lru_cache(maxsize=None)
def overlay_bbox(bomb: BombPattern, side: str) -> tuple:
    """(dx_min, dy_min, dx_max, dy_max) of overlay anchors relative to the hit."""
    spans = overlay_spans(bomb, side)
    xs = [e[1] for e in spans]
    los = [e[2] for e in spans]
    his = [e[3] for e in spans]
    return (min(xs), min(los), max(xs), max(his))


def parse_bomb(text: str) -> BombPattern:
    """Parse the bomb file format: ``H a b`` / ``V a b`` lines, ``#`` comments."""
    walls = parse_walls(text)
    if MARKED_EDGE not in walls:
        raise ValueError("bomb file is missing its marked edge line 'H 0 0'")
    return BombPattern(frozenset(walls))


def serialize_bomb(bomb: BombPattern) -> str:
    return serialize_walls(bomb.walls)


def parse_bomb_token(token: str) -> BombPattern:
    """Parse the CLI bomb syntax: single | wedge:N | wingedwedge:N | file:PATH."""
    if token == "single":
        return single_wall()
    if token.startswith("wedge:"):
        return wedge(int(token[len("wedge:"):]), winged=False)
    if token.startswith("wingedwedge:"):
        return wedge(int(token[len("wingedwedge:"):]), winged=True)
    if token.startswith("file:"):
        with open(token[len("file:"):], "r", encoding="utf-8") as fh:
            return parse_bomb(fh.read())
    raise ValueError(
        f"unknown bomb {token!r}; expected single, wedge:N, wingedwedge:N, or file:PATH"
    )
