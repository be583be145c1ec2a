"""Wall identification and mutable wall state for the whole plane.

The particle lives on the unit-square grid.  ``H(i, j)`` is the horizontal
segment from ``(i, j)`` to ``(i+1, j)`` — anchored at its leftmost endpoint —
and ``V(i, j)`` the vertical segment from ``(i, j)`` to ``(i, j+1)``, anchored
at its lowest endpoint.  Every wall starts solid; a run only ever erases.
The state is therefore stored sparsely as the set of erased walls.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional


class WallId(NamedTuple):
    orient: str  # "H" or "V"
    x: int
    y: int


def H(x: int, y: int) -> WallId:
    return WallId("H", x, y)


def V(x: int, y: int) -> WallId:
    return WallId("V", x, y)


BoundingBox = tuple[int, int, int, int]  # (xmin, ymin, xmax, ymax) over anchors


class WallState:
    """Erased-wall set for one run.  Grows monotonically, never shrinks."""

    __slots__ = ("erased", "initially_erased", "_bbox")

    def __init__(self, initially_erased: Iterable[WallId] = ()):
        walls = [WallId(*w) for w in initially_erased]
        self.initially_erased: tuple[WallId, ...] = tuple(walls)
        self.erased: set[WallId] = set()
        self._bbox: Optional[BoundingBox] = None
        self.erase_all(walls)

    def is_solid(self, w: WallId) -> bool:
        return w not in self.erased

    def erase(self, w: WallId) -> bool:
        """Erase one wall; True iff it was solid before."""
        if w in self.erased:
            return False
        self.erased.add(w)
        x, y = w.x, w.y
        if self._bbox is None:
            self._bbox = (x, y, x, y)
        else:
            x0, y0, x1, y1 = self._bbox
            self._bbox = (min(x0, x), min(y0, y), max(x1, x), max(y1, y))
        return True

    def erase_all(self, walls: Iterable[WallId]) -> int:
        """Erase many walls; returns how many were newly erased."""
        return sum(self.erase(w) for w in walls)

    def erased_bounding_box(self) -> Optional[BoundingBox]:
        """Smallest integer rectangle over erased anchors, or None if fresh."""
        return self._bbox

    def __len__(self) -> int:
        return len(self.erased)


def parse_walls(text: str) -> list[WallId]:
    """Parse the wall dump format: one ``H i j`` or ``V i j`` per line.

    Blank lines and ``#`` comments are ignored.  Malformed lines raise
    ValueError with the offending line number.
    """
    walls = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("H", "V"):
            raise ValueError(f"line {lineno}: expected 'H i j' or 'V i j', got {raw!r}")
        try:
            x, y = int(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"line {lineno}: bad integer in {raw!r}") from None
        walls.append(WallId(parts[0], x, y))
    return walls


def serialize_walls(walls: Iterable[WallId]) -> str:
    """Canonical dump: sorted by (orientation, x, y), newline-terminated."""
    lines = [f"{w.orient} {w.x} {w.y}" for w in sorted(walls)]
    return "\n".join(lines) + ("\n" if lines else "")


def load_walls(path) -> list[WallId]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_walls(fh.read())


def save_walls(path, walls: Iterable[WallId]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_walls(walls))
