"""Deterministic SVG figures of the cleared region and the particle's trail.

Walls are drawn, holes are implied: the scene renders every solid wall inside
an integer cell viewport and omits erased ones, so cleared space reads as
white.  The start point gets a blue dot with a red tail pointing back along
the arrival direction; an optional polyline traces the exact wall-crossing
positions.  Output depends only on the scene, byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .bomb import BombPattern, overlay
from .grid import WallId

MAX_VIEWPORT_CELLS = 10 ** 4
_SCALE = 24  # pixels per cell
_PAD = 12    # page margin in pixels


class RenderError(ValueError):
    """A scene cannot be rendered as requested."""


# ---------------------------------------------------------------------------
# scene reconstruction from event logs
# ---------------------------------------------------------------------------

def overlay_side(event) -> str:
    """Which side of the hit wall the bomb lands on.

    Event directions are post-reflection, so a horizontal wall hit that now
    moves down was struck from below, and so on.
    """
    if event.wall.orient == "H":
        return "below" if event.dir[1] < 0 else "above"
    return "left" if event.dir[0] < 0 else "right"


def replay_erased(events: Iterable, bomb: BombPattern,
                  initially_erased: Iterable[WallId] = ()) -> frozenset:
    """Erased wall set after replaying a recorded event log."""
    erased = set(initially_erased)
    for ev in events:
        if ev.kind != "collision":
            continue
        erased.update(overlay(bomb, ev.wall, overlay_side(ev)))
    return frozenset(erased)


def crossing_points(start: Tuple[Fraction, Fraction], slope_value,
                    events: Iterable) -> List[Tuple[Fraction, Fraction]]:
    """Exact positions where the trajectory meets each encountered wall.

    Each event pins one coordinate to its wall; the other advances along the
    slope from the previous point.  Pre-reflection signs are recovered from
    the recorded post-event direction.
    """
    x, y = Fraction(start[0]), Fraction(start[1])
    pts = [(x, y)]
    for ev in events:
        flip = -1 if ev.kind == "collision" else 1
        if ev.wall.orient == "V":
            sx_before = flip * ev.dir[0]
            sy_before = ev.dir[1]
            nx = Fraction(ev.wall.x)
            run = nx - x if sx_before > 0 else x - nx
            y = y + run * slope_value if sy_before > 0 else y - run * slope_value
            x = nx
        else:
            sx_before = ev.dir[0]
            sy_before = flip * ev.dir[1]
            ny = Fraction(ev.wall.y)
            rise = ny - y if sy_before > 0 else y - ny
            x = x + rise / slope_value if sx_before > 0 else x - rise / slope_value
            y = ny
        pts.append((x, y))
    return pts


# ---------------------------------------------------------------------------
# scene
# ---------------------------------------------------------------------------

def auto_viewport(erased: Iterable[WallId], margin: int = 2,
                  extra: Sequence[Tuple[Fraction, Fraction]] = (),
                  ) -> Tuple[int, int, int, int]:
    """Cell rectangle covering the erased walls, extra points, and a margin.

    With nothing to show, frames the unit square.
    """
    import math

    xs: List[int] = []
    ys: List[int] = []
    for w in erased:
        xs.extend((w.x, w.x + 1))
        ys.extend((w.y, w.y + 1))
    for px, py in extra:
        xs.extend((math.floor(px), math.ceil(px)))
        ys.extend((math.floor(py), math.ceil(py)))
    if not xs:
        xs, ys = [0, 1], [0, 1]
    return (min(xs) - margin, min(ys) - margin,
            max(xs) + margin, max(ys) + margin)


def solid_walls_in(erased, viewport: Tuple[int, int, int, int]) -> List[WallId]:
    """Solid wall segments inside the viewport, horizontals first."""
    x0, y0, x1, y1 = viewport
    erased = set(erased)
    out = [WallId("H", i, j)
           for j in range(y0, y1 + 1) for i in range(x0, x1)
           if WallId("H", i, j) not in erased]
    out += [WallId("V", i, j)
            for i in range(x0, x1 + 1) for j in range(y0, y1)
            if WallId("V", i, j) not in erased]
    return out


@dataclass(frozen=True)
class Scene:
    """Everything a figure shows: wall state, framing, and markers."""

    erased: frozenset
    viewport: Tuple[int, int, int, int]
    start: Optional[Tuple[Fraction, Fraction]] = None
    velocity: Optional[Tuple[float, float]] = None
    path: Tuple[Tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        x0, y0, x1, y1 = self.viewport
        if x1 <= x0 or y1 <= y0:
            raise RenderError(f"empty viewport {self.viewport}")
        if x1 - x0 > MAX_VIEWPORT_CELLS or y1 - y0 > MAX_VIEWPORT_CELLS:
            raise RenderError(
                f"viewport {self.viewport} exceeds "
                f"{MAX_VIEWPORT_CELLS}x{MAX_VIEWPORT_CELLS} cells"
            )


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_scene(scene: Scene) -> str:
    """Render the scene as a standalone SVG document string."""
    x0, y0, x1, y1 = scene.viewport
    width = (x1 - x0) * _SCALE + 2 * _PAD
    height = (y1 - y0) * _SCALE + 2 * _PAD

    def px(x) -> float:
        return _PAD + (float(x) - x0) * _SCALE

    def py(y) -> float:
        return _PAD + (y1 - float(y)) * _SCALE

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        '<g stroke="black" stroke-width="2" stroke-linecap="square">',
    ]
    for w in solid_walls_in(scene.erased, scene.viewport):
        ex = w.x + 1 if w.orient == "H" else w.x
        ey = w.y + 1 if w.orient == "V" else w.y
        out.append(
            f'<line x1="{_fmt(px(w.x))}" y1="{_fmt(py(w.y))}" '
            f'x2="{_fmt(px(ex))}" y2="{_fmt(py(ey))}"/>'
        )
    out.append("</g>")
    if scene.path:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in scene.path)
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="#2a7f2a" '
            'stroke-width="1"/>'
        )
    if scene.start is not None:
        sx, sy = px(scene.start[0]), py(scene.start[1])
        if scene.velocity is not None:
            vx, vy = scene.velocity
            norm = (vx * vx + vy * vy) ** 0.5 or 1.0
            tx = sx - vx / norm * 0.6 * _SCALE
            ty = sy + vy / norm * 0.6 * _SCALE  # svg y points down
            out.append(
                f'<path d="M {_fmt(sx)} {_fmt(sy)} L {_fmt(tx)} {_fmt(ty)}" '
                'stroke="red" stroke-width="2" fill="none"/>'
            )
        out.append(
            f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="{_SCALE * 0.18:.2f}" '
            'fill="blue"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
