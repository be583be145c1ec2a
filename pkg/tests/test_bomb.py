from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gridblast.bomb import (
    BombPattern,
    overlay,
    overlay_bbox,
    overlay_spans,
    parse_bomb,
    parse_bomb_token,
    serialize_bomb,
    single_wall,
    wedge,
)
from gridblast.grid import H, V, WallId


# --- independent oracle: rotate segment endpoints, then re-anchor ----------

ROTATIONS = {
    # Maps chosen so the canonical below-approach normal (0,-1) lands on the
    # requested side's approach normal; no reflections.
    "below": lambda x, y: (x, y),
    "above": lambda x, y: (-x, -y),
    "left": lambda x, y: (y, -x),
    "right": lambda x, y: (-y, x),
}


def endpoints(w):
    if w.orient == "H":
        return (w.x, w.y), (w.x + 1, w.y)
    return (w.x, w.y), (w.x, w.y + 1)


def anchor_of(p, q):
    (x0, y0), (x1, y1) = sorted((p, q))
    if y0 == y1:
        return WallId("H", x0, y0)
    assert x0 == x1
    return WallId("V", x0, y0)


def oracle_overlay(bomb, hit, side):
    rot = ROTATIONS[side]
    r0, r1 = sorted((rot(0, 0), rot(1, 0)))
    h0, h1 = sorted(endpoints(hit))
    t = (h0[0] - r0[0], h0[1] - r0[1])
    assert (r1[0] + t[0], r1[1] + t[1]) == h1  # unit length preserved
    out = set()
    for w in bomb.walls:
        p, q = endpoints(w)
        rp, rq = rot(*p), rot(*q)
        out.add(anchor_of((rp[0] + t[0], rp[1] + t[1]), (rq[0] + t[0], rq[1] + t[1])))
    return out


offsets = st.integers(min_value=-6, max_value=6)
bomb_walls = st.frozensets(
    st.builds(WallId, st.sampled_from(["H", "V"]), offsets, offsets), max_size=20
)
bombs = st.builds(lambda ws: BombPattern(ws | {H(0, 0)}), bomb_walls)
hits_h = st.builds(H, offsets, offsets)
hits_v = st.builds(V, offsets, offsets)


def test_single_wall():
    b = single_wall()
    assert set(b.walls) == {H(0, 0)}
    assert len(b) == 1
    assert overlay(b, H(5, 7), "below") == [H(5, 7)]
    assert overlay(b, V(2, 3), "left") == [V(2, 3)]
    assert overlay(b, V(2, 3), "right") == [V(2, 3)]
    assert overlay(b, H(5, 7), "above") == [H(5, 7)]


def test_marked_edge_required():
    with pytest.raises(ValueError):
        BombPattern(frozenset([V(1, 0)]))


def test_wedge_shapes_default_style():
    full = {H(0, 0), H(-1, 1), H(0, 1), H(1, 1), V(0, 0), V(1, 0)}
    assert set(wedge(1, winged=True).walls) == full
    assert set(wedge(1, winged=False).walls) == full - {H(-1, 1), H(1, 1)}
    for n in (1, 2, 3, 7):
        base = (n + 1) ** 2 + n * (n + 1)
        assert len(wedge(n, winged=True)) == base
        assert len(wedge(n, winged=False)) == base - 2


def test_wedge_alternative_wing_styles():
    full = {H(0, 0), H(-1, 1), H(0, 1), H(1, 1), V(0, 0), V(1, 0)}
    assert set(wedge(1, False, "flank_low").walls) == full
    assert set(wedge(1, True, "flank_low").walls) == full | {V(-1, 0), V(2, 0)}
    assert set(wedge(1, True, "flank_high").walls) == full | {V(-1, 1), V(2, 1)}
    assert set(wedge(1, True, "top_extend").walls) == full | {H(-2, 1), H(2, 1)}
    with pytest.raises(ValueError):
        wedge(1, True, "nope")
    with pytest.raises(ValueError):
        wedge(0, True)


def test_wedge_is_mirror_symmetric():
    def mirrored(w):
        # Reflection across the vertical line x = 1/2 through the marked edge.
        if w.orient == "H":
            return H(-w.x, w.y)
        return V(1 - w.x, w.y)

    for n in (1, 2, 3, 5):
        for winged in (False, True):
            b = wedge(n, winged)
            assert {mirrored(w) for w in b.walls} == set(b.walls)


def test_overlay_wedge_from_left_spec_case():
    b = wedge(1, winged=True)  # the full six-wall triangle
    got = set(overlay(b, V(0, 0), "left"))
    assert got == {V(0, 0), V(1, -1), V(1, 0), V(1, 1), H(0, 0), H(0, 1)}


def test_overlay_side_compatibility():
    b = single_wall()
    with pytest.raises(ValueError):
        overlay(b, H(0, 0), "left")
    with pytest.raises(ValueError):
        overlay(b, V(0, 0), "below")
    with pytest.raises(ValueError):
        overlay(b, H(0, 0), "sideways")


@given(bombs, hits_h, st.sampled_from(["below", "above"]))
def test_overlay_matches_endpoint_rotation_h(bomb, hit, side):
    assert set(overlay(bomb, hit, side)) == oracle_overlay(bomb, hit, side)


@given(bombs, hits_v, st.sampled_from(["left", "right"]))
def test_overlay_matches_endpoint_rotation_v(bomb, hit, side):
    assert set(overlay(bomb, hit, side)) == oracle_overlay(bomb, hit, side)


@given(bombs, hits_h.flatmap(lambda h: st.tuples(st.just(h), st.sampled_from(["below", "above"])))
       | hits_v.flatmap(lambda v: st.tuples(st.just(v), st.sampled_from(["left", "right"]))))
def test_overlay_is_a_bijection(bomb, hit_side):
    hit, side = hit_side
    placed = overlay(bomb, hit, side)
    assert len(placed) == len(set(placed)) == len(bomb)
    assert hit in placed  # marked edge lands on the hit wall


@given(bombs, hits_h)
def test_above_composes_to_identity(bomb, hit):
    once = BombPattern(frozenset(overlay(bomb, H(0, 0), "above")))
    twice = set(overlay(once, H(0, 0), "above"))
    assert twice == set(bomb.walls)
    # And placing at a general anchor is the 0,0 placement translated.
    at_hit = set(overlay(bomb, hit, "above"))
    assert at_hit == {WallId(o, x + hit.x, y + hit.y) for o, x, y in overlay(bomb, H(0, 0), "above")}


@given(bombs)
def test_left_and_right_overlays_differ_by_half_turn(bomb):
    def half_turn(w):
        # 180 degrees about the center (0, 1/2) of the hit wall V(0, 0).
        p, q = endpoints(w)
        return anchor_of((-p[0], 1 - p[1]), (-q[0], 1 - q[1]))

    left = set(overlay(bomb, V(0, 0), "left"))
    right = set(overlay(bomb, V(0, 0), "right"))
    assert {half_turn(w) for w in left} == right


@given(st.integers(min_value=1, max_value=5), st.booleans(),
       st.sampled_from(["below", "above", "left", "right"]))
def test_symmetric_bomb_overlay_symmetry(n, winged, side):
    hit = H(3, -2) if side in ("below", "above") else V(3, -2)
    placed = set(overlay(wedge(n, winged), hit, side))

    if side in ("below", "above"):
        def mirror(w):  # across x = hit.x + 1/2
            p, q = endpoints(w)
            return anchor_of((2 * hit.x + 1 - p[0], p[1]), (2 * hit.x + 1 - q[0], q[1]))
    else:
        def mirror(w):  # across y = hit.y + 1/2
            p, q = endpoints(w)
            return anchor_of((p[0], 2 * hit.y + 1 - p[1]), (q[0], 2 * hit.y + 1 - q[1]))

    assert {mirror(w) for w in placed} == placed


@given(bombs, st.sampled_from(["below", "above", "left", "right"]),
       offsets, offsets)
def test_overlay_spans_expand_to_overlay(bomb, side, i, j):
    hit = H(i, j) if side in ("below", "above") else V(i, j)
    expanded = set()
    for o, dx, lo, hi in overlay_spans(bomb, side):
        for y in range(lo, hi + 1):
            expanded.add(WallId(o, i + dx, j + y))
    assert expanded == set(overlay(bomb, hit, side))

    xs, ys = zip(*[(w.x, w.y) for w in expanded])
    dx0, dy0, dx1, dy1 = overlay_bbox(bomb, side)
    assert (min(xs), min(ys), max(xs), max(ys)) == (i + dx0, j + dy0, i + dx1, j + dy1)


def test_wedge_spans_are_compact():
    b = wedge(10, winged=True)
    for side in ("below", "above", "left", "right"):
        spans = overlay_spans(b, side)
        assert sum(hi - lo + 1 for _, _, lo, hi in spans) == len(b)
        # O(width) entries, not O(size): the whole point of span compilation.
        assert len(spans) < 50


def test_parse_serialize_round_trip():
    for b in (single_wall(), wedge(2, True), wedge(3, False)):
        assert parse_bomb(serialize_bomb(b)) == b
    assert parse_bomb("H 0 0\n") == single_wall()
    assert parse_bomb("# comment\nH 0 0\nV 1 0\n").walls == frozenset([H(0, 0), V(1, 0)])
    with pytest.raises(ValueError, match="marked edge"):
        parse_bomb("V 1 0\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_bomb("H x 0\n")


def test_parse_bomb_token(tmp_path):
    assert parse_bomb_token("single") == single_wall()
    assert parse_bomb_token("wedge:3") == wedge(3, winged=False)
    assert parse_bomb_token("wingedwedge:7") == wedge(7, winged=True)
    path = tmp_path / "bomb.txt"
    path.write_text(serialize_bomb(wedge(2, True)))
    assert parse_bomb_token(f"file:{path}") == wedge(2, True)
    with pytest.raises(ValueError):
        parse_bomb_token("blob")
