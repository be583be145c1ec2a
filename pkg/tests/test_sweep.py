"""Tests for sweep planning, execution, checkpointing, and CSV determinism."""

import json
import os
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridblast.driver import region_of
from gridblast.exactnum import QuadraticValue
from gridblast.sweep import (
    CSV_HEADER,
    SweepError,
    SweepRecord,
    SweepSpec,
    parse_slope_list,
    parse_slope_token,
    format_slope,
    plan_tasks,
    region_representative,
    run_combination,
    run_sweep,
    sweep_to_csv,
    write_csv,
)


# ---------------------------------------------------------------------------
# selectors
# ---------------------------------------------------------------------------


def test_parse_slope_tokens():
    assert parse_slope_token("146") == Fraction(146)
    assert parse_slope_token("5/3") == Fraction(5, 3)
    assert parse_slope_token("3.01") == Fraction(301, 100)
    assert parse_slope_token("3+1/17") == Fraction(52, 17)
    v = parse_slope_token("quad:0:1:2")
    assert isinstance(v, QuadraticValue)
    assert v == QuadraticValue(0, 1, 2)
    with pytest.raises(SweepError):
        parse_slope_token("three")
    with pytest.raises(SweepError):
        parse_slope_token("")


def test_format_slope_round_trips():
    for tok in ("146", "5/3", "301/100", "quad:1:1:5:2"):
        assert format_slope(parse_slope_token(tok)) == tok


def test_parse_slope_list_atoms_and_ranges():
    assert parse_slope_list("3,5/3,3.01,3+1/17") == ("3", "5/3", "301/100", "52/17")
    assert parse_slope_list("even:2..8") == ("2", "4", "6", "8")
    assert parse_slope_list("even:3..7") == ("4", "6")
    assert parse_slope_list("1..2:1/2") == ("1", "3/2", "2")
    # duplicates collapse to their first appearance
    assert parse_slope_list("2,even:2..4") == ("2", "4")
    with pytest.raises(SweepError):
        parse_slope_list(" , ")
    with pytest.raises(SweepError):
        parse_slope_list("1..2:0")


def test_region_representative_slope3():
    assert region_representative(Fraction(3), 0) == (Fraction(1, 12), Fraction(3, 4))
    assert region_representative(Fraction(3), 1) == (Fraction(1, 3), Fraction(1, 2))
    with pytest.raises(SweepError):
        region_representative(Fraction(3), 4)


def test_region_representative_center_of_146():
    # The middle region's representative is the exact center of the square.
    assert region_representative(Fraction(146), 73) == (Fraction(1, 2), Fraction(1, 2))


@given(
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=1, max_value=7),
    st.data(),
)
def test_region_representative_lands_in_its_region(p, q, data):
    slope = Fraction(p, q)
    n = slope.numerator + slope.denominator
    i = data.draw(st.integers(min_value=0, max_value=n - 1))
    x, y = region_representative(slope, i)
    assert 0 <= x < 1 and 0 < y <= 1
    assert region_of(slope, x, y) == i


def test_regions_all_needs_rational_slope():
    spec = SweepSpec(slopes=("quad:0:1:2",), regions="all", cap=10)
    with pytest.raises(SweepError):
        plan_tasks(spec)


def test_plan_tasks_points_and_order():
    spec = SweepSpec(slopes=("3", "5/3"), regions="points:1/2,1/2;1/4,2/3", cap=10)
    tasks = plan_tasks(spec)
    assert tasks == [
        ("5/3", "1/2,1/2", "single"), ("5/3", "1/4,2/3", "single"),
        ("3", "1/2,1/2", "single"), ("3", "1/4,2/3", "single"),
    ]


def test_plan_tasks_multiple_bombs():
    spec = SweepSpec(slopes=("3",), regions="0", bombs=("wingedwedge:3", "single"),
                     cap=10)
    tasks = plan_tasks(spec)
    assert tasks == [("3", "0", "single"), ("3", "0", "wingedwedge:3")]


# ---------------------------------------------------------------------------
# single combinations
# ---------------------------------------------------------------------------


def test_combination_tunnel():
    rec = run_combination("3", "0", "single", 10 ** 4)
    assert rec.outcome == "tunnel"
    assert rec.period == 6
    assert rec.displacements == ((1, 1),)
    assert rec.onset_collisions == 1
    assert rec.band_slope == (1, 1)


def test_combination_small_cap_still_classified_by_final_scan():
    rec = run_combination("3", "0", "single", 60)
    assert rec.outcome == "tunnel"
    assert rec.period == 6
    assert rec.total_collisions == 60


def test_combination_corner():
    # The exact center under slope 1 runs into a lattice corner.
    rec = run_combination("1", "1/2,1/2", "single", 100)
    assert rec.outcome == "corner"
    assert rec.period is None
    assert rec.displacements == ()


def test_combination_lattice_start_is_instant_corner():
    rec = run_combination("3", "0,0", "single", 100)
    assert rec.outcome == "corner"
    assert rec.total_collisions == 0
    assert rec.walls_erased == 0
    assert rec.bounding_box is None


def test_combination_blob():
    rec = run_combination("2", "1", "single", 2000)
    assert rec.outcome == "blob"
    assert rec.total_collisions == 2000
    b = rec.bounding_box
    assert b[0] < 0 < b[2] and b[1] < 0 < b[3]


def test_combination_cap_without_isotropic_growth():
    # Near-3 slopes drift along a diagonal band: growth is one-sided,
    # and no period is confirmed, so the outcome is a plain cap.
    rec = run_combination("299/100", "0,1/7", "single", 3000)
    assert rec.outcome == "cap"
    assert rec.total_collisions == 3000


# ---------------------------------------------------------------------------
# rows
# ---------------------------------------------------------------------------


def test_row_round_trip():
    recs = [
        run_combination("3", "0", "single", 10 ** 3),
        run_combination("1", "1/2,1/2", "single", 100),
        run_combination("3", "0,0", "single", 100),
        run_combination("2", "1", "single", 500),
    ]
    for rec in recs:
        row = rec.to_row()
        assert len(row) == len(CSV_HEADER.split(","))
        assert SweepRecord.from_row(row) == rec


def test_header_matches_row_width():
    assert len(CSV_HEADER.split(",")) == 18


# ---------------------------------------------------------------------------
# sweep drivers
# ---------------------------------------------------------------------------


def test_slope3_all_regions_sweep():
    spec = SweepSpec(slopes=("3",), regions="all", bombs=("single",), cap=10 ** 4)
    recs = run_sweep(spec)
    assert [r.region for r in recs] == ["0", "1", "2", "3"]
    assert all(r.outcome == "tunnel" and r.period == 6 for r in recs)
    # Word phase flips the travel direction region by region.
    assert {r.displacements[0] for r in recs} == {(1, 1), (1, -1), (-1, 1)}


def test_sweep_csv_deterministic_across_workers(tmp_path):
    spec = SweepSpec(slopes=("3", "5/3"), regions="all", bombs=("single",), cap=3000)
    outs = []
    for jobs in (1, 3):
        path = tmp_path / f"sweep-{jobs}.csv"
        sweep_to_csv(spec, str(path), jobs=jobs)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    text = outs[0].decode()
    assert text.splitlines()[0] == CSV_HEADER
    # 4 regions for slope 3 and 8 for 5/3, in ascending slope order
    assert len(text.splitlines()) == 1 + 4 + 8
    assert text.splitlines()[1].startswith("5/3,0,")


class _StopAfter(Exception):
    pass


def test_sweep_interrupt_and_resume(tmp_path):
    spec = SweepSpec(slopes=("3",), regions="all", bombs=("single",), cap=2000)
    plain = tmp_path / "plain.csv"
    sweep_to_csv(spec, str(plain))

    out = tmp_path / "resumed.csv"
    seen = []

    def boom(rec):
        seen.append(rec)
        if len(seen) == 2:
            raise _StopAfter

    with pytest.raises(_StopAfter):
        sweep_to_csv(spec, str(out), on_record=boom)
    assert not out.exists()
    ckpt = tmp_path / "resumed.csv.checkpoint"
    assert ckpt.exists()
    saved = json.loads(ckpt.read_text())
    assert len(saved["rows"]) == 2

    recomputed = []
    sweep_to_csv(spec, str(out), resume=True, on_record=recomputed.append)
    assert len(recomputed) == 2  # only the missing combinations ran
    assert out.read_bytes() == plain.read_bytes()

    # Fully checkpointed: resuming again recomputes nothing.
    again = []
    sweep_to_csv(spec, str(out), resume=True, on_record=again.append)
    assert again == []
    assert out.read_bytes() == plain.read_bytes()


def test_checkpoint_interval_still_resumable(tmp_path):
    spec = SweepSpec(slopes=("3",), regions="all", cap=800, checkpoint_every=3)
    out = tmp_path / "i.csv"
    seen = []

    def boom(rec):
        seen.append(rec)
        if len(seen) == 3:
            raise _StopAfter

    with pytest.raises(_StopAfter):
        sweep_to_csv(spec, str(out), on_record=boom)
    ckpt = json.loads((tmp_path / "i.csv.checkpoint").read_text())
    assert ckpt["count"] == len(ckpt["rows"]) == 3

    sweep_to_csv(spec, str(out), resume=True)
    plain = tmp_path / "p.csv"
    sweep_to_csv(SweepSpec(slopes=("3",), regions="all", cap=800), str(plain))
    assert out.read_bytes() == plain.read_bytes()


def test_multi_bomb_sweep_rows_sorted():
    spec = SweepSpec(slopes=("3",), regions="0",
                     bombs=("wingedwedge:3", "single"), cap=500)
    recs = run_sweep(spec)
    assert [(r.bomb, r.outcome) for r in recs] == [
        ("single", "tunnel"), ("wingedwedge:3", "tunnel")]
    assert recs[0].period == 6
    assert recs[1].period == 14


def test_resume_rejects_other_spec(tmp_path):
    spec = SweepSpec(slopes=("3",), regions="all", cap=500)
    out = tmp_path / "a.csv"
    sweep_to_csv(spec, str(out))
    other = SweepSpec(slopes=("3",), regions="all", cap=501)
    with pytest.raises(SweepError):
        sweep_to_csv(other, str(out), resume=True)


def test_resume_rejects_corrupt_checkpoint(tmp_path):
    out = tmp_path / "a.csv"
    ckpt = tmp_path / "a.csv.checkpoint"
    ckpt.write_text("{not json")
    spec = SweepSpec(slopes=("3",), regions="0", cap=100)
    with pytest.raises(SweepError):
        sweep_to_csv(spec, str(out), resume=True)
    # Without --resume the stale checkpoint is discarded instead.
    sweep_to_csv(spec, str(out), resume=False)
    assert out.exists()


def test_fresh_run_ignores_old_checkpoint(tmp_path):
    spec = SweepSpec(slopes=("3",), regions="0,1", cap=300)
    out = tmp_path / "s.csv"
    sweep_to_csv(spec, str(out))
    before = (tmp_path / "s.csv.checkpoint").read_text()
    count = []
    sweep_to_csv(spec, str(out), resume=False, on_record=count.append)
    assert len(count) == 2  # recomputed, not resumed
    assert (tmp_path / "s.csv.checkpoint").read_text() == before


def test_write_csv_is_atomic(tmp_path):
    rec = run_combination("3", "0", "single", 200)
    path = tmp_path / "out.csv"
    write_csv([rec], str(path))
    assert not (tmp_path / "out.csv.tmp").exists()
    body = path.read_text()
    assert body.endswith("\n") and not body.endswith("\n\n")


def test_spec_validates_inputs():
    with pytest.raises(SweepError):
        SweepSpec(slopes=("3",), cap=0)
    with pytest.raises(ValueError):
        SweepSpec(slopes=("3",), bombs=("nonsense",))
    with pytest.raises(SweepError):
        SweepSpec(slopes=("bad",))
