"""Tests for tunnel detection, band fitting, and the closed-form predictors."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridblast.analysis import (
    BandEstimate,
    ColumnProfile,
    DetectorConfig,
    TunnelDetector,
    TunnelReport,
    column_profile,
    detect_tunnel,
    estimate_band,
    predict_wedge_period,
    predicted_reorg_slope,
    s_sequence,
)
from gridblast.bomb import single_wall, wedge
from gridblast.driver import launch
from gridblast.engine import RunConfig, run


def collisions_for(slope, x, y, n, bomb=None):
    cfg = RunConfig(
        launch=launch(slope, Fraction(x), Fraction(y)),
        bomb=bomb if bomb is not None else single_wall(),
        max_collisions=n,
    )
    events, outcome = run(cfg)
    return events, outcome


# ---------------------------------------------------------------------------
# Tunnel detection on known trajectories
# ---------------------------------------------------------------------------


def test_detect_slope3_tunnel():
    events, _ = collisions_for(3, Fraction(1, 9), Fraction(2, 3), 200)
    report = detect_tunnel(events)
    assert report is not None
    assert report.period == 6
    assert report.displacements == ((1, 1),)
    assert report.onset_collisions == 1
    assert report.encounter_period == 12
    assert report.band_slope == (1, 1)
    assert report.periodic


def test_detect_slope33_tunnel():
    events, _ = collisions_for(33, Fraction(1, 99), Fraction(2, 3), 4000)
    report = detect_tunnel(events)
    assert report is not None
    assert report.period == 16
    assert report.displacements == ((1, 1),)
    assert report.onset_collisions == 1
    assert report.encounter_period == 102


def test_detect_bidirectional_tunnel_slope1():
    # Vertical-band tunnels sweep back and forth: two antiparallel classes.
    events, _ = collisions_for(1, Fraction(1, 3), Fraction(2, 3), 600)
    report = detect_tunnel(events)
    assert report is not None
    assert report.period == 16
    assert len(report.displacements) == 2
    (ax, ay), (bx, by) = report.displacements
    assert ax * by - ay * bx == 0
    assert ax * bx + ay * by < 0
    assert report.encounter_period is None


def test_detect_horizontal_tunnel_slope_5_3():
    events, _ = collisions_for(Fraction(5, 3), Fraction(0), Fraction(1, 2), 400)
    report = detect_tunnel(events)
    assert report is not None
    assert report.period == 10
    assert report.displacements == ((2, 0),)
    assert report.encounter_period == 16
    assert report.band_slope == (0, 1)


def test_report_consistent_with_event_log():
    # Re-check the detector's claim directly against the raw collision log.
    events, _ = collisions_for(3, Fraction(1, 9), Fraction(2, 3), 120)
    report = detect_tunnel(events)
    cols = [e for e in events if e.kind == "collision"]
    k = report.period
    start = report.onset_collisions - 1
    for i in range(start + k, len(cols)):
        a, b = cols[i], cols[i - k]
        assert a.wall.orient == b.wall.orient
        assert a.dir == b.dir
        assert a.stage == b.stage
        disp = (a.wall.x - b.wall.x, a.wall.y - b.wall.y)
        assert disp in report.displacements


def test_detector_ignores_aperiodic_prefix():
    # A trajectory that wanders before settling must report onset > 1.
    events, _ = collisions_for(
        Fraction(7, 2), Fraction(1, 5), Fraction(1, 3), 3000
    )
    report = detect_tunnel(events)
    if report is not None:
        cols = [e for e in events if e.kind == "collision"]
        k = report.period
        start = report.onset_collisions - 1
        # Claimed onset must actually hold from that point on.
        for i in range(start + k, min(len(cols), start + 6 * k)):
            a, b = cols[i], cols[i - k]
            assert (a.wall.orient, a.dir, a.stage) == (
                b.wall.orient,
                b.dir,
                b.stage,
            )


def test_detector_requires_nonzero_displacement():
    # Same wall hit forever is a fixed cycle, not a travelling tunnel.
    det = TunnelDetector(DetectorConfig(max_period=8, check_every=16))
    for i in range(200):
        assert det.record(0, 0, 1, 1, -1 if i % 2 else 1, 0, i, i) is None
    assert det.finalize() is None


def test_detector_streaming_matches_batch():
    events, _ = collisions_for(3, Fraction(1, 9), Fraction(2, 3), 200)
    det = TunnelDetector(DetectorConfig(check_every=8))
    streamed = None
    for ev in events:
        if ev.kind != "collision":
            continue
        streamed = det.on_collision(ev)
        if streamed is not None:
            break
    if streamed is None:
        streamed = det.finalize()
    batch = detect_tunnel(events)
    assert streamed.period == batch.period
    assert streamed.displacements == batch.displacements


def test_word_period_guard_blocks_shadow_periodicity():
    # A slope just below 3 shadows the slope-3 pattern between word slips;
    # requiring whole-word encounter advances rejects those phantom periods.
    events, _ = collisions_for(
        Fraction(299, 100), Fraction(0), Fraction(1, 7), 1200
    )
    assert detect_tunnel(events) is not None  # unguarded: the shadow slips through
    assert detect_tunnel(events, DetectorConfig(word_period=399)) is None


def test_word_period_guard_keeps_real_tunnels():
    events, _ = collisions_for(3, Fraction(1, 9), Fraction(2, 3), 200)
    report = detect_tunnel(events, DetectorConfig(word_period=4))
    assert report is not None and report.period == 6

    events, _ = collisions_for(1, Fraction(1, 3), Fraction(2, 3), 600)
    report = detect_tunnel(events, DetectorConfig(word_period=2))
    assert report is not None and report.period == 16
    assert len(report.displacements) == 2


def test_detector_config_window_must_cover_verification():
    with pytest.raises(ValueError):
        TunnelDetector(DetectorConfig(max_period=100, confirmations=3, window=128))


def test_report_validation():
    with pytest.raises(ValueError):
        TunnelReport(
            period=4,
            displacements=((0, 0),),
            onset_collisions=1,
            confirmations=3,
            band_slope=(1, 1),
        )
    with pytest.raises(ValueError):
        # Two classes must be antiparallel.
        TunnelReport(
            period=4,
            displacements=((1, 0), (0, 1)),
            onset_collisions=1,
            confirmations=3,
            band_slope=(1, 1),
        )
    with pytest.raises(ValueError):
        TunnelReport(
            period=4,
            displacements=((1, 0), (-1, 0), (2, 0)),
            onset_collisions=1,
            confirmations=3,
            band_slope=(0, 1),
        )
    # Antiparallel pair is fine.
    TunnelReport(
        period=4,
        displacements=((1, 1), (-2, -2)),
        onset_collisions=1,
        confirmations=3,
        band_slope=(1, 1),
    )


# ---------------------------------------------------------------------------
# Band estimation
# ---------------------------------------------------------------------------


def test_band_of_tunnel_ray():
    events, _ = collisions_for(3, Fraction(1, 9), Fraction(2, 3), 400)
    pts = [(e.wall.x, e.wall.y) for e in events if e.kind == "collision"]
    band = estimate_band(pts)
    assert abs(band.slope - 1.0) < 0.05
    assert band.deviation < 3.0
    assert band.count == len(pts)


def test_band_of_exact_line_has_zero_deviation():
    band = estimate_band([(i, i) for i in range(64)])
    assert band.slope == pytest.approx(1.0)
    assert band.deviation == pytest.approx(0.0, abs=1e-9)


def test_blob_deviation_grows_with_extent():
    events, _ = collisions_for(2, Fraction(1, 2), Fraction(1, 2), 2500)
    pts = [(e.wall.x, e.wall.y) for e in events if e.kind == "collision"]
    early = estimate_band(pts[:600])
    late = estimate_band(pts)
    assert late.deviation > 2 * early.deviation


def test_band_exclusion_radius():
    # A noisy core plus a clean distant arm: excluding the core recovers
    # the arm's direction.
    pts = [(0, 3), (0, -3), (3, 0), (-3, 0)]
    pts += [(100 + i, 100 + i) for i in range(20)]
    band = estimate_band(pts, DetectorConfig(exclusion_radius=10.0))
    assert abs(band.slope - 1.0) < 1e-6
    assert band.deviation < 1e-6


def test_band_needs_enough_points():
    assert estimate_band([]) is None
    assert estimate_band([(1, 1)]) is None
    assert estimate_band([(0, 3), (4, 4)], DetectorConfig(exclusion_radius=5.0)) is None


def test_band_direction_sign_canonical():
    up = estimate_band([(0, i) for i in range(10)])
    assert up.direction[0] == pytest.approx(0.0, abs=1e-12)
    assert up.direction[1] > 0
    assert math.isinf(up.slope)
    left = estimate_band([(-i, 0) for i in range(10)])
    assert left.direction[0] > 0


# ---------------------------------------------------------------------------
# Closed-form predictors
# ---------------------------------------------------------------------------


def test_reorganized_slope_endpoints():
    assert predicted_reorg_slope(Fraction(3)) == 1
    assert predicted_reorg_slope(Fraction(3) + Fraction(1, 17)) == Fraction(4, 3)
    assert predicted_reorg_slope(Fraction(301, 100)) == Fraction(95, 92)


def test_reorganized_slope_monotone():
    lo = Fraction(3)
    hi = Fraction(3) + Fraction(1, 17)
    grid = [lo + (hi - lo) * Fraction(i, 40) for i in range(41)]
    vals = [predicted_reorg_slope(s) for s in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(1 <= v <= Fraction(4, 3) for v in vals)


def test_reorganized_slope_domain():
    with pytest.raises(ValueError):
        predicted_reorg_slope(Fraction(2999, 1000))
    with pytest.raises(ValueError):
        predicted_reorg_slope(Fraction(3) + Fraction(1, 16))


def test_s_sequence_values():
    seq = s_sequence(3)
    assert [t[0] for t in seq] == [3, 33, 6273]
    assert seq[1] == (33, 4, 7)
    assert seq[2][1:] == (56, 97)


def test_s_sequence_identities():
    for s, x, y in s_sequence(6):
        assert s == 2 * x * x + 1
        assert 3 * s == 2 * y * y + 1
        assert s % 10 == 3
    with pytest.raises(ValueError):
        s_sequence(0)


@given(st.integers(min_value=1, max_value=5))
def test_s_sequence_prefix_stable(n):
    assert s_sequence(n) == s_sequence(6)[:n]


def test_wedge_period_multiples_of_three():
    for n in (3, 6, 9, 12):
        assert predict_wedge_period(n, winged=True) == 14
        assert predict_wedge_period(n, winged=False) == 14


def test_wedge_period_one_mod_three():
    expected = {4: 8, 7: 6, 10: 10, 13: 6, 22: 12}
    for n, period in expected.items():
        assert predict_wedge_period(n, winged=True) == period
    # n + 2 = 3(2k+1)2^p with k = 0 has no closed form without wings.
    assert predict_wedge_period(1, winged=True) == 6
    assert predict_wedge_period(1, winged=False) is None
    assert predict_wedge_period(22, winged=False) is None
    # k > 0 keeps the closed form either way.
    assert predict_wedge_period(16, winged=True) == 8
    assert predict_wedge_period(16, winged=False) == 8


def test_wedge_period_two_mod_three_unknown():
    for n in (2, 5, 8, 11):
        assert predict_wedge_period(n, winged=True) is None
        assert predict_wedge_period(n, winged=False) is None


def test_wedge_period_rejects_bad_size():
    with pytest.raises(ValueError):
        predict_wedge_period(0, winged=True)


def test_wedge_prediction_matches_engine():
    # Cross-check a few closed-form periods against actual runs.
    for n, winged in ((3, True), (4, True), (7, True), (7, False)):
        predicted = predict_wedge_period(n, winged)
        events, _ = collisions_for(
            3, Fraction(0), Fraction(1, 2), 600, bomb=wedge(n, winged=winged)
        )
        report = detect_tunnel(events)
        assert report is not None
        assert report.period == predicted


# ---------------------------------------------------------------------------
# Single-column bounce profile
# ---------------------------------------------------------------------------


def test_column_profile_down_sequence():
    prof = column_profile(squares=(0,), k_max=6)
    assert prof.downs[0][:4] == (1, 5, 13, 25)


def test_column_profile_first_up_entries():
    prof = column_profile(squares=(0, 1), k_max=4)
    assert prof.ups[0][0] == 2
    assert prof.ups[1][0] == 3


def test_column_profile_second_differences():
    prof = column_profile(squares=(0, 1, 2, 3), k_max=30)
    for sq in (0, 1, 2, 3):
        assert set(prof.second_differences(sq, "down")) == {4}
        assert set(prof.second_differences(sq, "up")) == {4}


def test_column_profile_quadratic_fits():
    prof = column_profile(squares=(0, 1), k_max=12)
    assert prof.fits[(0, "down")] == (-2, 1)
    assert prof.fits[(0, "up")] == (0, 0)
    assert prof.fits[(1, "up")] == (0, 1)


def test_column_profile_slot_formulas():
    prof = column_profile(squares=(0,), k_max=15)
    for x in range(1, 16):
        assert prof.ups[0][x - 1] == 2 * x * x
        assert prof.downs[0][x - 1] == 2 * x * x - 2 * x + 1


def test_column_profile_negative_squares():
    prof = column_profile(squares=(-1, -2), k_max=5)
    assert all(len(v) == 5 for v in prof.downs.values())
    assert prof.downs[-1][0] < prof.downs[-2][0]


def test_column_profile_requires_depth():
    with pytest.raises(ValueError):
        column_profile(squares=(0,), k_max=1)


@settings(deadline=None, max_examples=20)
@given(st.integers(min_value=-3, max_value=3), st.integers(min_value=2, max_value=12))
def test_column_profile_entries_strictly_increase(square, k_max):
    prof = column_profile(squares=(square,), k_max=k_max)
    for seq in (prof.downs[square], prof.ups[square]):
        assert all(b > a for a, b in zip(seq, seq[1:]))
