"""Estimators: thinning, axis angles, relative rotation, lift tracking."""

import math

import numpy as np
import pytest

from slipkit.core import (
    DegenerateSkeletonError,
    InitialContactUnreliableError,
    NoContactError,
)
from slipkit.estimators import (
    AxisEstimate,
    EstimatorKind,
    WindowFilter,
    axis_angle_from_skeleton,
    axis_series,
    ellipse_angle,
    estimate_axis,
    pca_angle,
    relative_angle,
    skeleton_angle,
    skeletonize,
    trace_from_axes,
    track_lift,
)


# ---------------------------------------------------------------------------
# Independent reference thinning (scalar, per-pixel; written separately
# from the vectorized implementation under test)
# ---------------------------------------------------------------------------

def _reference_thin(mask):
    img = np.array(mask, dtype=np.uint8).copy()
    h, w = img.shape

    def neighbors(y, x):
        # P2..P9 clockwise from north, zero outside the image
        offs = [(-1, 0), (-1, 1), (0, 1), (1, 1),
                (1, 0), (1, -1), (0, -1), (-1, -1)]
        vals = []
        for dy, dx in offs:
            ny, nx = y + dy, x + dx
            vals.append(int(img[ny, nx]) if 0 <= ny < h and 0 <= nx < w else 0)
        return vals

    while True:
        changed = False
        for step in (0, 1):
            kill = []
            for y in range(h):
                for x in range(w):
                    if not img[y, x]:
                        continue
                    n = neighbors(y, x)
                    b = sum(n)
                    if not (2 <= b <= 6):
                        continue
                    a = sum(1 for i in range(8)
                            if n[i] == 0 and n[(i + 1) % 8] == 1)
                    if a != 1:
                        continue
                    p2, p3, p4, p5, p6, p7, p8, p9 = n
                    if step == 0:
                        if p2 * p4 * p6 != 0 or p4 * p6 * p8 != 0:
                            continue
                    else:
                        if p2 * p4 * p8 != 0 or p2 * p6 * p8 != 0:
                            continue
                    kill.append((y, x))
            for y, x in kill:
                img[y, x] = 0
                changed = True
        if not changed:
            return img


def _bar_mask(h, w, length, width, angle_deg, cy=None, cx=None):
    """Rectangle of the given axis angle rendered by pixel-center test."""
    cy = h / 2 if cy is None else cy
    cx = w / 2 if cx is None else cx
    th = math.radians(angle_deg)
    ys, xs = np.mgrid[0:h, 0:w]
    dx = xs - cx
    dy = ys - cy
    # y-down screen frame: CCW angle pairs +x with -y
    t = dx * math.cos(th) - dy * math.sin(th)
    s = dx * math.sin(th) + dy * math.cos(th)
    return ((np.abs(t) <= length / 2) & (np.abs(s) <= width / 2)).astype(np.uint8)


def _axis_diff(a, b):
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


# ---------------------------------------------------------------------------
# Thinning
# ---------------------------------------------------------------------------

class TestSkeletonize:
    def test_all_3x3_neighborhoods(self):
        # every 3x3 center pattern, embedded mid-grid so padding matters
        for code in range(512):
            mask = np.zeros((7, 7), dtype=np.uint8)
            bits = [(code >> i) & 1 for i in range(9)]
            mask[2:5, 2:5] = np.array(bits, dtype=np.uint8).reshape(3, 3)
            if not mask.any():
                continue
            assert (skeletonize(mask) == _reference_thin(mask)).all(), code

    def test_random_blobs_match_reference(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            mask = (rng.random((14, 14)) < 0.45).astype(np.uint8)
            if not mask.any():
                continue
            assert (skeletonize(mask) == _reference_thin(mask)).all()

    def test_subset_and_idempotent(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            mask = (rng.random((20, 20)) < 0.5).astype(np.uint8)
            if not mask.any():
                continue
            sk = skeletonize(mask)
            assert (sk <= mask).all()
            assert (skeletonize(sk) == sk).all()

    def test_horizontal_bar_thins_to_line(self):
        mask = np.zeros((7, 15), dtype=np.uint8)
        mask[2:5, 2:13] = 1  # 3x11 bar
        sk = skeletonize(mask)
        ys, xs = np.nonzero(sk)
        assert len(set(ys)) == 1
        assert 8 <= len(xs) <= 11

    def test_single_pixel_is_fixpoint(self):
        mask = np.zeros((5, 5), dtype=np.uint8)
        mask[2, 2] = 1
        assert (skeletonize(mask) == mask).all()

    def test_disk_collapses(self):
        ys, xs = np.mgrid[0:20, 0:20]
        mask = (((ys - 10) ** 2 + (xs - 10) ** 2) <= 64).astype(np.uint8)
        assert skeletonize(mask).sum() <= 3

    def test_empty_raises(self):
        with pytest.raises(NoContactError):
            skeletonize(np.zeros((4, 4), dtype=np.uint8))


class TestAxisFromSkeleton:
    def test_horizontal(self):
        sk = np.zeros((5, 9), dtype=np.uint8)
        sk[2, 1:8] = 1
        assert axis_angle_from_skeleton(sk) == pytest.approx(0.0)

    def test_main_diagonal_is_135(self):
        # y grows downward: the numpy main diagonal slopes down-right
        assert axis_angle_from_skeleton(np.eye(7, dtype=np.uint8)) \
            == pytest.approx(135.0)

    def test_rotated_bar_within_one_degree(self):
        mask = _bar_mask(64, 64, 40, 8, 30.0)
        assert _axis_diff(axis_angle_from_skeleton(skeletonize(mask)), 30.0) < 1.5

    def test_too_few_pixels(self):
        sk = np.zeros((3, 3), dtype=np.uint8)
        sk[1, 1] = 1
        with pytest.raises(DegenerateSkeletonError):
            axis_angle_from_skeleton(sk)


# ---------------------------------------------------------------------------
# Per-mask estimators
# ---------------------------------------------------------------------------

class TestPcaAngle:
    def test_axis_aligned_rectangle(self):
        mask = np.zeros((10, 30), dtype=np.uint8)
        mask[3:7, 5:25] = 1
        angle, reliable = pca_angle(mask)
        assert angle == pytest.approx(0.0)
        assert reliable

    def test_rotated_bar(self):
        mask = _bar_mask(80, 80, 50, 10, 17.0)
        angle, reliable = pca_angle(mask)
        assert _axis_diff(angle, 17.0) < 1.0
        assert reliable

    def test_circle_unreliable(self):
        ys, xs = np.mgrid[0:40, 0:40]
        mask = (((ys - 20) ** 2 + (xs - 20) ** 2) <= 144).astype(np.uint8)
        _, reliable = pca_angle(mask)
        assert not reliable

    def test_empty_raises(self):
        with pytest.raises(NoContactError):
            pca_angle(np.zeros((5, 5), dtype=np.uint8))


class TestEllipseAngle:
    def test_rotated_bar(self):
        mask = _bar_mask(80, 80, 48, 14, 25.0)
        angle, reliable = ellipse_angle(mask)
        assert _axis_diff(angle, 25.0) < 1.0
        assert reliable

    def test_circle_unreliable(self):
        ys, xs = np.mgrid[0:50, 0:50]
        mask = (((ys - 25) ** 2 + (xs - 25) ** 2) <= 200).astype(np.uint8)
        _, reliable = ellipse_angle(mask)
        assert not reliable

    def test_empty_raises(self):
        with pytest.raises(NoContactError):
            ellipse_angle(np.zeros((30, 30), dtype=np.uint8))


class TestSkeletonAngle:
    @pytest.mark.parametrize("true_angle", [0.0, 20.0, 44.0, 70.0, 90.0, 130.0])
    def test_rotated_bars(self, true_angle):
        mask = _bar_mask(96, 96, 56, 16, true_angle)
        angle, reliable = skeleton_angle(mask)
        assert _axis_diff(angle, true_angle) < 2.0
        assert reliable

    def test_exact_diagonal_bar_degenerates_loudly(self):
        # a perfect 45-degree staircase erodes symmetrically to a point;
        # the estimator must refuse rather than return a made-up angle
        mask = _bar_mask(96, 96, 56, 16, 45.0)
        with pytest.raises(DegenerateSkeletonError):
            skeleton_angle(mask)
        series = axis_series([mask], EstimatorKind.SKELETON)
        assert series[0] == AxisEstimate(angle=None, reliable=False)

    def test_ignores_small_secondary_blob(self):
        mask = _bar_mask(96, 96, 56, 16, 40.0)
        mask[2:6, 2:6] = 1
        angle, _ = skeleton_angle(mask)
        assert _axis_diff(angle, 40.0) < 1.5

    def test_circle_never_silently_reliable(self):
        ys, xs = np.mgrid[0:60, 0:60]
        mask = (((ys - 30) ** 2 + (xs - 30) ** 2) <= 256).astype(np.uint8)
        try:
            _, reliable = skeleton_angle(mask)
        except DegenerateSkeletonError:
            reliable = False  # a disk may thin all the way to one pixel
        assert not reliable

    def test_small_region_raises(self):
        mask = np.zeros((20, 20), dtype=np.uint8)
        mask[5:9, 5:9] = 1  # 16 px < min area
        with pytest.raises(NoContactError):
            skeleton_angle(mask)

    def test_denoise_variant_runs(self):
        mask = _bar_mask(96, 96, 56, 18, 60.0)
        angle, reliable = skeleton_angle(mask, denoise=True)
        assert _axis_diff(angle, 60.0) < 2.0
        assert reliable


def test_estimate_axis_dispatch():
    mask = _bar_mask(80, 80, 48, 14, 10.0)
    for kind in EstimatorKind:
        angle, reliable = estimate_axis(mask, kind)
        assert _axis_diff(angle, 10.0) < 1.5
        assert reliable


def test_estimator_kind_from_string():
    assert EstimatorKind.from_string("Skeleton") is EstimatorKind.SKELETON
    with pytest.raises(ValueError):
        EstimatorKind.from_string("median")


# ---------------------------------------------------------------------------
# Relative angle and filtering
# ---------------------------------------------------------------------------

class TestRelativeAngle:
    @pytest.mark.parametrize("cur,init,expected", [
        (30.0, 30.0, 0.0),
        (10.0, 170.0, 20.0),   # wrap across 0/180
        (120.0, 100.0, 20.0),
        (100.0, 120.0, -20.0),
        (0.0, 90.0, -90.0),
    ])
    def test_values(self, cur, init, expected):
        assert relative_angle(cur, init) == pytest.approx(expected)

    def test_bounded(self):
        rng = np.random.default_rng(9)
        for cur, init in rng.uniform(0, 180, size=(200, 2)):
            assert abs(relative_angle(cur, init)) <= 90.0


class TestWindowFilter:
    def test_warmup_then_window(self):
        f = WindowFilter(2)
        assert f.push(10.0) == pytest.approx(10.0)
        assert f.push(20.0) == pytest.approx(15.0)
        assert f.push(30.0) == pytest.approx(25.0)  # (20+30)/2

    def test_window_one_is_identity(self):
        f = WindowFilter(1)
        for v in (3.0, -7.0, 12.5):
            assert f.push(v) == v

    def test_constant_input_converges(self):
        f = WindowFilter(5)
        out = [f.push(4.0) for _ in range(8)]
        assert all(v == pytest.approx(4.0) for v in out)

    def test_rejects_bad_size(self):
        with pytest.raises(ValueError):
            WindowFilter(0)


# ---------------------------------------------------------------------------
# Lift tracking
# ---------------------------------------------------------------------------

class TestTraceFromAxes:
    def test_first_frame_must_be_reliable(self):
        axes = [AxisEstimate(angle=10.0, reliable=False),
                AxisEstimate(angle=12.0, reliable=True)]
        with pytest.raises(InitialContactUnreliableError):
            trace_from_axes(axes, n=2)

    def test_hold_last_on_missing_frame(self):
        axes = [AxisEstimate(30.0, True), AxisEstimate(32.0, True),
                AxisEstimate(None, False), AxisEstimate(34.0, True)]
        trace = trace_from_axes(axes, n=1)
        s = trace.samples
        assert s[2].raw_angle == s[1].raw_angle
        assert s[2].filtered_angle == s[1].filtered_angle
        assert not s[2].reliable
        assert s[3].raw_angle == pytest.approx(4.0)

    def test_empty_sequence(self):
        with pytest.raises(ValueError):
            trace_from_axes([], n=2)


class TestTrackLift:
    def test_constant_sequence(self):
        masks = [_bar_mask(80, 80, 48, 14, 50.0)] * 6
        trace = track_lift(masks, EstimatorKind.SKELETON, n=2)
        for s in trace.samples:
            assert abs(s.filtered_angle) < 0.5

    def test_ramp_tracked_with_lag(self):
        masks = [_bar_mask(128, 128, 70, 18, 20.0 + step)
                 for step in range(0, 31, 2)]
        trace = track_lift(masks, EstimatorKind.SKELETON, n=2)
        gt = list(range(0, 31, 2))
        # window-2 mean lags the 2 deg/frame ramp by about 1 degree
        for s, g in zip(trace.samples[2:], gt[2:]):
            assert abs(s.filtered_angle - g) < 2.5

    def test_circle_first_frame_raises(self):
        ys, xs = np.mgrid[0:60, 0:60]
        circle = (((ys - 30) ** 2 + (xs - 30) ** 2) <= 256).astype(np.uint8)
        with pytest.raises(InitialContactUnreliableError):
            track_lift([circle] * 3, EstimatorKind.PCA, n=2)

    def test_axis_series_swallow_degenerate_frames(self):
        good = _bar_mask(80, 80, 48, 14, 10.0)
        empty = np.zeros_like(good)
        series = axis_series([good, empty, good], EstimatorKind.ELLIPSE)
        assert series[1] == AxisEstimate(angle=None, reliable=False)
        assert series[0].reliable and series[2].reliable
