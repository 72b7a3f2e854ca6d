"""Core conventions: grid validators, angle helpers, value types."""

import math

import numpy as np
import pytest

from slipkit.core import (
    Contour,
    EllipseParams,
    LiftTrace,
    AngleSample,
    MarkerVector,
    as_gray,
    as_mask,
    as_prob_map,
    canonical_axis,
    direction_angle,
    luminance,
)


class TestValidators:
    def test_as_gray_accepts_uint8(self):
        img = np.arange(6, dtype=np.uint8).reshape(2, 3)
        assert as_gray(img) is img or (as_gray(img) == img).all()

    def test_as_gray_converts_in_range_ints(self):
        out = as_gray([[0, 128], [255, 3]])
        assert out.dtype == np.uint8
        assert out[1, 0] == 255

    def test_as_gray_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            as_gray([[0, 256]])
        with pytest.raises(ValueError):
            as_gray([[-1, 0]])

    def test_as_gray_rejects_wrong_ndim(self):
        with pytest.raises(ValueError):
            as_gray(np.zeros((2, 2, 3)))

    def test_as_prob_map_bounds(self):
        assert as_prob_map([[0.0, 1.0]]).dtype == np.float64
        with pytest.raises(ValueError):
            as_prob_map([[0.0, 1.0001]])
        with pytest.raises(ValueError):
            as_prob_map([[np.nan, 0.5]])

    def test_as_mask_strictly_binary(self):
        out = as_mask([[0, 1], [1, 0]])
        assert out.dtype == np.uint8
        with pytest.raises(ValueError):
            as_mask([[0, 2]])

    def test_as_mask_accepts_bool(self):
        out = as_mask(np.array([[True, False]]))
        assert out.tolist() == [[1, 0]]

    def test_luminance_rec601(self):
        # pure channels: weights 0.299 / 0.587 / 0.114 of 255, rounded
        rgb = np.zeros((1, 3, 3), dtype=np.uint8)
        rgb[0, 0, 0] = 255
        rgb[0, 1, 1] = 255
        rgb[0, 2, 2] = 255
        out = luminance(rgb)
        assert out.tolist() == [[76, 150, 29]]

    def test_luminance_rejects_gray(self):
        with pytest.raises(ValueError):
            luminance(np.zeros((2, 2), dtype=np.uint8))


class TestAngles:
    @pytest.mark.parametrize("angle,expected", [
        (0.0, 0.0), (180.0, 0.0), (181.0, 1.0), (-10.0, 170.0),
        (359.0, 179.0), (540.0, 0.0),
    ])
    def test_canonical_axis(self, angle, expected):
        assert canonical_axis(angle) == pytest.approx(expected)

    def test_direction_angle_y_down(self):
        # y grows downward, so (1, -1) points up-right on screen: 45 deg
        assert direction_angle(1.0, -1.0) == pytest.approx(45.0)
        assert direction_angle(1.0, 1.0) == pytest.approx(135.0)
        assert direction_angle(1.0, 0.0) == pytest.approx(0.0)
        assert direction_angle(0.0, 1.0) == pytest.approx(90.0)

    def test_direction_angle_periodicity(self):
        assert direction_angle(-1.0, 1.0) == pytest.approx(direction_angle(1.0, -1.0))


class TestEllipseParams:
    def test_axis_swap_normalization(self):
        e = EllipseParams(cx=0, cy=0, a=2.0, b=5.0, theta=10.0)
        assert e.a == 5.0 and e.b == 2.0
        assert e.theta == pytest.approx(100.0)

    def test_aspect(self):
        e = EllipseParams(cx=0, cy=0, a=6.0, b=3.0, theta=0.0)
        assert e.aspect == pytest.approx(2.0)

    def test_rejects_nonpositive_axis(self):
        with pytest.raises(ValueError):
            EllipseParams(cx=0, cy=0, a=1.0, b=0.0, theta=0.0)


class TestContour:
    def test_accepts_eight_connected_ring(self):
        pts = [(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)]
        c = Contour(points=np.array(pts))
        assert len(c) == 5

    def test_rejects_gap(self):
        with pytest.raises(ValueError):
            Contour(points=np.array([(0, 0), (2, 0), (1, 1)]))

    def test_rejects_open_loop(self):
        # last-to-first step of (3, 0) is not an 8-neighbor move
        with pytest.raises(ValueError):
            Contour(points=np.array([(0, 0), (1, 0), (2, 0), (3, 0)]))

    def test_rejects_too_few_points(self):
        with pytest.raises(ValueError):
            Contour(points=np.array([(0, 0), (1, 0)]))


class TestMarkerVector:
    def test_norm(self):
        assert MarkerVector(3.0, 4.0).norm == pytest.approx(5.0)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            MarkerVector(0.0, 0.0)


class TestLiftTrace:
    def test_ground_truth_length_check(self):
        s = AngleSample(frame_index=0, raw_angle=0.0, filtered_angle=0.0,
                        reliable=True)
        with pytest.raises(ValueError):
            LiftTrace(object_id="x", samples=(s,), ground_truth=(0.0, 1.0))

    def test_empty_ground_truth_allowed(self):
        s = AngleSample(frame_index=0, raw_angle=0.0, filtered_angle=0.0,
                        reliable=True)
        t = LiftTrace(object_id="x", samples=(s,))
        assert t.ground_truth == ()
