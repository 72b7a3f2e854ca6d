"""Shared fixtures.

The standard synthetic suite is expensive (45 lifts x 35 frames and a
skeletonization per frame), so it is generated once per session and the
per-frame axis estimates are cached per estimator for reuse by the
acceptance tests.
"""

import time

import pytest

from slipkit import synth
from slipkit.estimators import EstimatorKind, axis_series


@pytest.fixture(scope="session")
def suite_data():
    """Standard benchmark suite: {"lifts": [(masks, gt), ...], "seconds": t}."""
    start = time.perf_counter()
    lifts = [synth.generate_suite_frames(lift)
             for lift in synth.standard_suite()]
    return {"lifts": lifts, "seconds": time.perf_counter() - start}


@pytest.fixture(scope="session")
def suite_axes(suite_data):
    """Axis estimates per estimator, plus the wall time each one took."""
    out = {}
    for kind in EstimatorKind:
        start = time.perf_counter()
        axes = [(axis_series(masks, kind), gt)
                for masks, gt in suite_data["lifts"]]
        out[kind] = {"axes": axes, "seconds": time.perf_counter() - start}
    return out
